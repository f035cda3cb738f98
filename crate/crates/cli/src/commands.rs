//! Subcommand bodies.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use dsim::bench::{check_covariance, mae_bench, median, verify_covariance, BenchConfig, CovarianceCheck, VerifyConfig};
use dsim::covariance::{dsiar1_seasonal, sbm_seasonal, SeasonalCovariance};
use dsim::estimate::{estimate_seasonal, hurst_variation};
use dsim::grid::{EquispacedScaleGrid, Grid, ScaleGrid};
use dsim::mle::{hurst_mle, MleConfig, MleFamily};
use dsim::path::SampledPath;
use dsim::process::{simulate_dsiar, simulate_sbm, Drift, DsiarModel, ModelSpec, SbmModel};
use dsim::rng::Stream;
use dsim::spectral::{omega_grid, q_matrix, write_q_csv, write_spectral_csv, SpectralDensity};

use crate::config::{round_json, GridChoice, Settings};
use crate::CliError;

pub const DEFAULT_OMEGA_POINTS: usize = 256;

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

/// Writes to `out`, or stdout when `None`.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> dsim::Result<()>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut f = io::BufWriter::new(fs::File::create(p).map_err(dsim::Error::from)?);
            write(&mut f)?;
            f.flush().map_err(dsim::Error::from)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, mut value: Value) -> Result<(), CliError> {
    round_json(&mut value);
    let text = serde_json::to_string_pretty(&value).expect("JSON values serialize") + "\n";
    emit(out, |w| Ok(w.write_all(text.as_bytes())?))
}

fn dsiar_model(s: &Settings) -> Result<DsiarModel, CliError> {
    if let Some(spec @ ModelSpec::Dsiar { .. }) = &s.spec {
        let mut m = spec.clone().into_dsiar()?;
        // inline flags still win over the file's spec
        if let Some(h) = s.hurst {
            m.hurst = h;
        }
        if let Some(a) = s.alpha {
            m.alpha = a;
        }
        return Ok(DsiarModel::new(m.hurst, m.alpha, m.period, m.theta, m.sigma)?);
    }
    let theta = need(s.theta.clone(), "--theta")?;
    let sigma = s.sigma.clone().unwrap_or_else(|| vec![1.0; theta.len()]);
    let period = s.period.unwrap_or(theta.len());
    Ok(DsiarModel::new(
        need(s.hurst, "--H")?,
        need(s.alpha, "--alpha")?,
        period,
        vec![theta],
        sigma,
    )?)
}

fn sbm_path(s: &Settings, default_grid: GridChoice, seed: u64) -> Result<SampledPath, CliError> {
    let hurst = need(s.hurst, "--H")?;
    let period = need(s.period, "--T")?;
    let intervals = need(s.intervals, "--M")?;
    let (alpha, lambda) = s.scale(period)?;
    let grid: Grid = match s.grid(default_grid)? {
        GridChoice::Geometric => ScaleGrid::new(alpha, period, intervals)?.into(),
        GridChoice::Equispaced => EquispacedScaleGrid::new(lambda, period, intervals)?.into(),
    };
    let model = SbmModel::new(hurst, lambda, s.drift()?)?;
    Ok(simulate_sbm(&model, &grid, Stream::new(seed, 0))?)
}

pub fn simulate(s: Settings) -> Result<(), CliError> {
    let s = s.with_spec_defaults();
    let seed = s.require_seed()?;
    let out = need(s.out.clone(), "--out")?;
    let path = match s.model_name().as_str() {
        "sbm" => sbm_path(&s, GridChoice::Geometric, seed)?,
        "dsiar" => {
            let model = dsiar_model(&s)?;
            if s.grid(GridChoice::Geometric)? != GridChoice::Geometric {
                return Err(CliError::Input("DSIAR is sampled on the geometric grid only".into()));
            }
            let grid = ScaleGrid::new(model.alpha, model.period, need(s.intervals, "--M")?)?;
            let burn_in = s.burn_in.unwrap_or_else(|| model.default_burn_in());
            simulate_dsiar(&model, &grid, Stream::new(seed, 0), burn_in)?
        }
        other => return Err(CliError::Usage(format!("unknown model '{other}' (expected sbm or dsiar)"))),
    };
    let side = path.save(&out)?;
    log::info!("wrote {} and {}", out.display(), side.display());
    Ok(())
}

fn load_path(p: &Path) -> Result<SampledPath, CliError> {
    Ok(SampledPath::load(p)?)
}

/// `H` from flags, then the path's sidecar.
fn path_hurst(s: &Settings, path: &SampledPath) -> Result<f64, CliError> {
    s.hurst
        .or(path.meta.hurst)
        .ok_or_else(|| CliError::Usage("path sidecar has no H; pass --H".into()))
}

fn path_drift(s: &Settings, path: &SampledPath) -> Result<Drift, CliError> {
    if s.drift.is_some() {
        return s.drift();
    }
    let m = &path.meta.model;
    Ok(match m.find("drift=") {
        Some(i) => m[i + 6..].trim_end_matches(']').parse().unwrap_or(Drift::None),
        None => Drift::None,
    })
}

fn check_json(c: &CovarianceCheck) -> Value {
    json!({
        "seed": c.seed,
        "lhs": c.lhs,
        "rhs": c.rhs,
        "analytic": c.analytic,
        "rel_gaps": {
            "lhs_rhs": c.gap_lhs_rhs,
            "lhs_analytic": c.gap_lhs_analytic,
            "rhs_analytic": c.gap_rhs_analytic,
        },
    })
}

pub fn verify_cov(s: Settings, from_path: Option<PathBuf>, n: Option<usize>, tau: Option<i64>) -> Result<(), CliError> {
    let s = s.with_spec_defaults();
    let n = n.or(s.file.n).unwrap_or(9);
    let tau = tau.or(s.file.tau).unwrap_or(20);
    let from_path = from_path.or_else(|| s.file.from_path.clone());
    let report = if let Some(p) = from_path {
        let path = load_path(&p)?;
        let grid = path
            .geometric()
            .ok_or_else(|| CliError::Input("verify-cov needs a path on a geometric grid".into()))?;
        let model = SbmModel::new(path_hurst(&s, &path)?, grid.lambda(), path_drift(&s, &path)?)?;
        let c = check_covariance(&path, &model, n, tau)?;
        let est = estimate_seasonal(&path, model.hurst)?.report();
        let mut v = check_json(&c);
        v["params"] = json!({
            "from_path": p, "H": model.hurst, "alpha": grid.alpha(), "T": grid.period(),
            "M": grid.intervals(), "drift": model.drift.to_string(), "n": n, "tau": tau,
        });
        v["estimate"] = serde_json::to_value(est).expect("report serializes");
        v
    } else {
        let d = VerifyConfig::default();
        let period = s.period.unwrap_or(d.period);
        let alpha = if s.alpha.is_some() || s.lambda.is_some() { s.scale(period)?.0 } else { d.alpha };
        let cfg = VerifyConfig {
            hurst: s.hurst.unwrap_or(d.hurst),
            alpha,
            period,
            intervals: s.intervals.unwrap_or(d.intervals),
            drift: s.drift()?,
            n,
            tau,
            seed: s.require_seed()?,
            reps: s.reps.unwrap_or(1),
        };
        let summary = verify_covariance(&cfg)?;
        let pick = |f: fn(&CovarianceCheck) -> f64| median(&mut summary.runs.iter().map(f).collect::<Vec<_>>());
        json!({
            "params": {
                "H": cfg.hurst, "alpha": cfg.alpha, "T": cfg.period, "M": cfg.intervals,
                "drift": cfg.drift.to_string(), "n": n, "tau": tau, "seed": cfg.seed, "reps": cfg.reps,
            },
            "lhs": pick(|c| c.lhs),
            "rhs": pick(|c| c.rhs),
            "analytic": summary.runs[0].analytic,
            "rel_gaps": {
                "lhs_rhs": summary.median_gap_lhs_rhs,
                "lhs_analytic": summary.median_gap_lhs_analytic,
                "rhs_analytic": summary.median_gap_rhs_analytic,
            },
            "runs": summary.runs.iter().map(check_json).collect::<Vec<_>>(),
        })
    };
    emit_json(s.out.as_deref(), report)
}

pub fn estimate_hurst(s: Settings, from_path: Option<PathBuf>, mle: bool) -> Result<(), CliError> {
    let s = s.with_spec_defaults();
    let mle = mle || s.file.mle.unwrap_or(false);
    let from_path = from_path.or_else(|| s.file.from_path.clone());
    let path = match &from_path {
        Some(p) => load_path(p)?,
        None => sbm_path(&s, GridChoice::Equispaced, s.require_seed()?)?,
    };
    let est = hurst_variation(&path)?;
    let mut v = serde_json::to_value(&est).expect("estimate serializes");
    if mle {
        let family = match path_drift(&s, &path)? {
            Drift::Random => MleFamily::SbmRandomDrift,
            _ => MleFamily::Sbm,
        };
        let fit = hurst_mle(&path, &MleConfig { family, ..Default::default() })?;
        v["mle"] = json!({
            "hurst": fit.hurst,
            "log_likelihood": fit.log_likelihood,
            "points": fit.points,
            "family": family,
            "profile": fit.profile,
        });
    }
    v["params"] = json!({
        "from_path": from_path,
        "model": path.meta.model,
        "seed": path.meta.seed,
        "lambda": path.grid().lambda(),
        "T": path.grid().period(),
        "M": path.grid().intervals(),
    });
    emit_json(s.out.as_deref(), v)
}

fn load_table(p: &Path) -> Result<SeasonalCovariance, CliError> {
    let text = fs::read_to_string(p).map_err(dsim::Error::from)?;
    Ok(serde_json::from_str(&text).map_err(dsim::Error::from)?)
}

pub fn spectral(
    s: Settings,
    from_path: Option<PathBuf>,
    table: Option<PathBuf>,
    omega_points: Option<usize>,
    q_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let s = s.with_spec_defaults();
    let points = omega_points.or(s.file.omega_points).unwrap_or(DEFAULT_OMEGA_POINTS);
    if points == 0 {
        return Err(CliError::Usage("--omega-points must be positive".into()));
    }
    let from_path = from_path.or_else(|| s.file.from_path.clone());
    let table = table.or_else(|| s.file.table.clone());
    let mut side = json!({});
    let cov = match (&from_path, &table) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --from-path or --table".into())),
        (Some(p), None) => {
            let path = load_path(p)?;
            let est = estimate_seasonal(&path, path_hurst(&s, &path)?)?;
            side["source"] = json!("estimated");
            side["from_path"] = json!(p);
            side["estimate"] = serde_json::to_value(est.report()).expect("report serializes");
            est.table
        }
        (None, Some(p)) => {
            side["source"] = json!("table");
            side["table"] = json!(p);
            load_table(p)?
        }
        (None, None) => match s.model_name().as_str() {
            "sbm" => {
                let period = need(s.period, "--T")?;
                side["source"] = json!("sbm");
                sbm_seasonal(need(s.hurst, "--H")?, s.scale(period)?.0, period)?
            }
            "dsiar" => {
                side["source"] = json!("dsiar");
                dsiar1_seasonal(&dsiar_model(&s)?)?
            }
            other => return Err(CliError::Usage(format!("unknown model '{other}' (expected sbm or dsiar)"))),
        },
    };
    cov.require_admissible()?;
    let density = SpectralDensity::new(&cov)?;
    let omegas = omega_grid(points);
    emit(s.out.as_deref(), |w| write_spectral_csv(w, &density, &omegas))?;
    if let Some(q) = &q_out {
        let t = cov.period() as i64;
        let mats = (-t..=t).map(|tau| q_matrix(&cov, 0, tau)).collect::<dsim::Result<Vec<_>>>()?;
        emit(Some(q), |w| write_q_csv(w, &mats))?;
    }
    if let Some(out) = &s.out {
        side["H"] = json!(cov.hurst());
        side["alpha"] = json!(cov.alpha());
        side["T"] = json!(cov.period());
        side["r0"] = json!(cov.r0());
        side["r1"] = json!(cov.r1());
        side["rho"] = json!(density.rho());
        side["omega_points"] = json!(points);
        emit_json(Some(&out.with_extension("json")), side)?;
    }
    Ok(())
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = p.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    p.with_file_name(format!("{stem}{suffix}{ext}"))
}

pub fn bench(s: Settings, hursts: Option<Vec<f64>>, no_mle: bool, plot_out: Option<PathBuf>) -> Result<(), CliError> {
    let d = BenchConfig::default();
    let out = need(s.out.clone(), "--out")?;
    let period = s.period.unwrap_or(d.samples_per_scale);
    let lambda = if s.alpha.is_some() || s.lambda.is_some() { s.scale(period)?.1 } else { d.lambda };
    let mle = !no_mle && s.file.mle.unwrap_or(true);
    let cfg = BenchConfig {
        hursts: hursts.or_else(|| s.file.hursts.clone()).unwrap_or(d.hursts),
        lambda,
        samples_per_scale: period,
        intervals: s.intervals.unwrap_or(d.intervals),
        reps: s.reps.unwrap_or(d.reps),
        seed: s.require_seed()?,
        mle: mle.then(MleConfig::default),
    };
    let result = mae_bench(&cfg)?;
    let plot = plot_out.unwrap_or_else(|| with_suffix(&out, "_samples"));
    emit(Some(&out), |w| result.write_mae_csv(w))?;
    emit(Some(&plot), |w| result.write_samples_csv(w))?;
    let mut side = serde_json::to_value(&cfg).expect("config serializes");
    side["plot_data"] = json!(plot);
    emit_json(Some(&out.with_extension("json")), side)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix() {
        assert_eq!(with_suffix(Path::new("a/mae.csv"), "_samples"), PathBuf::from("a/mae_samples.csv"));
        assert_eq!(with_suffix(Path::new("mae"), "_x"), PathBuf::from("mae_x"));
    }
}
