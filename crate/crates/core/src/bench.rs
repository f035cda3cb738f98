//! Monte Carlo harness: the covariance verification experiment on simple
//! Brownian motion and the MAE benchmark of the Hurst estimators.
//!
//! Replicate `r` of sweep point `h` draws from `Stream::new(seed, (h << 32) | r)`,
//! so results do not depend on thread scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::sbm_cov;
use crate::error::{domain, Result};
use crate::estimate::{estimate_r_n_tau, estimate_seasonal, hurst_variation};
use crate::grid::{EquispacedScaleGrid, Grid, ScaleGrid};
use crate::mle::{hurst_mle, MleConfig};
use crate::path::{fmt_f64, SampledPath};
use crate::process::{simulate_sbm, Drift, SbmModel};
use crate::rng::Stream;

pub fn replicate_stream(seed: u64, point: usize, rep: usize) -> Stream {
    Stream::new(seed, ((point as u64) << 32) | rep as u64)
}

/// Three views of `R_n(tau)`: the direct moment estimate, the covariance
/// rebuilt from the estimated seasonal table, and the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub seed: Option<u64>,
    pub lhs: f64,
    pub rhs: f64,
    pub analytic: f64,
    pub gap_lhs_rhs: f64,
    pub gap_lhs_analytic: f64,
    pub gap_rhs_analytic: f64,
}

impl CovarianceCheck {
    fn new(seed: Option<u64>, lhs: f64, rhs: f64, analytic: f64) -> Self {
        let gap = |a: f64, b: f64| (a - b).abs() / analytic.abs();
        Self {
            seed,
            lhs,
            rhs,
            analytic,
            gap_lhs_rhs: gap(lhs, rhs),
            gap_lhs_analytic: gap(lhs, analytic),
            gap_rhs_analytic: gap(rhs, analytic),
        }
    }
}

/// Compares the lag estimator with the table-based covariance on a geometric
/// path, against `sbm_cov` of `model`.
pub fn check_covariance(
    path: &SampledPath,
    model: &SbmModel,
    n: usize,
    tau: i64,
) -> Result<CovarianceCheck> {
    let grid = path
        .geometric()
        .ok_or_else(|| domain("covariance verification needs a geometric grid"))?;
    let later = n as i64 + tau;
    if later < 0 {
        return Err(domain(format!("n + tau = {later} is negative")));
    }
    let lhs = estimate_r_n_tau(path, model.hurst, n, tau)?;
    let est = estimate_seasonal(path, model.hurst)?;
    if !est.admissibility.admissible {
        log::warn!(
            "estimated seasonal table violates admissibility at {:?}",
            est.admissibility.violations
        );
    }
    let rhs = est.table.covariance(n as i64, tau)?;
    let time = |k: i64| grid.base() * grid.alpha().powi(k as i32);
    let analytic = sbm_cov(model, time(later), time(n as i64))?;
    Ok(CovarianceCheck::new(path.meta.seed, lhs, rhs, analytic))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    #[serde(rename = "H")]
    pub hurst: f64,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub period: usize,
    #[serde(rename = "M")]
    pub intervals: usize,
    pub drift: Drift,
    pub n: usize,
    pub tau: i64,
    pub seed: u64,
    pub reps: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            hurst: 0.8,
            alpha: 1.05,
            period: 6,
            intervals: 500,
            drift: Drift::None,
            n: 9,
            tau: 20,
            seed: 0,
            reps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub runs: Vec<CovarianceCheck>,
    pub median_gap_lhs_rhs: f64,
    pub median_gap_lhs_analytic: f64,
    pub median_gap_rhs_analytic: f64,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the verification on `reps` independent SBM paths.
pub fn verify_covariance(config: &VerifyConfig) -> Result<VerifySummary> {
    if config.reps == 0 {
        return Err(domain("need at least one replicate"));
    }
    let grid: Grid = ScaleGrid::new(config.alpha, config.period, config.intervals)?.into();
    let lambda = config.alpha.powi(config.period as i32);
    let model = SbmModel::new(config.hurst, lambda, config.drift)?;
    let runs = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let path = simulate_sbm(&model, &grid, Stream::new(config.seed, rep as u64))?;
            check_covariance(&path, &model, config.n, config.tau)
        })
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&CovarianceCheck) -> f64| median(&mut runs.iter().map(f).collect::<Vec<_>>());
    Ok(VerifySummary {
        median_gap_lhs_rhs: pick(|c| c.gap_lhs_rhs),
        median_gap_lhs_analytic: pick(|c| c.gap_lhs_analytic),
        median_gap_rhs_analytic: pick(|c| c.gap_rhs_analytic),
        runs,
    })
}

/// Sweep over true Hurst indices for the MAE benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub hursts: Vec<f64>,
    pub lambda: f64,
    #[serde(rename = "T")]
    pub samples_per_scale: usize,
    #[serde(rename = "M")]
    pub intervals: usize,
    pub reps: usize,
    pub seed: u64,
    /// `None` skips the likelihood estimator.
    pub mle: Option<MleConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            hursts: (1..=9).map(|i| i as f64 / 10.0).collect(),
            lambda: 1.2,
            samples_per_scale: 200,
            intervals: 30,
            reps: 30,
            seed: 0,
            mle: Some(MleConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "H1")]
    H1,
    #[serde(rename = "H2")]
    H2,
    #[serde(rename = "MLE")]
    Mle,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::H1 => "H1",
            Estimator::H2 => "H2",
            Estimator::Mle => "MLE",
        }
    }
}

/// One replicate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub h_true: f64,
    pub estimator: Estimator,
    pub rep: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaeRow {
    pub h_true: f64,
    pub estimator: Estimator,
    pub mae: f64,
    pub n_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: Vec<MaeRow>,
    pub samples: Vec<BenchSample>,
}

impl BenchResult {
    pub fn mae(&self, h_true: f64, estimator: Estimator) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.h_true == h_true && r.estimator == estimator)
            .map(|r| r.mae)
    }

    /// `H_true,estimator,mae,n_reps`.
    pub fn write_mae_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["H_true", "estimator", "mae", "n_reps"])?;
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.h_true),
                r.estimator.label().to_string(),
                fmt_f64(r.mae),
                r.n_reps.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long format `H_true,estimator,rep,estimate,abs_error`.
    pub fn write_samples_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["H_true", "estimator", "rep", "estimate", "abs_error"])?;
        for s in &self.samples {
            w.write_record([
                fmt_f64(s.h_true),
                s.estimator.label().to_string(),
                s.rep.to_string(),
                fmt_f64(s.estimate),
                fmt_f64((s.estimate - s.h_true).abs()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the benchmark on SBM with random drift sampled on an equispaced grid.
pub fn mae_bench(config: &BenchConfig) -> Result<BenchResult> {
    if config.reps == 0 || config.hursts.is_empty() {
        return Err(domain("benchmark needs at least one H and one replicate"));
    }
    if let Some(mle) = &config.mle {
        mle.validate()?;
    }
    let grid: Grid =
        EquispacedScaleGrid::new(config.lambda, config.samples_per_scale, config.intervals)?.into();
    let models = config
        .hursts
        .iter()
        .map(|&h| SbmModel::new(h, config.lambda, Drift::Random))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|p| (0..config.reps).map(move |r| (p, r)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(p, rep)| {
            let model = &models[p];
            let path = simulate_sbm(model, &grid, replicate_stream(config.seed, p, rep))?;
            let var = hurst_variation(&path)?;
            let mut out = vec![
                BenchSample { h_true: model.hurst, estimator: Estimator::H1, rep, estimate: var.h1 },
                BenchSample { h_true: model.hurst, estimator: Estimator::H2, rep, estimate: var.h2 },
            ];
            if let Some(mle) = &config.mle {
                let fit = hurst_mle(&path, mle)?;
                out.push(BenchSample { h_true: model.hurst, estimator: Estimator::Mle, rep, estimate: fit.hurst });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples: Vec<BenchSample> = per_job.into_iter().flatten().collect();
    samples.sort_by(|a, b| {
        a.h_true
            .total_cmp(&b.h_true)
            .then(a.estimator.cmp(&b.estimator))
            .then(a.rep.cmp(&b.rep))
    });
    let mut rows: Vec<MaeRow> = Vec::new();
    for s in &samples {
        let err = (s.estimate - s.h_true).abs();
        match rows.last_mut() {
            Some(r) if r.h_true == s.h_true && r.estimator == s.estimator => {
                r.mae += err;
                r.n_reps += 1;
            }
            _ => rows.push(MaeRow { h_true: s.h_true, estimator: s.estimator, mae: err, n_reps: 1 }),
        }
    }
    for r in &mut rows {
        r.mae /= r.n_reps as f64;
    }
    Ok(BenchResult { rows, samples })
}
