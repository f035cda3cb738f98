//! Seeded simulators for the generative models.
//!
//! All simulators are pure functions of their model, grid and [`Stream`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{interval_index, lamperti_forward, powr, Grid, ScaleGrid};
use crate::path::{PathMeta, SampledPath};
use crate::rng::Stream;

/// Burn-in, in periods, used when the caller does not pick one.
pub const DEFAULT_BURN_IN_PERIODS: usize = 50;

/// Deterministic or random drift added inside each scale interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    None,
    /// `lambda^(n/2) a` on interval `n`.
    Constant(f64),
    /// `lambda^(n/2) sin(lambda^(-n) t)` on interval `n`.
    #[serde(alias = "sin")]
    Sinusoidal,
    /// `lambda^(n/2) W_n` with `W_n` i.i.d. standard normal per interval.
    Random,
}

impl FromStr for Drift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Drift::None),
            "sin" | "sinusoidal" => Ok(Drift::Sinusoidal),
            "random" => Ok(Drift::Random),
            other => match other.strip_prefix("const:").or_else(|| other.strip_prefix("constant:")) {
                Some(a) => a
                    .parse()
                    .map(Drift::Constant)
                    .map_err(|e| domain(format!("bad drift constant {a:?}: {e}"))),
                None => Err(domain(format!(
                    "unknown drift {other:?} (expected none, sin, random or const:<a>)"
                ))),
            },
        }
    }
}

impl fmt::Display for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::None => f.write_str("none"),
            Drift::Constant(a) => write!(f, "const:{a}"),
            Drift::Sinusoidal => f.write_str("sin"),
            Drift::Random => f.write_str("random"),
        }
    }
}

/// Simple Brownian motion with drift,
/// `X(t) = lambda^(n(H - 1/2)) [B(t) + D_n(t)]` for `t` in `[lambda^(n-1), lambda^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmModel {
    #[serde(rename = "H")]
    pub hurst: f64,
    pub lambda: f64,
    pub drift: Drift,
}

impl SbmModel {
    pub fn new(hurst: f64, lambda: f64, drift: Drift) -> Result<Self> {
        if !(hurst > 0.0 && hurst.is_finite()) {
            return Err(domain(format!("H must be > 0, got {hurst}")));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(domain(format!("lambda must be > 1, got {lambda}")));
        }
        Ok(Self {
            hurst,
            lambda,
            drift,
        })
    }

    /// `H' = H - 1/2`.
    pub fn shifted_hurst(&self) -> f64 {
        self.hurst - 0.5
    }

    pub fn name(&self) -> String {
        format!("sbm[drift={}]", self.drift)
    }
}

/// Periodically correlated AR(p):
/// `Y(n) = sum_i phi_i(n) Y(n-i) + Z(n)`, `Z(n) ~ N(0, sigma_n^2)`, all `T`-periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcarModel {
    #[serde(rename = "T")]
    pub period: usize,
    /// `phi[i][n]` is the coefficient of lag `i + 1` at season `n`.
    pub phi: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
}

impl PcarModel {
    pub fn new(period: usize, phi: Vec<Vec<f64>>, sigma: Vec<f64>) -> Result<Self> {
        validate_seasonal("phi", period, &phi, &sigma)?;
        Ok(Self { period, phi, sigma })
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// Product of the lag-one coefficients over a period (p = 1 causality).
    pub fn period_gain(&self) -> f64 {
        self.phi[0].iter().product()
    }

    /// Rejects non-causal AR(1) models; higher orders only warn.
    pub fn check_causal(&self) -> Result<()> {
        if self.order() == 1 {
            let gain = self.period_gain();
            if !(gain.abs() < 1.0) {
                return Err(Error::Precondition(format!(
                    "PCAR(1) is not causal: |prod phi(j)| = {} >= 1",
                    gain.abs()
                )));
            }
        } else {
            log::warn!(
                "no stability criterion for PCAR({}); simulating without a causality check",
                self.order()
            );
        }
        Ok(())
    }
}

fn validate_seasonal(name: &str, period: usize, coeffs: &[Vec<f64>], sigma: &[f64]) -> Result<()> {
    if period == 0 {
        return Err(domain("period T must be positive"));
    }
    if coeffs.is_empty() {
        return Err(domain("autoregressive order must be at least 1"));
    }
    for (i, row) in coeffs.iter().enumerate() {
        if row.len() != period {
            return Err(domain(format!(
                "{name}[{i}] has {} entries, expected T = {period}",
                row.len()
            )));
        }
        if row.iter().any(|c| !c.is_finite()) {
            return Err(domain(format!("{name}[{i}] has a non-finite entry")));
        }
    }
    if sigma.len() != period {
        return Err(domain(format!(
            "sigma has {} entries, expected T = {period}",
            sigma.len()
        )));
    }
    if let Some(j) = sigma.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(domain(format!("sigma[{j}] must be positive and finite")));
    }
    Ok(())
}

/// Discrete scale invariant AR(p) on the lattice `alpha^n`:
/// `X(alpha^n) = sum_i theta_i(alpha^(n-i)) X(alpha^(n-i)) + Z~(alpha^n)`.
///
/// `theta[i][j]` is `theta_{i+1}(alpha^j)` for one period `j = 0..T`. `sigma[j]`
/// is the standard deviation of the noise of the periodic counterpart,
/// `Z(n) = alpha^(-nH) Z~(alpha^n)`, at season `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsiarModel {
    #[serde(rename = "H")]
    pub hurst: f64,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub period: usize,
    pub theta: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
}

impl DsiarModel {
    pub fn new(
        hurst: f64,
        alpha: f64,
        period: usize,
        theta: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    ) -> Result<Self> {
        if !(hurst > 0.0 && hurst.is_finite()) {
            return Err(domain(format!("H must be > 0, got {hurst}")));
        }
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(domain(format!("alpha must be > 1, got {alpha}")));
        }
        validate_seasonal("theta", period, &theta, &sigma)?;
        Ok(Self {
            hurst,
            alpha,
            period,
            theta,
            sigma,
        })
    }

    pub fn order(&self) -> usize {
        self.theta.len()
    }

    pub fn lambda(&self) -> f64 {
        self.alpha.powi(self.period as i32)
    }

    /// `theta_lag(alpha^j)` with `j` read periodically.
    pub fn theta_at(&self, lag: usize, j: i64) -> f64 {
        self.theta[lag - 1][j.rem_euclid(self.period as i64) as usize]
    }

    /// The periodic counterpart:
    /// `phi_i(n) = alpha^(-iH) theta_i(alpha^(n-i))`, same noise scales.
    pub fn to_pcar(&self) -> PcarModel {
        let phi = (1..=self.order())
            .map(|lag| {
                let damp = powr(self.alpha, -(lag as f64) * self.hurst);
                (0..self.period as i64)
                    .map(|n| damp * self.theta_at(lag, n - lag as i64))
                    .collect()
            })
            .collect();
        PcarModel {
            period: self.period,
            phi,
            sigma: self.sigma.clone(),
        }
    }

    pub fn default_burn_in(&self) -> usize {
        DEFAULT_BURN_IN_PERIODS * self.period
    }
}

/// Model specification as read from JSON: `{type, H, alpha, T, p, theta, sigma, drift}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelSpec {
    Sbm {
        #[serde(rename = "H")]
        hurst: f64,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(rename = "T", default)]
        period: Option<usize>,
        #[serde(default = "default_drift")]
        drift: Drift,
    },
    Dsiar {
        #[serde(rename = "H")]
        hurst: f64,
        alpha: f64,
        #[serde(rename = "T")]
        period: usize,
        #[serde(default)]
        p: Option<usize>,
        theta: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
    Pcar {
        #[serde(rename = "T")]
        period: usize,
        #[serde(default)]
        p: Option<usize>,
        phi: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
}

fn default_drift() -> Drift {
    Drift::None
}

impl ModelSpec {
    pub fn into_dsiar(self) -> Result<DsiarModel> {
        match self {
            ModelSpec::Dsiar {
                hurst,
                alpha,
                period,
                p,
                theta,
                sigma,
            } => {
                if let Some(p) = p {
                    if p != theta.len() {
                        return Err(domain(format!(
                            "p = {p} but theta has {} rows",
                            theta.len()
                        )));
                    }
                }
                DsiarModel::new(hurst, alpha, period, theta, sigma)
            }
            _ => Err(domain("model spec is not a DSIAR model")),
        }
    }
}

/// Brownian motion at increasing `times` (`times[0] >= 0`).
pub fn simulate_brownian(times: &[f64], stream: impl Into<Stream>) -> Result<Vec<f64>> {
    brownian_with(times, &mut stream.into().rng())
}

fn brownian_with<R: Rng + ?Sized>(times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0 && t0.is_finite()) {
            return Err(domain(format!("Brownian times must start at >= 0, got {t0}")));
        }
    }
    if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(domain(format!(
            "Brownian times must be strictly increasing (index {})",
            i + 1
        )));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    let mut b = 0.0;
    for &t in times {
        let z: f64 = rng.sample(StandardNormal);
        b += (t - prev_t).sqrt() * z;
        out.push(b);
        prev_t = t;
    }
    Ok(out)
}

/// Simulates an [`SbmModel`] on any grid whose times are all `>= 1`.
///
/// One Brownian path is shared by all scale intervals. Random drifts are
/// drawn after the Brownian increments, one per interval.
pub fn simulate_sbm(model: &SbmModel, grid: &Grid, stream: impl Into<Stream>) -> Result<SampledPath> {
    let stream = stream.into();
    let times = grid.times();
    if let Some(&t) = times.iter().find(|&&t| t < 1.0) {
        return Err(domain(format!("SBM is defined for t >= 1, grid has {t}")));
    }
    let mut rng = stream.rng();
    let b = brownian_with(&times, &mut rng)?;
    let intervals = times
        .iter()
        .map(|&t| interval_index(t, model.lambda))
        .collect::<Result<Vec<_>>>()?;
    let n_max = intervals.iter().copied().max().unwrap_or(0);
    let w: Vec<f64> = match model.drift {
        Drift::Random => (0..n_max).map(|_| rng.sample(StandardNormal)).collect(),
        _ => Vec::new(),
    };
    let hp = model.shifted_hurst();
    let lambda = model.lambda;
    let values = times
        .iter()
        .zip(&b)
        .zip(&intervals)
        .map(|((&t, &bt), &n)| {
            let nf = n as f64;
            let lift = powr(lambda, nf / 2.0);
            let drift = match model.drift {
                Drift::None => 0.0,
                Drift::Constant(a) => lift * a,
                Drift::Sinusoidal => lift * (t / powr(lambda, nf)).sin(),
                Drift::Random => lift * w[(n - 1) as usize],
            };
            powr(lambda, nf * hp) * (bt + drift)
        })
        .collect();
    SampledPath::new(
        *grid,
        values,
        PathMeta {
            model: model.name(),
            seed: Some(stream.seed),
            hurst: Some(model.hurst),
        },
    )
}

/// Runs a PCAR model from zero initial state for `burn_in` steps and returns
/// the next `n_steps` values. Output index 0 is season 0.
pub fn simulate_pcar(
    model: &PcarModel,
    n_steps: usize,
    stream: impl Into<Stream>,
    burn_in: usize,
) -> Result<Vec<f64>> {
    model.check_causal()?;
    let mut rng = stream.into().rng();
    let p = model.order();
    let period = model.period as i64;
    // history[0] is Y(n-1), history[p-1] is Y(n-p)
    let mut history = vec![0.0; p];
    let mut out = Vec::with_capacity(n_steps);
    for n in -(burn_in as i64)..n_steps as i64 {
        let season = n.rem_euclid(period) as usize;
        let z: f64 = rng.sample(StandardNormal);
        let mut y = model.sigma[season] * z;
        for (lag, coeffs) in model.phi.iter().enumerate() {
            y += coeffs[season] * history[lag];
        }
        history.rotate_right(1);
        history[0] = y;
        if n >= 0 {
            out.push(y);
        }
    }
    Ok(out)
}

/// Simulates a DSIAR model on a base-1 geometric grid through its periodic
/// counterpart, `X(alpha^n) = alpha^(nH) Y(n)`.
pub fn simulate_dsiar(
    model: &DsiarModel,
    grid: &ScaleGrid,
    stream: impl Into<Stream>,
    burn_in: usize,
) -> Result<SampledPath> {
    let stream = stream.into();
    if grid.base() != 1.0 {
        return Err(domain("DSIAR lives on the lattice alpha^n; grid base must be 1"));
    }
    if grid.period() != model.period || (grid.alpha() / model.alpha - 1.0).abs() > 1e-12 {
        return Err(domain(format!(
            "grid (alpha={}, T={}) does not match model (alpha={}, T={})",
            grid.alpha(),
            grid.period(),
            model.alpha,
            model.period
        )));
    }
    let y = simulate_pcar(&model.to_pcar(), grid.len(), stream, burn_in)?;
    let x = lamperti_forward(model.hurst, model.alpha, &y);
    SampledPath::new(
        *grid,
        x,
        PathMeta {
            model: format!("dsiar({})", model.order()),
            seed: Some(stream.seed),
            hurst: Some(model.hurst),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EquispacedScaleGrid;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn var(v: &[f64]) -> f64 {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    }

    fn cov(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
    }

    #[test]
    fn drift_parsing() {
        assert_eq!("none".parse::<Drift>().unwrap(), Drift::None);
        assert_eq!("sin".parse::<Drift>().unwrap(), Drift::Sinusoidal);
        assert_eq!("random".parse::<Drift>().unwrap(), Drift::Random);
        assert_eq!("const:2.5".parse::<Drift>().unwrap(), Drift::Constant(2.5));
        assert!("wobble".parse::<Drift>().is_err());
        for d in [Drift::None, Drift::Sinusoidal, Drift::Random, Drift::Constant(-1.25)] {
            assert_eq!(d.to_string().parse::<Drift>().unwrap(), d);
        }
    }

    #[test]
    fn brownian_at_zero() {
        assert_eq!(simulate_brownian(&[0.0], 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn brownian_rejects_bad_times() {
        assert!(simulate_brownian(&[1.0, 1.0], 1).is_err());
        assert!(simulate_brownian(&[2.0, 1.0], 1).is_err());
        assert!(simulate_brownian(&[-1.0, 1.0], 1).is_err());
    }

    #[test]
    fn brownian_moments() {
        let reps = 10_000;
        let (mut b1, mut b2, mut b3) = (vec![], vec![], vec![]);
        for r in 0..reps {
            let b = simulate_brownian(&[1.0, 2.0, 3.0], Stream::new(11, r)).unwrap();
            b1.push(b[0]);
            b2.push(b[1]);
            b3.push(b[2]);
        }
        let inc: Vec<f64> = b2.iter().zip(&b1).map(|(a, b)| a - b).collect();
        assert!((var(&inc) - 1.0).abs() < 0.05);
        assert!((cov(&b1, &b3) - 1.0).abs() < 0.06);
        // disjoint increments are uncorrelated
        let inc2: Vec<f64> = b3.iter().zip(&b2).map(|(a, b)| a - b).collect();
        let corr = cov(&inc, &inc2) / (var(&inc) * var(&inc2)).sqrt();
        assert!(corr.abs() < 3.0 / (reps as f64).sqrt());
    }

    #[test]
    fn sbm_half_is_brownian_on_first_interval() {
        let lambda = 1.05f64.powi(6);
        let grid: Grid = ScaleGrid::new(1.05, 6, 3).unwrap().into();
        let model = SbmModel::new(0.5, lambda, Drift::None).unwrap();
        let path = simulate_sbm(&model, &grid, 4).unwrap();
        let b = simulate_brownian(&grid.times(), 4).unwrap();
        assert_eq!(&path.values()[..6], &b[..6]);
        // with H = 1/2 every interval is plain Brownian motion
        for (x, y) in path.values().iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * y.abs());
        }
    }

    #[test]
    fn sbm_rejects_times_below_one() {
        let grid: Grid = ScaleGrid::with_base(1.1, 3, 2, 0.5).unwrap().into();
        let model = SbmModel::new(0.7, 1.1f64.powi(3), Drift::None).unwrap();
        assert!(simulate_sbm(&model, &grid, 0).is_err());
    }

    #[test]
    fn sbm_variance_at_one() {
        let lambda = 1.05f64.powi(6);
        let grid: Grid = ScaleGrid::new(1.05, 6, 1).unwrap().into();
        let model = SbmModel::new(0.8, lambda, Drift::None).unwrap();
        let x0: Vec<f64> = (0..2000)
            .map(|r| simulate_sbm(&model, &grid, Stream::new(5, r)).unwrap().values()[0])
            .collect();
        let expect = 1.05f64.powf(3.6);
        assert!((var(&x0) / expect - 1.0).abs() < 0.05, "{}", var(&x0));
    }

    #[test]
    fn sbm_sinusoidal_mean() {
        let grid: Grid = ScaleGrid::new(1.2, 1, 1).unwrap().into();
        let model = SbmModel::new(0.8, 1.2, Drift::Sinusoidal).unwrap();
        let x0: Vec<f64> = (0..10_000)
            .map(|r| simulate_sbm(&model, &grid, Stream::new(9, r)).unwrap().values()[0])
            .collect();
        // E X(1) = lambda^H sin(1/lambda)
        let expect = 1.2f64.powf(0.8) * (1.0f64 / 1.2).sin();
        assert!((expect - 0.856_44).abs() < 1e-4);
        assert!((mean(&x0) / expect - 1.0).abs() < 0.05, "{}", mean(&x0));
    }

    #[test]
    fn sbm_random_drift_varies_by_interval() {
        let grid: Grid = EquispacedScaleGrid::new(1.2, 10, 5).unwrap().into();
        let model = SbmModel::new(0.8, 1.2, Drift::Random).unwrap();
        let a = simulate_sbm(&model, &grid, 3).unwrap();
        let b = simulate_sbm(&model, &grid, 3).unwrap();
        assert_eq!(a, b);
        let c = simulate_sbm(&model, &grid, 4).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn pcar_white_noise() {
        let model = PcarModel::new(3, vec![vec![0.0; 3]], vec![1.0, 2.0, 0.5]).unwrap();
        let y = simulate_pcar(&model, 60_000, 21, 30).unwrap();
        for (season, sigma) in [1.0f64, 2.0, 0.5].iter().enumerate() {
            let s: Vec<f64> = y.iter().skip(season).step_by(3).copied().collect();
            assert!((var(&s) / sigma.powi(2) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn pcar_ar1_autocorrelation() {
        let model = PcarModel::new(1, vec![vec![0.5]], vec![1.0]).unwrap();
        let y = simulate_pcar(&model, 100_000, 2, 100).unwrap();
        let rho = cov(&y[1..], &y[..y.len() - 1]) / var(&y);
        assert!((rho - 0.5).abs() < 0.05, "{rho}");
        assert_eq!(y, simulate_pcar(&model, 100_000, 2, 100).unwrap());
    }

    #[test]
    fn pcar_rejects_noncausal() {
        let model = PcarModel::new(2, vec![vec![2.0, 0.6]], vec![1.0, 1.0]).unwrap();
        let err = simulate_pcar(&model, 10, 0, 0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn pcar_higher_order_runs() {
        let model = PcarModel::new(2, vec![vec![0.3, 0.2], vec![0.1, -0.1]], vec![1.0, 1.0]).unwrap();
        assert_eq!(simulate_pcar(&model, 50, 0, 10).unwrap().len(), 50);
    }

    #[test]
    fn model_validation() {
        assert!(PcarModel::new(2, vec![vec![0.1]], vec![1.0, 1.0]).is_err());
        assert!(PcarModel::new(2, vec![vec![0.1, 0.1]], vec![1.0, 0.0]).is_err());
        assert!(PcarModel::new(1, vec![], vec![1.0]).is_err());
        assert!(DsiarModel::new(0.0, 1.1, 1, vec![vec![0.1]], vec![1.0]).is_err());
        assert!(SbmModel::new(0.5, 1.0, Drift::None).is_err());
    }

    #[test]
    fn dsiar_mapping() {
        let m = DsiarModel::new(0.6, 1.3, 2, vec![vec![0.5, 0.8]], vec![1.0, 1.0]).unwrap();
        let pc = m.to_pcar();
        let damp = 1.3f64.powf(-0.6);
        // phi(n) uses theta at season n - 1
        assert!((pc.phi[0][0] - damp * 0.8).abs() < 1e-15);
        assert!((pc.phi[0][1] - damp * 0.5).abs() < 1e-15);
    }

    #[test]
    fn dsiar_is_lamperti_of_pcar() {
        let m = DsiarModel::new(
            0.7,
            1.1,
            3,
            vec![vec![0.4, -0.9, 1.2], vec![0.05, 0.1, 0.0]],
            vec![1.0, 0.5, 2.0],
        )
        .unwrap();
        let grid = ScaleGrid::new(1.1, 3, 20).unwrap();
        let x = simulate_dsiar(&m, &grid, Stream::new(8, 2), 30).unwrap();
        let y = simulate_pcar(&m.to_pcar(), grid.len(), Stream::new(8, 2), 30).unwrap();
        assert_eq!(x.values(), lamperti_forward(0.7, 1.1, &y).as_slice());
    }

    #[test]
    fn dsiar_pure_noise_scales() {
        let m = DsiarModel::new(0.6, 1.3, 2, vec![vec![0.0, 0.0]], vec![1.0, 1.0]).unwrap();
        let grid = ScaleGrid::new(1.3, 2, 3).unwrap();
        let x = simulate_dsiar(&m, &grid, 1, 0).unwrap();
        let y = simulate_pcar(&m.to_pcar(), grid.len(), 1, 0).unwrap();
        for (n, (xv, yv)) in x.values().iter().zip(&y).enumerate() {
            assert!((xv - 1.3f64.powf(0.6 * n as f64) * yv).abs() < 1e-12 * xv.abs().max(1.0));
        }
    }

    #[test]
    fn dsiar_variance_scaling() {
        let m = DsiarModel::new(0.6, 1.3, 2, vec![vec![0.5, 0.8]], vec![1.0, 1.0]).unwrap();
        let grid = ScaleGrid::new(1.3, 2, 2).unwrap();
        let reps = 1000;
        let mut at0 = vec![];
        let mut at2 = vec![];
        let mut at1 = vec![];
        let mut at3 = vec![];
        for r in 0..reps {
            let x = simulate_dsiar(&m, &grid, Stream::new(77, r), m.default_burn_in()).unwrap();
            at0.push(x.values()[0]);
            at1.push(x.values()[1]);
            at2.push(x.values()[2]);
            at3.push(x.values()[3]);
        }
        let target = 1.3f64.powf(2.4);
        assert!((var(&at2) / var(&at0) / target - 1.0).abs() < 0.1);
        assert!((var(&at3) / var(&at1) / target - 1.0).abs() < 0.1);
        // lag-one covariance scales the same way
        assert!((cov(&at3, &at2) / cov(&at1, &at0) / target - 1.0).abs() < 0.15);
    }

    #[test]
    fn dsiar_grid_mismatch() {
        let m = DsiarModel::new(0.6, 1.3, 2, vec![vec![0.5, 0.8]], vec![1.0, 1.0]).unwrap();
        assert!(simulate_dsiar(&m, &ScaleGrid::new(1.2, 2, 2).unwrap(), 0, 0).is_err());
        assert!(simulate_dsiar(&m, &ScaleGrid::with_base(1.3, 2, 2, 2.0).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn model_spec_json() {
        let spec: ModelSpec = serde_json::from_str(
            r#"{"type":"dsiar","H":0.6,"alpha":1.3,"T":2,"p":1,"theta":[[0.5,0.8]],"sigma":[1,1]}"#,
        )
        .unwrap();
        let m = spec.into_dsiar().unwrap();
        assert_eq!(m.order(), 1);
        let spec: ModelSpec =
            serde_json::from_str(r#"{"type":"sbm","H":0.8,"lambda":1.2,"drift":"random"}"#).unwrap();
        assert!(matches!(spec, ModelSpec::Sbm { drift: Drift::Random, .. }));
        let spec: ModelSpec =
            serde_json::from_str(r#"{"type":"sbm","H":0.8,"lambda":1.2,"drift":{"constant":2.0}}"#)
                .unwrap();
        assert!(matches!(spec, ModelSpec::Sbm { drift: Drift::Constant(_), .. }));
    }
}
