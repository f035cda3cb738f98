//! Exact covariance algebra of DSIM sequences.
//!
//! A zero-mean DSIM sequence `X(alpha^n)` with scale `lambda = alpha^T` has its
//! whole covariance fixed by the `2T` numbers `R_j(0)` and `R_j(1)`,
//! `j = 0..T`, held in a [`SeasonalCovariance`]. With
//! `h(alpha^j) = R_j(1) / R_j(0)` (periodic in `j`) and the running product
//! `h~(alpha^r) = prod_{j=0..=r} h(alpha^j)`, `h~(alpha^-1) = 1`,
//!
//! ```text
//! R_n(kT + v) = h~(alpha^(T-1))^k * h~(alpha^(v+n-1)) / h~(alpha^(n-1)) * R_n(0)
//! ```
//!
//! for `n, v = 0..T`, and `R_{n+T}(tau) = lambda^(2H) R_n(tau)` extends it to
//! every index.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{interval_index, powr};
use crate::process::{DsiarModel, Drift, SbmModel};

/// Relative slack allowed on the admissibility inequality, so that tables
/// built at equality survive rounding.
const ADMISSIBLE_SLACK: f64 = 1e-12;

/// The seasonal table `{R_j(0), R_j(1)}` together with `(H, alpha, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct SeasonalCovariance {
    hurst: f64,
    alpha: f64,
    r0: Vec<f64>,
    r1: Vec<f64>,
    /// `cum[i] = h~(alpha^i)` for `i = 0..T`.
    cum: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTable {
    #[serde(rename = "H")]
    hurst: f64,
    alpha: f64,
    #[serde(rename = "T")]
    period: usize,
    r0: Vec<f64>,
    r1: Vec<f64>,
}

impl TryFrom<RawTable> for SeasonalCovariance {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        if raw.r0.len() != raw.period {
            return Err(domain(format!(
                "T = {} but r0 has {} entries",
                raw.period,
                raw.r0.len()
            )));
        }
        SeasonalCovariance::new(raw.hurst, raw.alpha, raw.r0, raw.r1)
    }
}

impl From<SeasonalCovariance> for RawTable {
    fn from(c: SeasonalCovariance) -> Self {
        RawTable {
            hurst: c.hurst,
            alpha: c.alpha,
            period: c.period(),
            r0: c.r0,
            r1: c.r1,
        }
    }
}

/// Per-index admissibility margins `R_j(0) R_{j+1}(0) - R_j(1)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub margins: Vec<f64>,
    /// Indices `j` whose inequality fails.
    pub violations: Vec<usize>,
}

/// Borisov factors at one lattice point: `R(m, n) = G(min) K(max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorisovFactor {
    pub g: f64,
    pub k: f64,
}

impl BorisovFactor {
    pub fn ratio(&self) -> f64 {
        self.g / self.k
    }
}

impl SeasonalCovariance {
    pub fn new(hurst: f64, alpha: f64, r0: Vec<f64>, r1: Vec<f64>) -> Result<Self> {
        if !(hurst > 0.0 && hurst.is_finite()) {
            return Err(domain(format!("H must be > 0, got {hurst}")));
        }
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(domain(format!("alpha must be > 1, got {alpha}")));
        }
        if r0.is_empty() || r0.len() != r1.len() {
            return Err(domain(format!(
                "r0 and r1 must have the same positive length (got {} and {})",
                r0.len(),
                r1.len()
            )));
        }
        if let Some(j) = r0.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Degenerate(format!(
                "R_{j}(0) = {} is not a positive variance",
                r0[j]
            )));
        }
        if let Some(j) = r1.iter().position(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::Degenerate(format!(
                "R_{j}(1) = {} must be finite and nonzero",
                r1[j]
            )));
        }
        let cum = r0
            .iter()
            .zip(&r1)
            .scan(1.0, |acc, (a, b)| {
                *acc *= b / a;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            hurst,
            alpha,
            r0,
            r1,
            cum,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn period(&self) -> usize {
        self.r0.len()
    }

    pub fn lambda(&self) -> f64 {
        self.alpha.powi(self.period() as i32)
    }

    pub fn r0(&self) -> &[f64] {
        &self.r0
    }

    pub fn r1(&self) -> &[f64] {
        &self.r1
    }

    /// `lambda^(2H)`, the per-period variance growth.
    pub fn period_growth(&self) -> f64 {
        powr(self.alpha, 2.0 * self.hurst * self.period() as f64)
    }

    /// `h(alpha^j) = R_j(1) / R_j(0)`, periodic in `j`.
    pub fn h_ratio(&self, j: usize) -> f64 {
        let j = j % self.period();
        self.r1[j] / self.r0[j]
    }

    /// `h~(alpha^r)` for `r >= -1`.
    pub fn h_tilde(&self, r: i64) -> f64 {
        assert!(r >= -1, "h_tilde is defined for r >= -1, got {r}");
        if r == -1 {
            return 1.0;
        }
        let t = self.period() as i64;
        let (k, i) = (r / t, (r % t) as usize);
        self.cum[self.period() - 1].powi(k as i32) * self.cum[i]
    }

    /// `R_n(tau) = E[X(alpha^(n+tau)) X(alpha^n)]` for `n >= 0`, `n + tau >= 0`.
    pub fn covariance(&self, n: i64, tau: i64) -> Result<f64> {
        if n < 0 || n + tau < 0 {
            return Err(domain(format!(
                "covariance needs n >= 0 and n + tau >= 0 (n = {n}, tau = {tau})"
            )));
        }
        if tau < 0 {
            return self.covariance(n + tau, -tau);
        }
        let t = self.period() as i64;
        let (periods, i) = (n / t, n % t);
        let (k, v) = (tau / t, tau % t);
        let base = self.h_tilde(t - 1).powi(k as i32) * self.h_tilde(v + i - 1)
            / self.h_tilde(i - 1)
            * self.r0[i as usize];
        Ok(powr(self.alpha, 2.0 * self.hurst * (periods * t) as f64) * base)
    }

    /// [`covariance`](Self::covariance) continued to the whole lattice `n in Z`
    /// by scale invariance.
    pub fn covariance_extended(&self, n: i64, tau: i64) -> f64 {
        let t = self.period() as i64;
        let low = n.min(n + tau);
        let shift = if low < 0 { (-low + t - 1) / t } else { 0 };
        let value = self
            .covariance(n + shift * t, tau)
            .expect("shifted indices are nonnegative");
        value / powr(self.alpha, 2.0 * self.hurst * (shift * t) as f64)
    }

    /// Tests `R_j(1)^2 <= R_j(0) R_{j+1}(0)` for `j = 0..T`, with
    /// `R_T(0) = alpha^(2TH) R_0(0)`.
    pub fn admissibility(&self) -> Admissibility {
        let t = self.period();
        let margins: Vec<f64> = (0..t)
            .map(|j| {
                let next = if j + 1 < t {
                    self.r0[j + 1]
                } else {
                    self.period_growth() * self.r0[0]
                };
                self.r0[j] * next - self.r1[j] * self.r1[j]
            })
            .collect();
        let violations: Vec<usize> = margins
            .iter()
            .enumerate()
            .filter(|(j, m)| {
                let next = if j + 1 < t {
                    self.r0[j + 1]
                } else {
                    self.period_growth() * self.r0[0]
                };
                **m < -ADMISSIBLE_SLACK * self.r0[*j] * next
            })
            .map(|(j, _)| j)
            .collect();
        Admissibility {
            admissible: violations.is_empty(),
            margins,
            violations,
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility().admissible
    }

    /// Errors unless the table is admissible, naming the first violated `j`.
    pub fn require_admissible(&self) -> Result<()> {
        let report = self.admissibility();
        match report.violations.first() {
            None => Ok(()),
            Some(&j) => Err(Error::Precondition(format!(
                "seasonal table is not admissible: R_{j}(1)^2 exceeds R_{j}(0) R_{}(0) by {}",
                j + 1,
                -report.margins[j]
            ))),
        }
    }

    /// `K(alpha^r) = h~(alpha^(r-1))` (normalized by `K(1) = 1`) and
    /// `G(alpha^r) = R_r(0) / K(alpha^r)` for `r = 0..=n_max`.
    pub fn borisov_factors(&self, n_max: usize) -> Vec<BorisovFactor> {
        (0..=n_max as i64)
            .map(|r| {
                let k = self.h_tilde(r - 1);
                let var = self.covariance(r, 0).expect("r >= 0");
                BorisovFactor { g: var / k, k }
            })
            .collect()
    }
}

/// Largest relative defect of Doob's product rule
/// `R(n1, n) R(n, n2) = R(n, n) R(n1, n2)` over `n1 <= n <= n2` in `indices`.
///
/// Each defect is divided by the larger of its two products.
pub fn markov_product_check<F>(cov: F, indices: &[i64]) -> f64
where
    F: Fn(i64, i64) -> f64,
{
    let mut idx = indices.to_vec();
    idx.sort_unstable();
    idx.dedup();
    let mut worst: f64 = 0.0;
    for (a, &n1) in idx.iter().enumerate() {
        for (b, &n) in idx.iter().enumerate().skip(a) {
            for &n2 in &idx[b..] {
                let left = cov(n1, n) * cov(n, n2);
                let right = cov(n, n) * cov(n1, n2);
                let scale = left.abs().max(right.abs());
                if scale > 0.0 {
                    worst = worst.max((left - right).abs() / scale);
                }
            }
        }
    }
    worst
}

/// Closed-form covariance of simple Brownian motion with drift,
/// `lambda^((n+m)H') min(t, s)` for `t` in `A_n`, `s` in `A_m`.
///
/// Deterministic drifts do not contribute. The random drift adds
/// `lambda^(2nH') lambda^n` when both times share the interval `n`.
pub fn sbm_cov(model: &SbmModel, t: f64, s: f64) -> Result<f64> {
    if t < 1.0 || s < 1.0 {
        return Err(domain(format!("sbm_cov needs t, s >= 1 (t = {t}, s = {s})")));
    }
    let n = interval_index(t, model.lambda)? as f64;
    let m = interval_index(s, model.lambda)? as f64;
    let hp = model.shifted_hurst();
    let mut value = powr(model.lambda, (n + m) * hp) * t.min(s);
    if model.drift == Drift::Random && n == m {
        value += powr(model.lambda, 2.0 * n * hp + n);
    }
    Ok(value)
}

/// Seasonal table of driftless simple Brownian motion sampled at `alpha^n`:
/// `R_n(0) = alpha^(2TH' + n)`, `h = 1` inside an interval and
/// `alpha^(TH')` across its right end.
pub fn sbm_seasonal(hurst: f64, alpha: f64, period: usize) -> Result<SeasonalCovariance> {
    if period == 0 {
        return Err(domain("T must be positive"));
    }
    let t = period as f64;
    let hp = hurst - 0.5;
    let r0: Vec<f64> = (0..period)
        .map(|n| powr(alpha, 2.0 * t * hp + n as f64))
        .collect();
    let mut r1 = r0.clone();
    r1[period - 1] *= powr(alpha, t * hp);
    SeasonalCovariance::new(hurst, alpha, r0, r1)
}

/// DSIAR(1) covariance by direct recursion,
/// `R_n(kT + v) = [prod_j theta(alpha^j)]^k * prod_{j=n}^{n+v-1} theta(alpha^j) * R_n(0)`.
///
/// `theta` holds one period; `rn0` is `R_n(0)`.
pub fn dsiar1_covariance(theta: &[f64], rn0: f64, n: usize, k: usize, v: usize) -> Result<f64> {
    let t = theta.len();
    if t == 0 {
        return Err(domain("theta must hold one period"));
    }
    if n >= t || v >= t {
        return Err(domain(format!("need n, v < T = {t} (n = {n}, v = {v})")));
    }
    if let Some(j) = theta.iter().position(|&c| c == 0.0) {
        return Err(Error::Degenerate(format!("theta(alpha^{j}) = 0")));
    }
    let period_gain: f64 = theta.iter().product();
    let partial: f64 = (n..n + v).map(|j| theta[j % t]).product();
    Ok(period_gain.powi(k as i32) * partial * rn0)
}

/// Seasonal table of a causal DSIAR(1) model.
///
/// `R_j(0) = alpha^(2jH) Var Y(j)` with `Var Y` the periodic stationary
/// solution of `Var Y(n) = alpha^(-2H) theta(alpha^(n-1))^2 Var Y(n-1) + sigma_n^2`,
/// and `R_j(1) = theta(alpha^j) R_j(0)`.
pub fn dsiar1_seasonal(model: &DsiarModel) -> Result<SeasonalCovariance> {
    if model.order() != 1 {
        return Err(domain(format!(
            "closed-form table exists only for DSIAR(1), got p = {}",
            model.order()
        )));
    }
    let pc = model.to_pcar();
    pc.check_causal()?;
    let gains: Vec<f64> = pc.phi[0].iter().map(|a| a * a).collect();
    let noise: Vec<f64> = pc.sigma.iter().map(|s| s * s).collect();
    // one period of the affine map from Var Y(-1)
    let (mut slope, mut offset) = (1.0, 0.0);
    for (g, s) in gains.iter().zip(&noise) {
        slope *= g;
        offset = g * offset + s;
    }
    let mut prev = offset / (1.0 - slope);
    let mut r0 = Vec::with_capacity(model.period);
    for (j, (g, s)) in gains.iter().zip(&noise).enumerate() {
        prev = g * prev + s;
        r0.push(powr(model.alpha, 2.0 * j as f64 * model.hurst) * prev);
    }
    let r1: Vec<f64> = r0
        .iter()
        .enumerate()
        .map(|(j, v)| model.theta_at(1, j as i64) * v)
        .collect();
    if r1.contains(&0.0) {
        return Err(Error::Degenerate(
            "theta vanishes somewhere; the lag-one covariances are zero and the table degenerates"
                .into(),
        ));
    }
    SeasonalCovariance::new(model.hurst, model.alpha, r0, r1)
}
