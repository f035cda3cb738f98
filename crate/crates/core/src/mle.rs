//! Gaussian maximum-likelihood Hurst estimation for simple Brownian motion.
//!
//! The likelihood is evaluated on a geometric subsample of the path so that
//! the dense covariance stays small; the Hurst index is found by
//! golden-section search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{interval_index, powr};
use crate::path::SampledPath;

/// Covariance family assumed by the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MleFamily {
    Sbm,
    #[default]
    SbmRandomDrift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleConfig {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub family: MleFamily,
    pub max_points: usize,
    pub points_per_scale: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            lower: 0.05,
            upper: 1.2,
            tolerance: 1e-4,
            family: MleFamily::SbmRandomDrift,
            max_points: 300,
            points_per_scale: 6,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower > 0.0 && self.lower <= self.upper && self.upper.is_finite()) {
            return Err(domain(format!(
                "MLE search interval [{}, {}] must be nonempty inside (0, inf)",
                self.lower, self.upper
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain("MLE tolerance must be positive"));
        }
        if self.max_points < 10 {
            return Err(domain(format!(
                "MLE subsample cap must be >= 10, got {}",
                self.max_points
            )));
        }
        if self.points_per_scale == 0 {
            return Err(domain("points per scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub hurst: f64,
    pub log_likelihood: f64,
    /// Every evaluated `(H, log-likelihood)` pair, sorted by `H`.
    pub profile: Vec<(f64, f64)>,
    pub points: usize,
}

/// Indices of the grid points nearest `lambda^(i + k/g)` for every scale
/// interval `i`, thinned evenly to at most `cap` points.
pub fn geometric_subsample(times: &[f64], lambda: f64, intervals: usize, g: usize, cap: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..intervals)
        .flat_map(|i| (0..g).map(move |k| i as f64 + k as f64 / g as f64))
        .map(|e| nearest(times, powr(lambda, e)))
        .collect();
    idx.dedup();
    if idx.len() > cap {
        let n = idx.len();
        idx = (0..cap)
            .map(|q| idx[((q * (n - 1)) as f64 / (cap - 1) as f64).round() as usize])
            .collect();
        idx.dedup();
    }
    idx
}

fn nearest(sorted: &[f64], x: f64) -> usize {
    let p = sorted.partition_point(|&t| t < x);
    if p == 0 {
        0
    } else if p == sorted.len() || x - sorted[p - 1] <= sorted[p] - x {
        p - 1
    } else {
        p
    }
}

/// Zero-mean Gaussian log-likelihood of a subsample as a function of `H`.
pub struct Likelihood {
    n: Vec<f64>,
    min_ts: DMatrix<f64>,
    x: DVector<f64>,
    log_lambda: f64,
    random_drift: bool,
}

impl Likelihood {
    pub fn new(times: &[f64], values: &[f64], lambda: f64, family: MleFamily) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(domain("times and values must be nonempty and equally long"));
        }
        let n = times
            .iter()
            .map(|&t| {
                if t < 1.0 {
                    return Err(domain(format!("likelihood needs t >= 1, got {t}")));
                }
                interval_index(t, lambda).map(|v| v as f64)
            })
            .collect::<Result<Vec<_>>>()?;
        let len = times.len();
        Ok(Self {
            n,
            min_ts: DMatrix::from_fn(len, len, |a, b| times[a].min(times[b])),
            x: DVector::from_column_slice(values),
            log_lambda: lambda.ln(),
            random_drift: family == MleFamily::SbmRandomDrift,
        })
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn covariance(&self, hurst: f64) -> DMatrix<f64> {
        let hp = hurst - 0.5;
        let g: Vec<f64> = self.n.iter().map(|n| (n * hp * self.log_lambda).exp()).collect();
        let mut s = DMatrix::from_fn(self.len(), self.len(), |a, b| {
            g[a] * g[b] * self.min_ts[(a, b)]
        });
        if self.random_drift {
            for a in 0..self.len() {
                for b in 0..self.len() {
                    if self.n[a] == self.n[b] {
                        s[(a, b)] += g[a] * g[a] * (self.n[a] * self.log_lambda).exp();
                    }
                }
            }
        }
        s
    }

    pub fn eval(&self, hurst: f64) -> Result<f64> {
        let sigma = self.covariance(hurst);
        let scale = sigma.diagonal().mean();
        let mut jitter = 0.0;
        for attempt in 0..8 {
            let mut m = sigma.clone();
            if jitter > 0.0 {
                for i in 0..self.len() {
                    m[(i, i)] += jitter;
                }
            }
            if let Some(chol) = m.cholesky() {
                if attempt > 0 {
                    log::debug!("covariance at H = {hurst} needed jitter {jitter:e}");
                }
                let l = chol.l_dirty();
                let log_det: f64 = 2.0 * (0..self.len()).map(|i| l[(i, i)].ln()).sum::<f64>();
                let z = chol.solve(&self.x);
                let quad = self.x.dot(&z);
                let n = self.len() as f64;
                return Ok(-0.5 * (log_det + quad + n * (2.0 * std::f64::consts::PI).ln()));
            }
            jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 100.0 };
        }
        Err(Error::Numerical(format!(
            "covariance at H = {hurst} is not positive definite after jitter"
        )))
    }
}

/// Maximizes `f` on `[a, b]` by golden-section search; returns every evaluation.
fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Vec<(f64, f64)>> {
    let mut evals = Vec::new();
    let mut call = |x: f64, evals: &mut Vec<(f64, f64)>| -> Result<f64> {
        let y = f(x)?;
        evals.push((x, y));
        Ok(y)
    };
    if b - a <= tol {
        let mid = 0.5 * (a + b);
        call(mid, &mut evals)?;
        return Ok(evals);
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = call(x1, &mut evals)?;
    let mut f2 = call(x2, &mut evals)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = call(x1, &mut evals)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = call(x2, &mut evals)?;
        }
    }
    call(0.5 * (lo + hi), &mut evals)?;
    call(a, &mut evals)?;
    call(b, &mut evals)?;
    Ok(evals)
}

/// Maximum-likelihood Hurst index of an SBM path.
pub fn hurst_mle(path: &SampledPath, config: &MleConfig) -> Result<MleFit> {
    config.validate()?;
    let times = path.times();
    let lambda = path.grid().lambda();
    let idx = geometric_subsample(
        &times,
        lambda,
        path.grid().intervals(),
        config.points_per_scale,
        config.max_points,
    );
    let t: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let x: Vec<f64> = idx.iter().map(|&i| path.values()[i]).collect();
    let lik = Likelihood::new(&t, &x, lambda, config.family)?;
    let mut profile = golden_max(|h| lik.eval(h), config.lower, config.upper, config.tolerance)?;
    let &(hurst, log_likelihood) = profile
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one evaluation");
    profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    profile.dedup_by(|a, b| a.0 == b.0);
    let (lo, hi) = profile
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
    if profile.len() > 1 && hi - lo < 1e-9 * hi.abs().max(1.0) {
        log::warn!("log-likelihood profile is flat over [{}, {}]", config.lower, config.upper);
    }
    Ok(MleFit {
        hurst,
        log_likelihood,
        profile,
        points: lik.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::sbm_cov;
    use crate::grid::{EquispacedScaleGrid, Grid, ScaleGrid};
    use crate::process::{simulate_sbm, Drift, SbmModel};

    #[test]
    fn config_validation() {
        assert!(MleConfig::default().validate().is_ok());
        let bad = MleConfig { lower: 0.5, upper: 0.4, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = MleConfig { max_points: 9, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = MleConfig { lower: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let ev = golden_max(|x| Ok(-(x - 0.37f64).powi(2)), 0.0, 1.0, 1e-6).unwrap();
        let best = ev.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((best.0 - 0.37).abs() < 1e-6);
        // boundary maxima are reachable
        let ev = golden_max(Ok, 0.2, 0.9, 1e-4).unwrap();
        let best = ev.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, 0.9);
    }

    #[test]
    fn covariance_matches_closed_form() {
        let times = [1.0, 1.1, 1.3, 1.5, 2.0];
        for (family, drift) in [(MleFamily::Sbm, Drift::None), (MleFamily::SbmRandomDrift, Drift::Random)] {
            let lik = Likelihood::new(&times, &[0.0; 5], 1.2, family).unwrap();
            let s = lik.covariance(0.7);
            let m = SbmModel::new(0.7, 1.2, drift).unwrap();
            for a in 0..5 {
                for b in 0..5 {
                    let e = sbm_cov(&m, times[a], times[b]).unwrap();
                    assert!((s[(a, b)] - e).abs() < 1e-12 * e.abs());
                }
            }
        }
    }

    #[test]
    fn likelihood_of_standard_normal() {
        let lik = Likelihood::new(&[1.0], &[0.3], 2.0, MleFamily::Sbm).unwrap();
        let expect = -0.5 * (0.09 + (2.0 * std::f64::consts::PI).ln());
        assert!((lik.eval(0.5).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn subsample_is_sorted_and_capped() {
        let g = EquispacedScaleGrid::new(1.2, 200, 30).unwrap();
        let times = g.times();
        let idx = geometric_subsample(&times, 1.2, 30, 6, 300);
        assert_eq!(idx.len(), 180);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let capped = geometric_subsample(&times, 1.2, 30, 6, 50);
        assert!(capped.len() <= 50 && capped.len() > 40);
        let s = ScaleGrid::new(1.05, 6, 10).unwrap().times();
        assert_eq!(geometric_subsample(&s, 1.05f64.powi(6), 10, 6, 300), (0..60).collect::<Vec<_>>());
    }

    #[test]
    fn singleton_interval() {
        let grid: Grid = EquispacedScaleGrid::new(1.2, 20, 5).unwrap().into();
        let m = SbmModel::new(0.5, 1.2, Drift::Random).unwrap();
        let p = simulate_sbm(&m, &grid, 3).unwrap();
        let cfg = MleConfig { lower: 0.42, upper: 0.42, ..Default::default() };
        assert_eq!(hurst_mle(&p, &cfg).unwrap().hurst, 0.42);
    }

    #[test]
    fn recovers_half() {
        let grid: Grid = EquispacedScaleGrid::new(1.2, 200, 30).unwrap().into();
        let m = SbmModel::new(0.5, 1.2, Drift::Random).unwrap();
        let p = simulate_sbm(&m, &grid, 11).unwrap();
        let fit = hurst_mle(&p, &MleConfig::default()).unwrap();
        assert!((fit.hurst - 0.5).abs() < 0.1, "{}", fit.hurst);
        assert!(fit.profile.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(fit.points, 180);
    }
}
