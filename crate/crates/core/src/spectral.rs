//! The `T`-dimensional self-similar embedding of a DSIM sequence, its
//! covariance matrices, the spectral density matrix and the discrete Fourier
//! coefficients of the seasonal covariance.
//!
//! Component `k` of the embedding at scale `n` is `V^k(lambda^n) = X(alpha^(nT+k))`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::covariance::SeasonalCovariance;
use crate::error::{domain, Error, Result};
use crate::grid::powr;
use crate::path::{fmt_f64, SampledPath};

/// Default number of quadrature nodes in [`quadrature_check`].
pub const QUADRATURE_POINTS: usize = 4096;

/// Splits a geometric path into its `T` components, each of length `M`.
pub fn embed_multidim(path: &SampledPath) -> Result<Vec<Vec<f64>>> {
    let grid = path
        .geometric()
        .ok_or_else(|| domain("embedding needs a path on a geometric grid"))?;
    let t = grid.period();
    let v = &path.values()[..grid.intervals() * t];
    Ok((0..t)
        .map(|k| v.iter().skip(k).step_by(t).copied().collect())
        .collect())
}

/// Inverse of [`embed_multidim`]: interleaves the components scale by scale.
pub fn flatten(components: &[Vec<f64>]) -> Vec<f64> {
    let m = components.first().map_or(0, Vec::len);
    (0..m)
        .flat_map(|n| components.iter().map(move |c| c[n]))
        .collect()
}

/// `Q(n, tau)_{jk} = E[V^j(lambda^(n+tau)) V^k(lambda^n)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub n: i64,
    pub tau: i64,
    pub hurst: f64,
    pub alpha: f64,
    pub values: DMatrix<f64>,
}

impl QMatrix {
    pub fn period(&self) -> usize {
        self.values.nrows()
    }
}

fn c_ratio(cov: &SeasonalCovariance, j: usize, k: usize) -> f64 {
    cov.h_tilde(j as i64 - 1) / cov.h_tilde(k as i64 - 1)
}

/// Covariance matrix of the embedding. Positive lags use the product form
/// `lambda^(2nH) C_{jk} R_k(0) h~(alpha^(T-1))^tau` with
/// `C_{jk} = h~(alpha^(j-1)) / h~(alpha^(k-1))`; lag zero is the symmetric
/// within-period covariance and negative lags follow by transposition.
pub fn q_matrix(cov: &SeasonalCovariance, n: i64, tau: i64) -> Result<QMatrix> {
    cov.require_admissible()?;
    let t = cov.period();
    let scale = powr(cov.period_growth(), n as f64);
    let values = if tau >= 1 {
        let growth = cov.h_tilde(t as i64 - 1).powi(tau as i32);
        DMatrix::from_fn(t, t, |j, k| scale * c_ratio(cov, j, k) * cov.r0()[k] * growth)
    } else if tau == 0 {
        DMatrix::from_fn(t, t, |j, k| {
            let (lo, hi) = (j.min(k) as i64, j.max(k) as i64);
            scale * cov.covariance(lo, hi - lo).expect("indices within one period")
        })
    } else {
        let pos = q_matrix(cov, n, -tau)?;
        pos.values.transpose() * powr(cov.period_growth(), tau as f64)
    };
    Ok(QMatrix {
        n,
        tau,
        hurst: cov.hurst(),
        alpha: cov.alpha(),
        values,
    })
}

/// Spectral density matrix of the stationary sequence
/// `lambda^(-nH) V(lambda^n)`:
///
/// ```text
/// d_jr(w) = 1/(2 pi) [ C_jr R_r(0) / (1 - e^{-iwT} rho) - C_rj R_j(0) / (1 - e^{-iwT} / rho) ]
/// ```
///
/// with `rho = alpha^(-HT) h~(alpha^(T-1))`.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    cov: SeasonalCovariance,
    rho: f64,
}

impl SpectralDensity {
    pub fn new(cov: &SeasonalCovariance) -> Result<Self> {
        let t = cov.period();
        let rho = powr(cov.alpha(), -cov.hurst() * t as f64) * cov.h_tilde(t as i64 - 1);
        if !(rho.abs() < 1.0) {
            return Err(Error::Precondition(format!(
                "spectral density needs |rho| < 1, got rho = {rho}"
            )));
        }
        Ok(Self {
            cov: cov.clone(),
            rho,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn period(&self) -> usize {
        self.cov.period()
    }

    pub fn entry(&self, j: usize, r: usize, omega: f64) -> Complex64 {
        let t = self.period() as f64;
        let z = Complex64::from_polar(1.0, -omega * t);
        let r0 = self.cov.r0();
        let first = c_ratio(&self.cov, j, r) * r0[r] / (1.0 - z * self.rho);
        let second = c_ratio(&self.cov, r, j) * r0[j] / (1.0 - z / self.rho);
        (first - second) / (2.0 * PI)
    }

    pub fn matrix(&self, omega: f64) -> DMatrix<Complex64> {
        let t = self.period();
        DMatrix::from_fn(t, t, |j, r| self.entry(j, r, omega))
    }
}

pub fn spectral_density(cov: &SeasonalCovariance, omega: f64) -> Result<DMatrix<Complex64>> {
    Ok(SpectralDensity::new(cov)?.matrix(omega))
}

/// Outcome of [`quadrature_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub lhs: Complex64,
    pub rhs: f64,
    pub defect: f64,
}

/// Compares `int_0^{2 pi} e^{imTw} d_jr(w) dw` (periodic trapezoid rule on
/// `points` nodes) with the lag-`m` covariance of the stationary sequence,
/// `lambda^(-mH) Q_jr(0, m)`.
pub fn quadrature_check(
    cov: &SeasonalCovariance,
    j: usize,
    r: usize,
    m: i64,
    points: usize,
) -> Result<Quadrature> {
    let t = cov.period();
    if j >= t || r >= t {
        return Err(domain(format!("components ({j}, {r}) out of range 0..{t}")));
    }
    if points == 0 {
        return Err(domain("quadrature needs at least one node"));
    }
    let d = SpectralDensity::new(cov)?;
    let h = 2.0 * PI / points as f64;
    let lhs: Complex64 = (0..points)
        .map(|q| {
            let w = q as f64 * h;
            Complex64::from_polar(1.0, (m * t as i64) as f64 * w) * d.entry(j, r, w)
        })
        .sum::<Complex64>()
        * h;
    let q = q_matrix(cov, 0, m)?;
    let rhs = powr(cov.lambda(), -(m as f64) * cov.hurst()) * q.values[(j, r)];
    Ok(Quadrature {
        lhs,
        rhs,
        defect: (lhs - rhs).norm(),
    })
}

/// `B_k(tau)` for `k = 0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub tau: i64,
    pub hurst: f64,
    pub alpha: f64,
    pub values: Vec<Complex64>,
}

impl SpectralCoefficients {
    /// `alpha^((2n+tau)H) sum_k B_k(tau) e^{2 pi i k n / T}`.
    pub fn reconstruct(&self, n: i64) -> Complex64 {
        let t = self.values.len() as f64;
        let sum: Complex64 = self
            .values
            .iter()
            .enumerate()
            .map(|(k, b)| b * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * n as f64 / t))
            .sum();
        sum * powr(self.alpha, (2 * n + self.tau) as f64 * self.hurst)
    }
}

/// `B_k(tau) = (1/T) sum_{n<T} alpha^(-(2n+tau)H) R_n(tau) e^{-2 pi i k n / T}`.
pub fn spectral_coefficients(cov: &SeasonalCovariance, tau: i64) -> SpectralCoefficients {
    let t = cov.period();
    let h = cov.hurst();
    let series: Vec<f64> = (0..t as i64)
        .map(|n| powr(cov.alpha(), -((2 * n + tau) as f64) * h) * cov.covariance_extended(n, tau))
        .collect();
    let values = (0..t)
        .map(|k| {
            series
                .iter()
                .enumerate()
                .map(|(n, x)| x * Complex64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / t as f64))
                .sum::<Complex64>()
                / t as f64
        })
        .collect();
    SpectralCoefficients {
        tau,
        hurst: h,
        alpha: cov.alpha(),
        values,
    }
}

/// `count` equally spaced frequencies on `[0, 2 pi)`.
pub fn omega_grid(count: usize) -> Vec<f64> {
    (0..count).map(|q| 2.0 * PI * q as f64 / count as f64).collect()
}

/// Writes `omega,j,r,re,im`, one row per frequency and entry.
pub fn write_spectral_csv<W: Write>(out: W, density: &SpectralDensity, omegas: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "j", "r", "re", "im"])?;
    let t = density.period();
    for &omega in omegas {
        for j in 0..t {
            for r in 0..t {
                let d = density.entry(j, r, omega);
                w.write_record([fmt_f64(omega), j.to_string(), r.to_string(), fmt_f64(d.re), fmt_f64(d.im)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `n,tau,j,k,value`.
pub fn write_q_csv<W: Write>(out: W, matrices: &[QMatrix]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "tau", "j", "k", "value"])?;
    for q in matrices {
        for j in 0..q.period() {
            for k in 0..q.period() {
                w.write_record([
                    q.n.to_string(),
                    q.tau.to_string(),
                    j.to_string(),
                    k.to_string(),
                    fmt_f64(q.values[(j, k)]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
