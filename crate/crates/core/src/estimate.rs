//! Moment estimators of the seasonal covariance table and the
//! variation-ratio Hurst estimator.
//!
//! The covariance estimators pool the `M` scale intervals of one geometric
//! path: by scale invariance `lambda^(-kH) X(alpha^(kT+j))` has the law of
//! `X(alpha^j)` for every `k`, so each interval contributes one draw.

use serde::{Deserialize, Serialize};

use crate::covariance::{Admissibility, SeasonalCovariance};
use crate::error::{domain, Error, Result};
use crate::grid::{powr, ScaleGrid};
use crate::path::SampledPath;

fn geometric(path: &SampledPath) -> Result<&ScaleGrid> {
    path.geometric()
        .ok_or_else(|| domain("estimator needs a path on a geometric grid"))
}

/// Pooled draws of `X(alpha^j)`: `lambda^(-kH) X(alpha^(kT+j))` for `k = 0..M`.
struct Pooled<'a> {
    values: &'a [f64],
    period: usize,
    intervals: usize,
    log_lambda: f64,
    hurst: f64,
}

impl<'a> Pooled<'a> {
    fn new(path: &'a SampledPath, hurst: f64) -> Result<Self> {
        let grid = geometric(path)?;
        if !(hurst.is_finite() && hurst > 0.0) {
            return Err(domain(format!("H must be > 0, got {hurst}")));
        }
        Ok(Self {
            values: path.values(),
            period: grid.period(),
            intervals: grid.intervals(),
            log_lambda: grid.lambda().ln(),
            hurst,
        })
    }

    fn need_two(&self) -> Result<()> {
        if self.intervals < 2 {
            return Err(Error::InsufficientData(format!(
                "need at least 2 scale intervals, got {}",
                self.intervals
            )));
        }
        Ok(())
    }

    /// `lambda^(x H)`.
    fn growth(&self, x: f64) -> f64 {
        (x * self.hurst * self.log_lambda).exp()
    }

    /// `lambda^(-kH) X(alpha^(kT + offset))`.
    fn draw(&self, k: usize, offset: usize) -> f64 {
        self.values[k * self.period + offset] / self.growth(k as f64)
    }

    fn mean(&self, j: usize) -> f64 {
        (0..self.intervals).map(|k| self.draw(k, j)).sum::<f64>() / self.intervals as f64
    }

    fn check_season(&self, j: usize) -> Result<()> {
        if j >= self.period {
            return Err(domain(format!("season {j} out of range 0..{}", self.period)));
        }
        Ok(())
    }
}

/// `m_j = (1/M) sum_k lambda^(-kH) X(alpha^(kT+j))`.
pub fn normalized_mean(path: &SampledPath, hurst: f64, j: usize) -> Result<f64> {
    let p = Pooled::new(path, hurst)?;
    p.check_season(j)?;
    Ok(p.mean(j))
}

/// `R^_j(0)`, divisor `M - 1`.
pub fn estimate_r0(path: &SampledPath, hurst: f64, j: usize) -> Result<f64> {
    let p = Pooled::new(path, hurst)?;
    p.check_season(j)?;
    p.need_two()?;
    let m = p.mean(j);
    let ss: f64 = (0..p.intervals).map(|k| (p.draw(k, j) - m).powi(2)).sum();
    Ok(ss / (p.intervals - 1) as f64)
}

/// `R^_j(1)`, divisor `M - 1`. At `j = T - 1` the second factor is
/// `lambda^(-kH) X(alpha^(kT+T))` centred at `lambda^H m_0`.
pub fn estimate_r1(path: &SampledPath, hurst: f64, j: usize) -> Result<f64> {
    let p = Pooled::new(path, hurst)?;
    p.check_season(j)?;
    p.need_two()?;
    let mj = p.mean(j);
    let next_center = if j + 1 < p.period {
        p.mean(j + 1)
    } else {
        p.growth(1.0) * p.mean(0)
    };
    let s: f64 = (0..p.intervals)
        .map(|k| (p.draw(k, j) - mj) * (p.draw(k, j + 1) - next_center))
        .sum();
    Ok(s / (p.intervals - 1) as f64)
}

/// `R^_n(tau)` for `n = rT + i`, `n + tau = sT + j`: averages
/// `(lambda^(-kH) X(alpha^(kT+n)) - lambda^(rH) m_i)(lambda^(-kH) X(alpha^(kT+n+tau)) - lambda^(sH) m_j)`
/// over `k = 0..=M-s-1` with divisor `M - s - 1`.
pub fn estimate_r_n_tau(path: &SampledPath, hurst: f64, n: usize, tau: i64) -> Result<f64> {
    if tau < 0 {
        let m = n as i64 + tau;
        if m < 0 {
            return Err(domain(format!("n + tau = {m} is negative")));
        }
        return estimate_r_n_tau(path, hurst, m as usize, -tau);
    }
    let p = Pooled::new(path, hurst)?;
    let later = n + tau as usize;
    let (r, i) = (n / p.period, n % p.period);
    let (s, j) = (later / p.period, later % p.period);
    if s + 2 > p.intervals {
        return Err(Error::InsufficientData(format!(
            "lag reaches scale interval {s}; need s <= M - 2 = {}",
            p.intervals as i64 - 2
        )));
    }
    let ci = p.growth(r as f64) * p.mean(i);
    let cj = p.growth(s as f64) * p.mean(j);
    let count = p.intervals - s;
    let sum: f64 = (0..count)
        .map(|k| (p.draw(k, n) - ci) * (p.draw(k, later) - cj))
        .sum();
    Ok(sum / (count - 1) as f64)
}

/// Estimated seasonal table with its admissibility report.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalEstimate {
    pub table: SeasonalCovariance,
    pub admissibility: Admissibility,
}

impl SeasonalEstimate {
    pub fn report(&self) -> EstimationReport {
        EstimationReport {
            hurst_used: self.table.hurst(),
            r0: self.table.r0().to_vec(),
            r1: self.table.r1().to_vec(),
            admissible: self.admissibility.admissible,
            margins: self.admissibility.margins.clone(),
        }
    }
}

/// JSON form `{H_used, r0, r1, admissible, margins}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    #[serde(rename = "H_used")]
    pub hurst_used: f64,
    pub r0: Vec<f64>,
    pub r1: Vec<f64>,
    pub admissible: bool,
    pub margins: Vec<f64>,
}

/// Estimates `{R_j(0), R_j(1)}` for every season `j`.
pub fn estimate_seasonal(path: &SampledPath, hurst: f64) -> Result<SeasonalEstimate> {
    let grid = geometric(path)?;
    let t = grid.period();
    let r0 = (0..t)
        .map(|j| estimate_r0(path, hurst, j))
        .collect::<Result<Vec<_>>>()?;
    // variances at rounding level mean the pooled draws are constant
    let p = Pooled::new(path, hurst)?;
    for (j, v) in r0.iter().enumerate() {
        let size = (0..p.intervals)
            .map(|k| p.draw(k, j).abs())
            .fold(0.0, f64::max);
        if *v <= (1e-12 * size).powi(2) {
            return Err(Error::Degenerate(format!(
                "estimated variance at season {j} vanishes"
            )));
        }
    }
    let r1 = (0..t)
        .map(|j| estimate_r1(path, hurst, j))
        .collect::<Result<Vec<_>>>()?;
    let table = SeasonalCovariance::new(hurst, grid.alpha(), r0, r1)?;
    let admissibility = table.admissibility();
    Ok(SeasonalEstimate {
        table,
        admissibility,
    })
}

/// Per-interval first and second order variation sums.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSums {
    pub ss1: Vec<f64>,
    pub ss2: Vec<f64>,
}

/// `SS_{1,i}` and `SS_{2,i}` inside every scale interval of an equispaced path.
/// Both are divided by `T - 1`.
pub fn variation_sums(path: &SampledPath) -> Result<VariationSums> {
    let grid = path
        .equispaced()
        .ok_or_else(|| domain("variation sums need a path on an equispaced scale grid"))?;
    let t = grid.period();
    if t < 3 {
        return Err(domain(format!(
            "second-order variation needs T >= 3 samples per interval, got {t}"
        )));
    }
    let div = (t - 1) as f64;
    let (ss1, ss2) = path
        .values()
        .chunks_exact(t)
        .map(|x| {
            let first: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            let second: f64 = x
                .windows(3)
                .map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2))
                .sum();
            (first / div, second / div)
        })
        .unzip();
    Ok(VariationSums { ss1, ss2 })
}

/// Output of [`hurst_variation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h1: f64,
    pub h2: f64,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    #[serde(skip)]
    pub ss1: Vec<f64>,
    #[serde(skip)]
    pub ss2: Vec<f64>,
}

/// Variation-ratio Hurst estimator:
/// `mu_{j,i} = log(SS_{j,i+1} / SS_{j,i}) / (2 log lambda)`, `H^_j = mean_i mu_{j,i}`.
pub fn hurst_variation(path: &SampledPath) -> Result<HurstEstimate> {
    let sums = variation_sums(path)?;
    let grid = path.equispaced().expect("checked by variation_sums");
    if grid.intervals() < 2 {
        return Err(Error::InsufficientData(
            "need at least 2 scale intervals".into(),
        ));
    }
    for (order, ss) in [(1, &sums.ss1), (2, &sums.ss2)] {
        if let Some(i) = ss.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Degenerate(format!(
                "order-{order} variation vanishes in scale interval {i}"
            )));
        }
    }
    let denom = 2.0 * grid.lambda().ln();
    let ratios = |ss: &[f64]| -> Vec<f64> {
        ss.windows(2).map(|w| (w[1] / w[0]).ln() / denom).collect()
    };
    let mu1 = ratios(&sums.ss1);
    let mu2 = ratios(&sums.ss2);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(HurstEstimate {
        h1: mean(&mu1),
        h2: mean(&mu2),
        mu1,
        mu2,
        ss1: sums.ss1,
        ss2: sums.ss2,
    })
}

/// Path `x(lambda^i t_k) = lambda^(iH) f(t_k)` on an equispaced grid:
/// exactly self-similar across intervals.
pub fn self_similar_fixture(
    grid: crate::grid::EquispacedScaleGrid,
    hurst: f64,
    profile: impl Fn(f64) -> f64,
) -> Result<SampledPath> {
    let values = (0..grid.intervals())
        .flat_map(|i| {
            let scale = powr(grid.lambda(), i as f64 * hurst);
            let profile = &profile;
            (0..grid.period()).map(move |k| scale * profile(grid.offset(k)))
        })
        .collect();
    SampledPath::new(grid, values, Default::default())
}
