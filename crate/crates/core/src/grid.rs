//! Sampling lattices and the quasi-Lamperti transform pair.
//!
//! A [`ScaleGrid`] samples at `base * alpha^k` for `k = 0..=M*T`, so every
//! scale interval `[lambda^(n-1), lambda^n)` with `lambda = alpha^T` holds `T`
//! geometric samples plus the closing point at `alpha^(M*T)`. An
//! [`EquispacedScaleGrid`] places `T` equally spaced points inside `[1, lambda)`
//! and repeats them, multiplied by `lambda^i`, in every later interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Log-space slack used to snap a time onto an interval boundary.
///
/// Grid times are computed as `alpha.powi(k)` while boundaries are `lambda^n`;
/// the two agree only up to a few ulps, and a boundary point must land in the
/// interval it opens.
const BOUNDARY_SNAP: f64 = 1e-9;

/// `base^x` computed as `exp(x ln base)`.
#[inline]
pub(crate) fn powr(base: f64, x: f64) -> f64 {
    (x * base.ln()).exp()
}

/// Geometric sampling lattice `base * alpha^k`, `k = 0..=M*T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleGrid {
    alpha: f64,
    #[serde(rename = "T")]
    samples_per_scale: usize,
    #[serde(rename = "M")]
    intervals: usize,
    #[serde(default = "default_base")]
    base: f64,
}

fn default_base() -> f64 {
    1.0
}

impl ScaleGrid {
    pub fn new(alpha: f64, samples_per_scale: usize, intervals: usize) -> Result<Self> {
        Self::with_base(alpha, samples_per_scale, intervals, 1.0)
    }

    pub fn with_base(
        alpha: f64,
        samples_per_scale: usize,
        intervals: usize,
        base: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(domain(format!("alpha must be > 1, got {alpha}")));
        }
        if samples_per_scale == 0 || intervals == 0 {
            return Err(domain("T and M must be positive"));
        }
        if !(base.is_finite() && base > 0.0) {
            return Err(domain(format!("base must be > 0, got {base}")));
        }
        Ok(Self {
            alpha,
            samples_per_scale,
            intervals,
            base,
        })
    }

    /// Grid with scale `lambda` split into `T` geometric steps, `alpha = lambda^(1/T)`.
    pub fn from_lambda(lambda: f64, samples_per_scale: usize, intervals: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(domain(format!("lambda must be > 1, got {lambda}")));
        }
        if samples_per_scale == 0 {
            return Err(domain("T must be positive"));
        }
        Self::new(
            powr(lambda, 1.0 / samples_per_scale as f64),
            samples_per_scale,
            intervals,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Samples per scale interval, `T`.
    pub fn period(&self) -> usize {
        self.samples_per_scale
    }

    /// Number of scale intervals, `M`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn lambda(&self) -> f64 {
        self.alpha.powi(self.samples_per_scale as i32)
    }

    /// Number of grid points, `M*T + 1`.
    pub fn len(&self) -> usize {
        self.intervals * self.samples_per_scale + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.base * self.alpha.powi(k as i32)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// Per-scale equispaced lattice `t_{i,k} = lambda^i * t_k`,
/// `t_k = 1 + (k-1)(lambda-1)/T`, `k = 1..=T`, `i = 0..M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquispacedScaleGrid {
    lambda: f64,
    #[serde(rename = "T")]
    samples_per_scale: usize,
    #[serde(rename = "M")]
    intervals: usize,
}

impl EquispacedScaleGrid {
    pub fn new(lambda: f64, samples_per_scale: usize, intervals: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(domain(format!("lambda must be > 1, got {lambda}")));
        }
        if samples_per_scale == 0 || intervals == 0 {
            return Err(domain("T and M must be positive"));
        }
        Ok(Self {
            lambda,
            samples_per_scale,
            intervals,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn period(&self) -> usize {
        self.samples_per_scale
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals * self.samples_per_scale
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of the `k`-th point (0-based) inside `[1, lambda)`.
    pub fn offset(&self, k: usize) -> f64 {
        1.0 + k as f64 * (self.lambda - 1.0) / self.samples_per_scale as f64
    }

    /// Time of the `k`-th point (0-based) of interval `i` (0-based).
    pub fn time(&self, i: usize, k: usize) -> f64 {
        self.lambda.powi(i as i32) * self.offset(k)
    }

    /// All times, interval-major.
    pub fn times(&self) -> Vec<f64> {
        (0..self.intervals)
            .flat_map(|i| (0..self.samples_per_scale).map(move |k| self.time(i, k)))
            .collect()
    }
}

/// Either sampling lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Geometric(ScaleGrid),
    Equispaced(EquispacedScaleGrid),
}

impl Grid {
    pub fn times(&self) -> Vec<f64> {
        match self {
            Grid::Geometric(g) => g.times(),
            Grid::Equispaced(g) => g.times(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Geometric(g) => g.len(),
            Grid::Equispaced(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Grid::Geometric(g) => g.lambda(),
            Grid::Equispaced(g) => g.lambda(),
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Grid::Geometric(g) => g.period(),
            Grid::Equispaced(g) => g.period(),
        }
    }

    pub fn intervals(&self) -> usize {
        match self {
            Grid::Geometric(g) => g.intervals(),
            Grid::Equispaced(g) => g.intervals(),
        }
    }
}

impl From<ScaleGrid> for Grid {
    fn from(g: ScaleGrid) -> Self {
        Grid::Geometric(g)
    }
}

impl From<EquispacedScaleGrid> for Grid {
    fn from(g: EquispacedScaleGrid) -> Self {
        Grid::Equispaced(g)
    }
}

/// Index `n` of the scale interval `[lambda^(n-1), lambda^n)` containing `t`.
///
/// Times within a relative `1e-9` (in log scale) of a boundary are treated as
/// sitting on it.
pub fn interval_index(t: f64, lambda: f64) -> Result<i64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("interval_index needs t > 0, got {t}")));
    }
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(domain(format!("lambda must be > 1, got {lambda}")));
    }
    let x = t.ln() / lambda.ln();
    let nearest = x.round();
    let below = if (x - nearest).abs() <= BOUNDARY_SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        x.floor()
    };
    Ok(below as i64 + 1)
}

/// `x[n] = alpha^(n H) y[n]`: the quasi-Lamperti transform sampled at `t = alpha^n`.
pub fn lamperti_forward(hurst: f64, alpha: f64, y: &[f64]) -> Vec<f64> {
    y.iter()
        .enumerate()
        .map(|(n, &v)| powr(alpha, n as f64 * hurst) * v)
        .collect()
}

/// `y[n] = alpha^(-n H) x[n]`.
pub fn lamperti_inverse(hurst: f64, alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(n, &v)| v / powr(alpha, n as f64 * hurst))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_times_small() {
        let g = ScaleGrid::new(2.0, 1, 2).unwrap();
        assert_eq!(g.times(), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn grid_times_experiment_size() {
        let g = ScaleGrid::new(1.05, 6, 500).unwrap();
        let times = g.times();
        assert_eq!(times.len(), 3001);
        let last = *times.last().unwrap();
        assert!((last / 1.05f64.powf(3000.0) - 1.0).abs() < 1e-12);
        for w in times.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] / w[0] / 1.05 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_interval_ratio_is_lambda() {
        let g = ScaleGrid::new(1.05, 6, 1).unwrap();
        let t = g.times();
        assert!((t[6] / t[0] - 1.340_095_640_625).abs() < 1e-12);
        assert_eq!(g.lambda(), t[6]);
    }

    #[test]
    fn from_lambda_roundtrip() {
        let g = ScaleGrid::from_lambda(1.2, 6, 100).unwrap();
        assert!((g.lambda() - 1.2).abs() < 1e-14);
        assert_eq!(g.len(), 601);
    }

    #[test]
    fn invalid_grids() {
        assert!(ScaleGrid::new(1.0, 6, 1).is_err());
        assert!(ScaleGrid::new(1.1, 0, 1).is_err());
        assert!(ScaleGrid::new(1.1, 1, 0).is_err());
        assert!(ScaleGrid::with_base(1.1, 1, 1, 0.0).is_err());
        assert!(EquispacedScaleGrid::new(0.5, 3, 3).is_err());
    }

    #[test]
    fn interval_index_examples() {
        assert_eq!(interval_index(1.0, 1.5).unwrap(), 1);
        assert_eq!(interval_index(1.05f64.powi(9), 1.05f64.powi(6)).unwrap(), 2);
        assert_eq!(interval_index(1.2f64.powi(3), 1.2).unwrap(), 4);
        assert_eq!(interval_index(1.2f64.powi(3) * (1.0 - 1e-6), 1.2).unwrap(), 3);
        assert!(interval_index(0.0, 1.2).is_err());
        assert!(interval_index(-1.0, 1.2).is_err());
    }

    #[test]
    fn grid_aligns_with_intervals() {
        for &(alpha, period) in &[(1.05, 6usize), (1.3, 2), (1.01, 25)] {
            let g = ScaleGrid::new(alpha, period, 40).unwrap();
            let lambda = g.lambda();
            for k in 0..g.intervals() {
                let n = interval_index(g.time(k * period), lambda).unwrap();
                assert_eq!(n, k as i64 + 1, "alpha={alpha} k={k}");
                // last point of the interval stays inside it
                let n_last = interval_index(g.time(k * period + period - 1), lambda).unwrap();
                assert_eq!(n_last, k as i64 + 1);
            }
        }
    }

    #[test]
    fn equispaced_structure() {
        let g = EquispacedScaleGrid::new(1.2, 5, 4).unwrap();
        assert_eq!(g.offset(0), 1.0);
        assert!(g.offset(4) < 1.2);
        for i in 0..3 {
            for k in 0..5 {
                assert!((g.time(i + 1, k) / g.time(i, k) / 1.2 - 1.0).abs() < 1e-15);
                assert_eq!(interval_index(g.time(i, k), 1.2).unwrap(), i as i64 + 1);
            }
        }
        let times = g.times();
        assert_eq!(times.len(), 20);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn lamperti_examples() {
        assert_eq!(lamperti_forward(0.7, 1.3, &[0.0; 5]), vec![0.0; 5]);
        let x = lamperti_forward(0.8, 1.05, &[1.0; 3]);
        assert!((x[2] - 1.05f64.powf(1.6)).abs() < 1e-14);
        assert!((x[2] - 1.0812).abs() < 1e-4);
        assert_eq!(lamperti_forward(3.3, 7.0, &[2.5])[0], 2.5);
        let y = lamperti_inverse(0.5, 4.0, &[0.0, 6.0]);
        assert!((y[1] - 3.0).abs() < 1e-15);
        let x: Vec<f64> = (0..50).map(|n| 1.05f64.powf(0.8 * n as f64)).collect();
        for v in lamperti_inverse(0.8, 1.05, &x) {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn lamperti_roundtrip(
            h in 0.01f64..2.0,
            alpha in 1.001f64..3.0,
            y in proptest::collection::vec(-1e3f64..1e3, 0..200),
        ) {
            let back = lamperti_inverse(h, alpha, &lamperti_forward(h, alpha, &y));
            for (a, b) in y.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-14 * a.abs());
            }
        }
    }
}
