//! Sampled paths and their on-disk form.
//!
//! A path is written as a CSV with header `k,t,x` (one row per grid index)
//! next to a JSON sidecar carrying the provenance and the grid parameters.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{EquispacedScaleGrid, Grid, ScaleGrid};

/// Formats a float with 12 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

/// Provenance of a path.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathMeta {
    pub model: String,
    pub seed: Option<u64>,
    pub hurst: Option<f64>,
}

/// A realized process on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Grid,
    values: Vec<f64>,
    pub meta: PathMeta,
}

impl SampledPath {
    pub fn new(grid: impl Into<Grid>, values: Vec<f64>, meta: PathMeta) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.len() {
            return Err(domain(format!(
                "path has {} values but the grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite value at index {k}")));
        }
        Ok(Self { grid, values, meta })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn geometric(&self) -> Option<&ScaleGrid> {
        match &self.grid {
            Grid::Geometric(g) => Some(g),
            Grid::Equispaced(_) => None,
        }
    }

    pub fn equispaced(&self) -> Option<&EquispacedScaleGrid> {
        match &self.grid {
            Grid::Equispaced(g) => Some(g),
            Grid::Geometric(_) => None,
        }
    }

    /// Same path, values multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn sidecar(&self) -> Sidecar {
        let (grid, alpha, base) = match &self.grid {
            Grid::Geometric(g) => (GridKind::Geometric, Some(g.alpha()), Some(g.base())),
            Grid::Equispaced(_) => (GridKind::Equispaced, None, None),
        };
        Sidecar {
            model: self.meta.model.clone(),
            seed: self.meta.seed,
            hurst: self.meta.hurst,
            grid,
            alpha,
            lambda: self.grid.lambda(),
            period: self.grid.period(),
            intervals: self.grid.intervals(),
            base,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "t", "x"])?;
        for (k, (t, x)) in self.times().iter().zip(&self.values).enumerate() {
            w.write_record([k.to_string(), fmt_f64(*t), fmt_f64(*x)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<path>` as CSV and the sidecar at `<path>` with extension `json`.
    pub fn save(&self, csv_path: &Path) -> Result<PathBuf> {
        let file = fs::File::create(csv_path)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let side = sidecar_path(csv_path);
        fs::write(&side, serde_json::to_string_pretty(&self.sidecar())? + "\n")?;
        Ok(side)
    }

    /// Reads a CSV path using the grid described by `sidecar`.
    pub fn read_csv<R: Read>(input: R, sidecar: &Sidecar) -> Result<Self> {
        let grid = sidecar.grid()?;
        let expected = grid.times();
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "t", "x"] {
            return Err(domain(format!("expected header k,t,x, got {headers:?}")));
        }
        let mut values = Vec::with_capacity(expected.len());
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| domain(format!("row {row}: missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| domain(format!("row {row}: {e}")))
            };
            let k = parse(0)? as usize;
            if k != row {
                return Err(domain(format!("row {row}: index column reads {k}")));
            }
            let t = parse(1)?;
            if let Some(&te) = expected.get(row) {
                if (t / te - 1.0).abs() > 1e-9 {
                    return Err(domain(format!(
                        "row {row}: time {t} does not match grid time {te}"
                    )));
                }
            }
            values.push(parse(2)?);
        }
        Self::new(
            grid,
            values,
            PathMeta {
                model: sidecar.model.clone(),
                seed: sidecar.seed,
                hurst: sidecar.hurst,
            },
        )
    }

    /// Loads a CSV path together with its sidecar.
    pub fn load(csv_path: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
        Self::read_csv(fs::File::open(csv_path)?, &side)
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Geometric,
    Equispaced,
}

/// JSON sidecar `{model, seed, H, alpha, T, M}` plus the grid kind and scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub model: String,
    pub seed: Option<u64>,
    #[serde(rename = "H")]
    pub hurst: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "T")]
    pub period: usize,
    #[serde(rename = "M")]
    pub intervals: usize,
    pub grid: GridKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
}

impl Sidecar {
    pub fn grid(&self) -> Result<Grid> {
        Ok(match self.grid {
            GridKind::Geometric => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::Domain("geometric sidecar lacks alpha".into()))?;
                ScaleGrid::with_base(alpha, self.period, self.intervals, self.base.unwrap_or(1.0))?
                    .into()
            }
            GridKind::Equispaced => {
                EquispacedScaleGrid::new(self.lambda, self.period, self.intervals)?.into()
            }
        })
    }
}
