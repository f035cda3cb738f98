//! Run parameters: command-line flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use dsim::process::{Drift, ModelSpec};

use crate::CliError;

/// Flags shared by every subcommand. Each one overrides the matching key of
/// the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model family: sbm or dsiar.
    #[arg(long)]
    pub model: Option<String>,
    /// SBM drift: none, sin, random or const:<a>.
    #[arg(long)]
    pub drift: Option<String>,
    /// Hurst index.
    #[arg(long = "H")]
    pub hurst: Option<f64>,
    /// Geometric sampling ratio.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Samples per scale interval.
    #[arg(long = "T")]
    pub period: Option<usize>,
    /// Number of scale intervals.
    #[arg(long = "M")]
    pub intervals: Option<usize>,
    /// Scale lambda = alpha^T.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sampling grid: geometric or equispaced.
    #[arg(long)]
    pub grid: Option<String>,
    /// DSIAR coefficients `theta_1(alpha^j)`, comma separated over one period.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// DSIAR noise scales, comma separated over one period.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// DSIAR warm-up steps.
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelField {
    Name(String),
    Spec(ModelSpec),
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<ModelField>,
    pub drift: Option<String>,
    #[serde(rename = "H")]
    pub hurst: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "T")]
    pub period: Option<usize>,
    #[serde(rename = "M")]
    pub intervals: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub theta: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub burn_in: Option<usize>,
    pub n: Option<usize>,
    pub tau: Option<i64>,
    pub mle: Option<bool>,
    pub from_path: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub omega_points: Option<usize>,
    pub hursts: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridChoice {
    Geometric,
    Equispaced,
}

/// Effective parameters after merging flags and file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub model: Option<String>,
    pub spec: Option<ModelSpec>,
    pub drift: Option<String>,
    pub hurst: Option<f64>,
    pub alpha: Option<f64>,
    pub period: Option<usize>,
    pub intervals: Option<usize>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub theta: Option<Vec<f64>>,
    pub sigma: Option<Vec<f64>>,
    pub burn_in: Option<usize>,
    pub file: FileConfig,
}

impl Settings {
    pub fn resolve(flags: &Common) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let (file_model, spec) = match &file.model {
            Some(ModelField::Name(n)) => (Some(n.clone()), None),
            Some(ModelField::Spec(s)) => (None, Some(s.clone())),
            None => (None, None),
        };
        let model = flags.model.clone().or(file_model);
        // an explicit model name that disagrees with the file's spec drops the spec
        let spec = match (&model, spec) {
            (Some(name), Some(s)) if !spec_matches(name, &s) => None,
            (_, s) => s,
        };
        Ok(Self {
            model,
            spec,
            drift: flags.drift.clone().or_else(|| file.drift.clone()),
            hurst: flags.hurst.or(file.hurst),
            alpha: flags.alpha.or(file.alpha),
            period: flags.period.or(file.period),
            intervals: flags.intervals.or(file.intervals),
            lambda: flags.lambda.or(file.lambda),
            seed: flags.seed.or(file.seed),
            reps: flags.reps.or(file.reps),
            out: flags.out.clone().or_else(|| file.out.clone()),
            grid: flags.grid.clone().or_else(|| file.grid.clone()),
            theta: flags.theta.clone().or_else(|| file.theta.clone()),
            sigma: flags.sigma.clone().or_else(|| file.sigma.clone()),
            burn_in: flags.burn_in.or(file.burn_in),
            file,
        })
    }

    pub fn model_name(&self) -> String {
        match (&self.model, &self.spec) {
            (Some(n), _) => n.to_ascii_lowercase(),
            (None, Some(ModelSpec::Sbm { .. })) => "sbm".into(),
            (None, Some(ModelSpec::Dsiar { .. })) => "dsiar".into(),
            (None, Some(ModelSpec::Pcar { .. })) => "pcar".into(),
            (None, None) => "sbm".into(),
        }
    }

    pub fn drift(&self) -> Result<Drift, CliError> {
        if let Some(d) = &self.drift {
            return d.parse().map_err(|e: dsim::Error| CliError::Input(e.to_string()));
        }
        match &self.spec {
            Some(ModelSpec::Sbm { drift, .. }) => Ok(*drift),
            _ => Ok(Drift::None),
        }
    }

    pub fn grid(&self, default: GridChoice) -> Result<GridChoice, CliError> {
        match self.grid.as_deref() {
            None => Ok(default),
            Some("geometric") => Ok(GridChoice::Geometric),
            Some("equispaced") => Ok(GridChoice::Equispaced),
            Some(other) => Err(CliError::Usage(format!(
                "unknown grid '{other}' (expected geometric or equispaced)"
            ))),
        }
    }

    /// Fills H, alpha, lambda and T from a model spec when the flags leave them open.
    pub fn with_spec_defaults(mut self) -> Self {
        match &self.spec {
            Some(ModelSpec::Sbm { hurst, lambda, alpha, period, .. }) => {
                self.hurst = self.hurst.or(Some(*hurst));
                self.lambda = self.lambda.or(*lambda);
                self.alpha = self.alpha.or(*alpha);
                self.period = self.period.or(*period);
            }
            Some(ModelSpec::Dsiar { hurst, alpha, period, .. }) => {
                self.hurst = self.hurst.or(Some(*hurst));
                self.alpha = self.alpha.or(Some(*alpha));
                self.period = self.period.or(Some(*period));
            }
            Some(ModelSpec::Pcar { period, .. }) => {
                self.period = self.period.or(Some(*period));
            }
            None => {}
        }
        self
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage("a stochastic run needs --seed".into()))
    }

    /// Consistent `(alpha, lambda)` for `T` samples per interval.
    pub fn scale(&self, period: usize) -> Result<(f64, f64), CliError> {
        let t = period as f64;
        match (self.alpha, self.lambda) {
            (Some(a), Some(l)) => {
                let implied = a.powf(t);
                if (implied / l - 1.0).abs() > 1e-9 {
                    return Err(CliError::Input(format!(
                        "alpha^T = {implied} disagrees with lambda = {l}"
                    )));
                }
                Ok((a, l))
            }
            (Some(a), None) => Ok((a, a.powf(t))),
            (None, Some(l)) => Ok((l.powf(1.0 / t), l)),
            (None, None) => Err(CliError::Usage("need --alpha or --lambda".into())),
        }
    }
}

fn spec_matches(name: &str, spec: &ModelSpec) -> bool {
    matches!(
        (name.to_ascii_lowercase().as_str(), spec),
        ("sbm", ModelSpec::Sbm { .. }) | ("dsiar", ModelSpec::Dsiar { .. }) | ("pcar", ModelSpec::Pcar { .. })
    )
}

/// Rounds every float in a JSON document to 12 significant digits.
pub fn round_json(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = dsim::path::fmt_f64(x).parse().expect("formatted float parses");
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}
