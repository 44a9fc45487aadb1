use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use irs_swipt::channel::db_to_linear;
use irs_swipt::correlation::{read_matrix_csv, CorrelationMatrix, CorrelationModel};
use irs_swipt::montecarlo::MIN_TRIALS;
use irs_swipt::{PhaseMode, SystemParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("config line {line}: key `{key}`: {message}")]
    Key {
        key: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AvgEnergy,
    Outage,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::AvgEnergy => "avg_energy",
            Metric::Outage => "outage",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "avg_energy" => Ok(Metric::AvgEnergy),
            "outage" => Ok(Metric::Outage),
            other => Err(format!(
                "unknown metric `{other}` (expected avg_energy or outage)"
            )),
        }
    }
}

/// Correlation model family swept over `rho_list` and `n_side_list`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    Identity,
    Uniform,
    ExponentialLinear,
    ExponentialGrid,
    /// A fixed matrix; `rho_list` and `n_side_list` do not apply.
    Custom {
        path: PathBuf,
        dim: usize,
    },
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Identity => "identity",
            ModelFamily::Uniform => "uniform",
            ModelFamily::ExponentialLinear => "exponential_linear",
            ModelFamily::ExponentialGrid => "exponential_grid",
            ModelFamily::Custom { .. } => "custom",
        }
    }

    /// Whether the family is parameterized by `rho`.
    pub fn uses_rho(&self) -> bool {
        matches!(
            self,
            ModelFamily::Uniform | ModelFamily::ExponentialLinear | ModelFamily::ExponentialGrid
        )
    }

    pub fn model(&self, rho: Option<f64>, n_side: usize) -> CorrelationModel {
        let rho = rho.unwrap_or(0.0);
        match self {
            ModelFamily::Identity => CorrelationModel::Identity,
            ModelFamily::Uniform => CorrelationModel::Uniform { rho },
            ModelFamily::ExponentialLinear => CorrelationModel::ExponentialLinear { rho },
            ModelFamily::ExponentialGrid => CorrelationModel::ExponentialGrid { rho, n_side },
            ModelFamily::Custom { path, .. } => CorrelationModel::Custom { path: path.clone() },
        }
    }
}

/// Everything needed to run one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Label written to the `preset` column.
    pub preset: String,
    pub params: SystemParams,
    pub correlation: ModelFamily,
    pub rho_list: Vec<f64>,
    pub n_side_list: Vec<usize>,
    pub phase_modes: Vec<PhaseMode>,
    pub metrics: Vec<Metric>,
    pub trials: u64,
    pub seed: u64,
    pub analytic_only: bool,
    /// Drop optimal-phase cells whose correlation is neither identity nor
    /// all-ones, where no closed form exists.
    pub optimal_boundary_only: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            preset: "config".into(),
            params: SystemParams::default(),
            correlation: ModelFamily::ExponentialLinear,
            rho_list: vec![0.0, 0.5, 1.0],
            n_side_list: (2..=8).collect(),
            phase_modes: vec![PhaseMode::Random, PhaseMode::Equal, PhaseMode::Optimal],
            metrics: vec![Metric::AvgEnergy, Metric::Outage],
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            analytic_only: false,
            optimal_boundary_only: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
}

impl Preset {
    pub fn spec(self) -> SweepSpec {
        let (preset, metric) = match self {
            Preset::Fig1 => ("fig1", Metric::AvgEnergy),
            Preset::Fig2 => ("fig2", Metric::Outage),
        };
        SweepSpec {
            preset: preset.into(),
            metrics: vec![metric],
            optimal_boundary_only: true,
            ..SweepSpec::default()
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            other => Err(format!("unknown preset `{other}` (expected fig1 or fig2)")),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    transmit_power_db: Option<f64>,
    noise_variance_db: Option<f64>,
    conv_noise_variance_db: Option<f64>,
    d1_m: Option<f64>,
    d2_m: Option<f64>,
    pathloss_exponent: Option<f64>,
    zeta: Option<f64>,
    tau_bpcu: Option<f64>,
    correlation_model: Option<String>,
    rho_list: Option<Vec<f64>>,
    n_side_list: Option<Vec<usize>>,
    phase_modes: Option<Vec<String>>,
    metrics: Option<Vec<String>>,
    trials: Option<u64>,
    seed: Option<u64>,
    analytic_only: Option<bool>,
}

/// Reads and validates a JSON config file. Relative custom-matrix paths are
/// resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&src, base)
}

pub fn parse_config_str(src: &str, base_dir: &Path) -> Result<SweepSpec, ConfigError> {
    let raw: RawConfig = if src.trim().is_empty() {
        RawConfig::default()
    } else {
        let mut de = serde_json::Deserializer::from_str(src);
        let raw = serde_path_to_error::deserialize(&mut de).map_err(deserialize_error)?;
        de.end().map_err(|e| ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: "trailing characters after the JSON document".into(),
        })?;
        raw
    };
    Validator { src }.build(raw, base_dir)
}

fn deserialize_error(e: serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let (line, column) = (inner.line(), inner.column());
    let message = strip_position(&inner.to_string());
    if let Some(key) = message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
    {
        return ConfigError::UnknownKey {
            key: key.to_string(),
            line,
        };
    }
    if inner.is_data() && path != "." {
        // `rho_list[2]` still names the key
        let key = path.split(['[', '.']).next().unwrap_or(&path).to_string();
        return ConfigError::Key { key, line, message };
    }
    ConfigError::Syntax {
        line,
        column,
        message,
    }
}

/// serde_json appends " at line L column C", which the error variant already carries.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(idx) => message[..idx].to_string(),
        None => message.to_string(),
    }
}

/// 1-based line of the first occurrence of `"key"` used as an object key.
fn key_line(src: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(found) = src[from..].find(&needle) {
        let at = from + found;
        let after = src[at + needle.len()..].trim_start();
        if after.starts_with(':') {
            return src[..at].matches('\n').count() + 1;
        }
        from = at + needle.len();
    }
    1
}

struct Validator<'a> {
    src: &'a str,
}

impl Validator<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Key {
            key: key.to_string(),
            line: key_line(self.src, key),
            message: message.into(),
        }
    }

    fn finite(&self, key: &str, value: Option<f64>) -> Result<Option<f64>, ConfigError> {
        match value {
            Some(v) if !v.is_finite() => Err(self.err(key, "must be finite")),
            other => Ok(other),
        }
    }

    fn decibels(&self, key: &str, value: Option<f64>) -> Result<Option<f64>, ConfigError> {
        let Some(db) = self.finite(key, value)? else {
            return Ok(None);
        };
        let linear = db_to_linear(db);
        if !(linear > 0.0 && linear.is_finite()) {
            return Err(self.err(key, format!("{db} dB is outside the representable range")));
        }
        Ok(Some(linear))
    }

    fn positive(&self, key: &str, value: Option<f64>) -> Result<Option<f64>, ConfigError> {
        match self.finite(key, value)? {
            Some(v) if v <= 0.0 => Err(self.err(key, format!("must be positive, got {v}"))),
            other => Ok(other),
        }
    }

    fn build(&self, raw: RawConfig, base_dir: &Path) -> Result<SweepSpec, ConfigError> {
        let mut spec = SweepSpec::default();
        let p = &mut spec.params;
        if let Some(lin) = self.decibels("transmit_power_db", raw.transmit_power_db)? {
            p.transmit_power = lin;
        }
        if let Some(lin) = self.decibels("noise_variance_db", raw.noise_variance_db)? {
            p.noise_var = lin;
        }
        if let Some(lin) = self.decibels("conv_noise_variance_db", raw.conv_noise_variance_db)? {
            p.conv_noise_var = lin;
        }
        if let Some(d) = self.positive("d1_m", raw.d1_m)? {
            p.d1 = d;
        }
        if let Some(d) = self.positive("d2_m", raw.d2_m)? {
            p.d2 = d;
        }
        if let Some(a) = self.positive("pathloss_exponent", raw.pathloss_exponent)? {
            p.pathloss_exponent = a;
        }
        if let Some(z) = self.finite("zeta", raw.zeta)? {
            if !(z > 0.0 && z <= 1.0) {
                return Err(self.err("zeta", format!("must lie in (0, 1], got {z}")));
            }
            p.zeta = z;
        }
        if let Some(t) = self.finite("tau_bpcu", raw.tau_bpcu)? {
            if t < 0.0 {
                return Err(self.err("tau_bpcu", format!("must be nonnegative, got {t}")));
            }
            p.rate_threshold = t;
        }

        if let Some(name) = raw.correlation_model {
            spec.correlation = self.correlation(&name, base_dir)?;
        }
        if let Some(list) = raw.rho_list {
            if list.is_empty() {
                return Err(self.err("rho_list", "must not be empty"));
            }
            if let Some(bad) = list.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return Err(self.err("rho_list", format!("entries must lie in [0, 1], got {bad}")));
            }
            spec.rho_list = sorted_unique_f64(list);
        }
        if let Some(mut list) = raw.n_side_list {
            if list.is_empty() {
                return Err(self.err("n_side_list", "must not be empty"));
            }
            if list.contains(&0) {
                return Err(self.err("n_side_list", "entries must be at least 1"));
            }
            list.sort_unstable();
            list.dedup();
            spec.n_side_list = list;
        }
        if let Some(names) = raw.phase_modes {
            spec.phase_modes = self.parse_list("phase_modes", &names)?;
        }
        if let Some(names) = raw.metrics {
            spec.metrics = self.parse_list("metrics", &names)?;
        }
        if let Some(t) = raw.trials {
            if t < MIN_TRIALS {
                return Err(self.err("trials", format!("must be at least {MIN_TRIALS}, got {t}")));
            }
            spec.trials = t;
        }
        if let Some(s) = raw.seed {
            spec.seed = s;
        }
        if let Some(a) = raw.analytic_only {
            spec.analytic_only = a;
        }
        Ok(spec)
    }

    fn parse_list<T: FromStr<Err = String> + Ord>(
        &self,
        key: &str,
        names: &[String],
    ) -> Result<Vec<T>, ConfigError> {
        if names.is_empty() {
            return Err(self.err(key, "must not be empty"));
        }
        let mut out = names
            .iter()
            .map(|n| n.parse::<T>().map_err(|e| self.err(key, e)))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn correlation(&self, name: &str, base_dir: &Path) -> Result<ModelFamily, ConfigError> {
        const KEY: &str = "correlation_model";
        let family = match name {
            "identity" => ModelFamily::Identity,
            "uniform" => ModelFamily::Uniform,
            "exponential_linear" => ModelFamily::ExponentialLinear,
            "exponential_grid" => ModelFamily::ExponentialGrid,
            other => {
                let Some(file) = other.strip_prefix("custom:") else {
                    return Err(self.err(
                        KEY,
                        format!(
                            "unknown model `{other}` (expected identity, uniform, exponential_linear, \
                             exponential_grid or custom:<path>)"
                        ),
                    ));
                };
                let path = base_dir.join(file);
                let rows = read_matrix_csv(&path).map_err(|e| self.err(KEY, e.to_string()))?;
                CorrelationMatrix::from_rows(&rows).map_err(|e| self.err(KEY, e.to_string()))?;
                ModelFamily::Custom {
                    path,
                    dim: rows.len(),
                }
            }
        };
        Ok(family)
    }
}

fn sorted_unique_f64(mut list: Vec<f64>) -> Vec<f64> {
    list.sort_by(f64::total_cmp);
    list.dedup();
    list
}
