//! Run configuration. Every object is parsed strictly: unknown keys are
//! rejected and errors carry the JSON path of the offending entry.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

pub const DEFAULT_PRECISION: usize = 12;
pub const MAX_PRECISION: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Tpm,
    Ising,
    Ratefn,
    Impurity,
    Thermal,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Tpm => "tpm",
            Scenario::Ising => "ising",
            Scenario::Ratefn => "ratefn",
            Scenario::Impurity => "impurity",
            Scenario::Thermal => "thermal",
        }
    }
}

/// One swept parameter. Each value replaces `parameters[name]` in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: String,
    pub values: Vec<Value>,
    /// Header of the axis column in the aggregate; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Summary keys to aggregate; defaults depend on the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub parameters: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_precision")]
    pub precision: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<SweepAxis>,
}

fn default_precision() -> usize {
    DEFAULT_PRECISION
}

fn join_path(prefix: &str, path: &serde_path_to_error::Path) -> String {
    let inner = path.to_string();
    match (prefix.is_empty(), inner == ".") {
        (true, true) => "<root>".to_string(),
        (true, false) => inner,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{inner}"),
    }
}

/// Deserializes `value` strictly, reporting failures under `prefix`.
pub fn from_value<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = join_path(prefix, e.path());
        CliError::config(path, e.into_inner().to_string())
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = join_path("", e.path());
        CliError::config(path, e.into_inner().to_string())
    })?;
    if config.precision > MAX_PRECISION {
        return Err(CliError::config(
            "precision",
            format!("must be at most {MAX_PRECISION}, got {}", config.precision),
        ));
    }
    if let Some(axis) = &config.axis {
        if axis.name.is_empty() {
            return Err(CliError::config("axis.name", "must not be empty"));
        }
        if axis.values.is_empty() {
            return Err(CliError::config("axis.values", "must list at least one value"));
        }
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(path.display().to_string(), format!("cannot read config: {e}")))?;
    parse_config(&text)
}

/// Inclusive uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self, path: &str) -> Result<Vec<f64>> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(CliError::config(path, "grid ends must be finite"));
        }
        if self.points < 2 || self.end <= self.start {
            return Err(CliError::config(path, "grid needs end > start and at least two points"));
        }
        Ok(quenchlab_core::numerics::linspace(self.start, self.end, self.points))
    }
}
