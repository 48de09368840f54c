//! Executes configs and writes artifacts plus `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, SweepAxis};
use crate::emit::{json_f64, render_csv, render_json, sha256_hex, write_file, Cell, Table};
use crate::error::{CliError, Result};
use crate::scenario::{self, AggregateColumn, Artifact, Invariant, ScenarioOutput};

pub const MANIFEST: &str = "manifest.json";
pub const AGGREGATE: &str = "aggregate.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactRecord {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultManifest {
    pub config: RunConfig,
    pub artifacts: Vec<ArtifactRecord>,
    pub wall_time_seconds: f64,
    pub library_version: String,
    pub invariants: Vec<Invariant>,
    pub summary: Map<String, Value>,
}

impl ResultManifest {
    pub fn all_passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.invariants.iter().filter(|i| !i.passed).map(|i| i.name.as_str()).collect()
    }

    pub fn to_json(&self) -> Value {
        let invariants: Vec<Value> = self
            .invariants
            .iter()
            .map(|i| {
                json!({
                    "name": i.name,
                    "passed": i.passed,
                    "tolerance": json_f64(i.tolerance),
                    "value": json_f64(i.value),
                })
            })
            .collect();
        json!({
            "artifacts": self.artifacts,
            "config": self.config,
            "invariant_summary": {
                "all_passed": self.all_passed(),
                "checks": invariants,
                "failed": self.failed(),
            },
            "library_version": self.library_version,
            "summary": self.summary,
            "wall_time_seconds": self.wall_time_seconds,
        })
    }
}

pub fn library_version() -> String {
    format!("quenchlab {} (core {})", env!("CARGO_PKG_VERSION"), quenchlab_core::VERSION)
}

/// Renders every artifact to its final bytes.
pub fn render(output: &ScenarioOutput, precision: usize) -> Vec<(String, String)> {
    output
        .artifacts
        .iter()
        .map(|(name, a)| {
            let text = match a {
                Artifact::Csv(t) => render_csv(t, precision),
                Artifact::Json(v) => render_json(v, precision),
            };
            (name.clone(), text)
        })
        .collect()
}

fn write_all(dir: &Path, prefix: &str, files: &[(String, String)]) -> Result<Vec<ArtifactRecord>> {
    files
        .iter()
        .map(|(name, text)| {
            let rel = if prefix.is_empty() { name.clone() } else { format!("{prefix}/{name}") };
            write_file(&dir.join(&rel), text)?;
            Ok(ArtifactRecord {
                path: rel,
                sha256: sha256_hex(text.as_bytes()),
                bytes: text.len(),
            })
        })
        .collect()
}

fn summary_json(summary: &std::collections::BTreeMap<String, f64>) -> Map<String, Value> {
    summary.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect()
}

fn finish(manifest: &ResultManifest, dir: &Path) -> Result<()> {
    write_file(&dir.join(MANIFEST), &render_json(&manifest.to_json(), manifest.config.precision))
}

/// Resolves the output directory: `--out` wins over the config entry.
pub fn output_dir(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::config("output_dir", "no output directory given in the config or with --out"))
}

pub fn run_scenario(config: &RunConfig, dir: &Path) -> Result<ResultManifest> {
    if config.axis.is_some() {
        return Err(CliError::config("axis", "a sweep axis needs `quenchlab sweep`"));
    }
    let start = Instant::now();
    let prepared = scenario::prepare(config.scenario, &config.parameters)?;
    let output = scenario::execute(&prepared, config.seed)?;
    let files = render(&output, config.precision);
    let artifacts = write_all(dir, "", &files)?;
    let manifest = ResultManifest {
        config: config.clone(),
        artifacts,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        library_version: library_version(),
        invariants: output.invariants.clone(),
        summary: summary_json(&output.summary),
    };
    finish(&manifest, dir)?;
    Ok(manifest)
}

fn axis_cell(v: &Value) -> Cell {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Cell::Int(i),
            None => Cell::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => Cell::Text(s.clone()),
        other => Cell::Text(other.to_string()),
    }
}

fn axis_number(v: &Value) -> Option<f64> {
    v.as_f64()
}

/// One row per axis point, in axis order.
pub fn aggregate(axis: &SweepAxis, columns: &[AggregateColumn], outputs: &[ScenarioOutput]) -> Table {
    let label = axis.label.clone().unwrap_or_else(|| axis.name.clone());
    let mut headers = vec![label];
    headers.extend(columns.iter().map(|c| c.header().to_string()));
    let mut table = Table::new(&headers);
    for (i, (value, out)) in axis.values.iter().zip(outputs).enumerate() {
        let mut row = vec![axis_cell(value)];
        for c in columns {
            row.push(match c {
                AggregateColumn::Summary(k) => out.summary.get(k).copied().into(),
                AggregateColumn::RunningDecay { key, .. } => running_decay(axis, outputs, key, i).into(),
            });
        }
        table.push(row);
    }
    table
}

fn running_decay(axis: &SweepAxis, outputs: &[ScenarioOutput], key: &str, upto: usize) -> Option<f64> {
    if upto == 0 {
        return None;
    }
    let mut x = Vec::with_capacity(upto + 1);
    let mut y = Vec::with_capacity(upto + 1);
    for (v, out) in axis.values.iter().zip(outputs).take(upto + 1) {
        let (a, b) = (axis_number(v)?, *out.summary.get(key)?);
        if !(a > 0.0 && b > 0.0) {
            return None;
        }
        x.push(a);
        y.push(b);
    }
    quenchlab_core::numerics::fit_power_law(&x, &y).ok().map(|f| -f.slope)
}

fn point_dir(i: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(3);
    format!("point_{i:0width$}")
}

pub fn sweep(config: &RunConfig, dir: &Path) -> Result<ResultManifest> {
    let axis = config
        .axis
        .as_ref()
        .ok_or_else(|| CliError::config("axis", "sweep needs exactly one axis {\"name\", \"values\"}"))?;
    let start = Instant::now();
    // Validate every point before computing any.
    let prepared: Vec<_> = axis
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut params = config.parameters.clone();
            params.insert(axis.name.clone(), v.clone());
            scenario::prepare(config.scenario, &params).map_err(|e| match e {
                CliError::ConfigInvalid { path, message } => CliError::ConfigInvalid {
                    path,
                    message: format!("{message} (axis.values[{i}])"),
                },
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    let columns = match &axis.columns {
        Some(names) => scenario::named_columns(names),
        None => scenario::default_columns(config.scenario, &axis.name),
    };
    let outputs: Vec<ScenarioOutput> = prepared
        .par_iter()
        .map(|p| scenario::execute(p, config.seed))
        .collect::<Result<_>>()?;

    let mut artifacts = Vec::new();
    let mut invariants = Vec::new();
    for (i, out) in outputs.iter().enumerate() {
        let prefix = point_dir(i, outputs.len());
        artifacts.extend(write_all(dir, &prefix, &render(out, config.precision))?);
        invariants.extend(out.invariants.iter().map(|inv| Invariant {
            name: format!("{prefix}/{}", inv.name),
            ..inv.clone()
        }));
    }
    let table = aggregate(axis, &columns, &outputs);
    artifacts.extend(write_all(dir, "", &[(AGGREGATE.to_string(), render_csv(&table, config.precision))])?);
    let mut summary = Map::new();
    summary.insert("points".into(), json!(outputs.len()));
    let manifest = ResultManifest {
        config: config.clone(),
        artifacts,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        library_version: library_version(),
        invariants,
        summary,
    };
    finish(&manifest, dir)?;
    Ok(manifest)
}
