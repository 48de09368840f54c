//! Configuration-driven runner for the `quenchlab-core` scenarios.
//!
//! A run config names a scenario and its parameters; the runner writes CSV
//! and JSON artifacts plus a `manifest.json` listing each file with its
//! SHA-256, the config echo, wall time and the invariant checks.

pub mod check;
pub mod config;
pub mod emit;
pub mod error;
pub mod runner;
pub mod scenario;

pub use config::{load_config, parse_config, RunConfig, Scenario, SweepAxis};
pub use error::{CliError, Result};
pub use runner::{run_scenario, sweep, ResultManifest};
