use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quenchlab::error::{CliError, Result};
use quenchlab::{check, load_config, runner};

#[derive(Parser)]
#[command(name = "quenchlab", version, about = "Work statistics of sudden quantum quenches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts and manifest.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; falls back to QUENCHLAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a scenario once per value of its sweep axis, plus aggregate.csv.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the built-in invariant suite.
    Check {
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(k) => Some(k),
        None => match std::env::var("QUENCHLAB_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                CliError::config("QUENCHLAB_THREADS", format!("expected a positive integer, got {s:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(k) = threads {
        if k == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}

fn report(manifest: &runner::ResultManifest, dir: &std::path::Path) -> Result<()> {
    println!(
        "wrote {} artifacts to {} in {:.2}s",
        manifest.artifacts.len(),
        dir.display(),
        manifest.wall_time_seconds
    );
    for inv in &manifest.invariants {
        println!(
            "{} {} (value {:.3e}, tolerance {:.1e})",
            if inv.passed { "PASS" } else { "FAIL" },
            inv.name,
            inv.value,
            inv.tolerance
        );
    }
    if manifest.all_passed() {
        Ok(())
    } else {
        Err(CliError::InvariantFailure(manifest.failed().join(", ")))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, threads } => {
            configure_threads(threads)?;
            let cfg = load_config(&config)?;
            let dir = runner::output_dir(&cfg, out.as_deref())?;
            let m = runner::run_scenario(&cfg, &dir)?;
            report(&m, &dir)
        }
        Command::Sweep { config, out, threads } => {
            configure_threads(threads)?;
            let cfg = load_config(&config)?;
            let dir = runner::output_dir(&cfg, out.as_deref())?;
            let m = runner::sweep(&cfg, &dir)?;
            report(&m, &dir)
        }
        Command::Check { threads } => {
            configure_threads(threads)?;
            let results = check::run_checks();
            for r in &results {
                println!(
                    "{} {} ({:.2}s): {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.seconds,
                    r.detail
                );
            }
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::InvariantFailure(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
