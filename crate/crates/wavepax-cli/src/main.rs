//! `wavepax` command-line front end.
//!
//! Exit codes: `0` all checks passed, `1` a threshold check failed, `2` a
//! hypothesis was violated, `3` any other error.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use wavepax::harness::{self, AnalysisConfig, ExperimentKind, RunConfig};
use wavepax::WavepaxError;

#[derive(Parser)]
#[command(
    name = "wavepax",
    version,
    about = "Modal analysis and simulation of particle-like wavepackets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resonance analysis of nk-spectra.
    Resonance {
        #[command(subcommand)]
        command: ResonanceCommand,
    },
    /// Solve the evolution equation for one configuration and write snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment over the (beta, rho) sweep of a configuration.
    Experiment {
        kind: Kind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of worker threads (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Run even when a hypothesis is violated.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Subcommand)]
enum ResonanceCommand {
    /// Classify a spectrum; prints the JSON report followed by a table.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Also run a genericity probe with this many perturbed spectra.
        #[arg(long)]
        probe: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Preservation,
    Superposition,
    Positions,
    Soliton,
    Averaging,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Preservation => ExperimentKind::Preservation,
            Kind::Superposition => ExperimentKind::Superposition,
            Kind::Positions => ExperimentKind::Positions,
            Kind::Soliton => ExperimentKind::Soliton,
            Kind::Averaging => ExperimentKind::Averaging,
        }
    }
}

/// Runs the command; `Ok(false)` means a threshold check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Resonance {
            command: ResonanceCommand::Analyze { config, probe },
        } => {
            let cfg = AnalysisConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let out = harness::analyze(&cfg, probe)?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            println!();
            print!("{}", out.report.table());
            if let Some(p) = &out.probe {
                println!(
                    "genericity probe: {}/{} universally invariant ({} failed)",
                    p.universal, p.trials, p.failures
                );
            }
            Ok(true)
        }
        Command::Simulate { config, out } => {
            let cfg = RunConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let summary = harness::simulate(&cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Experiment {
            kind,
            config,
            out,
            seed,
            workers,
            force,
        } => {
            let mut cfg = RunConfig::load(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let result = harness::sweep(kind.into(), &cfg, force)?;
            result.write(&out)?;
            for c in result.hypotheses.iter().chain(&result.checks) {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            for r in result.runs.iter().filter(|r| r.error.is_some()) {
                println!(
                    "ERROR run {} (beta = {}, rho = {}): {}",
                    r.index,
                    r.beta,
                    r.rho,
                    r.error.as_deref().unwrap_or("")
                );
            }
            println!(
                "{}: {}",
                result.experiment,
                if result.passed { "passed" } else { "failed" }
            );
            Ok(result.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<WavepaxError>() {
                Some(WavepaxError::HypothesisViolated(_)) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
