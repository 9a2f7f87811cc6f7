use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use toplab::experiments::{self, Check, ExperimentConfig, ExperimentKind};

/// Worker threads for sweeps and grid solves; defaults to the core count.
const WORKERS_VAR: &str = "LAB_WORKERS";

#[derive(Parser)]
#[command(name = "lab", version, about = "Batch runner for the toplab experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Write into this directory instead of the config's `output_dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List experiment names with the criteria each one decides.
    ListExperiments,
    /// Recompute pass/fail from a run directory's stored data.
    Verify { run_dir: PathBuf },
}

fn init_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{WORKERS_VAR} must be a positive integer, got `{raw}`"))?;
    anyhow::ensure!(n > 0, "{WORKERS_VAR} must be positive");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        let tag = c.criterion.map_or_else(|| "  ".to_string(), |n| format!("C{n}"));
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {tag} {}: {}", c.name, c.detail);
    }
}

fn run(config: PathBuf, output_dir: Option<PathBuf>, seed: Option<u64>) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    eprintln!("running {} (seed {:#x}) into {}", cfg.experiment, cfg.seed, cfg.output_dir.display());
    let summary = experiments::run(&cfg)?;
    print_checks(&summary.checks);
    println!(
        "{}: {} in {:.1} s, summary at {}",
        summary.experiment,
        if summary.passed { "passed" } else { "FAILED" },
        summary.elapsed_seconds,
        cfg.output_dir.join("summary.json").display()
    );
    Ok(summary.passed)
}

fn verify(run_dir: PathBuf) -> Result<bool> {
    let v = experiments::verify(&run_dir).with_context(|| format!("verifying {}", run_dir.display()))?;
    print_checks(&v.checks);
    if !v.matches_stored {
        println!("note: stored summary disagrees with the recomputed checks");
    }
    println!("{}: {}", v.experiment, if v.passed { "passed" } else { "FAILED" });
    Ok(v.passed && v.matches_stored)
}

fn list() {
    for k in ExperimentKind::ALL {
        let criteria: Vec<String> = k.criteria().iter().map(|c| format!("C{c}")).collect();
        let criteria = if criteria.is_empty() { "-".to_string() } else { criteria.join(",") };
        println!("{:<16} {:<4} {}", k.name(), criteria, k.description());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|()| match cli.command {
        Command::Run {
            config,
            output_dir,
            seed,
        } => run(config, output_dir, seed),
        Command::ListExperiments => {
            list();
            Ok(true)
        }
        Command::Verify { run_dir } => verify(run_dir),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
