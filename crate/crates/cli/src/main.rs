//! Command-line entry point: runs the verification suites and writes the
//! manifest, per-suite CSVs, and the stability-sweep summary.

use clap::{Parser, Subcommand};
use conelab_core::harness::config::RunConfig;
use conelab_core::harness::manifest::RowStatus;
use conelab_core::harness::suites::run_experiment;
use conelab_core::Error;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "conelab",
    version,
    about = "Numerical laboratory for self-similar blowup of the 5D radial energy-critical wave equation"
)]
struct Cli {
    #[command(subcommand)]
    suite: Suite,

    /// Configuration file (flat key = value with one [section] per suite)
    #[arg(long, global = true)]
    config: Option<String>,

    /// Collocation grid order (acceptance runs double it for convergence)
    #[arg(long, global = true)]
    grid_order: Option<usize>,

    /// Output directory for manifest.json and the per-suite CSVs
    #[arg(long, global = true)]
    out: Option<String>,

    /// Seed of the counter-based random generator
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = library default)
    #[arg(long, global = true)]
    parallelism: Option<usize>,
}

#[derive(Subcommand)]
enum Suite {
    /// Argument-principle scan of the connection coefficient
    SpectrumScan,
    /// Wronskian/w0, connection formula, phi0 representations, resolvent vs BVP
    GreenVerify,
    /// Eigenpair, Laplace inversion vs stepping, energy bounds, norm machinery
    SemigroupVerify,
    /// Oscillatory kernel norms against the reference bound
    KernelBounds,
    /// Oscillatory-integral decay catalog
    OscCheck,
    /// Blowup-time tuning and the space-time stability diagnostic
    StabilitySweep {
        /// Comma-separated perturbation amplitudes
        #[arg(long)]
        delta: Option<String>,
    },
    /// Every suite in order
    All,
}

fn run() -> Result<i32, Error> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(order) = cli.grid_order {
        cfg.grid_order = order;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(par) = cli.parallelism {
        cfg.parallelism = par;
    }
    cfg.suites = vec![match &cli.suite {
        Suite::SpectrumScan => "spectrum-scan".to_string(),
        Suite::GreenVerify => "green-verify".to_string(),
        Suite::SemigroupVerify => "semigroup-verify".to_string(),
        Suite::KernelBounds => "kernel-bounds".to_string(),
        Suite::OscCheck => "osc-check".to_string(),
        Suite::StabilitySweep { delta } => {
            if let Some(d) = delta {
                cfg.sections
                    .entry("stability-sweep".to_string())
                    .or_default()
                    .insert("delta".to_string(), d.clone());
            }
            "stability-sweep".to_string()
        }
        Suite::All => "all".to_string(),
    }];
    if cfg.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    let manifest = run_experiment(&cfg)?;
    let mut failed = 0usize;
    for row in &manifest.rows {
        let tag = match row.status {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => {
                failed += 1;
                "FAIL"
            }
            RowStatus::Info => "info",
        };
        println!("[{tag}] {:<42} measured {:>12.5e}  ({})", row.id, row.measured, row.target);
    }
    println!(
        "{} checks, {} failed; reports in {}/",
        manifest.rows.len(),
        failed,
        cfg.out_dir
    );
    Ok(if failed > 0 { 1 } else { 0 })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e @ (Error::Config(_) | Error::Io { .. })) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
