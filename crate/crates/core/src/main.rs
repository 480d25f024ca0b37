use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gexcursion::cli::{apply_overrides, run, Experiment, ExperimentConfig};

/// Excursion asymptotics of Gaussian fields with product-form variance loss.
#[derive(Parser, Debug)]
#[command(name = "gexcursion", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.workers` (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `run.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::FAILURE;
            }
        },
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, args.seed, args.workers, args.out.as_deref());
    match run(args.experiment, &cfg) {
        Ok(summary) => {
            for line in &summary.table {
                println!("{line}");
            }
            println!("wrote {} to {}", summary.files.join(", "), summary.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
