use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use svmguide::harness::{self, ExperimentStats};

/// Overrides the experiment's output directory.
const OUT_ENV: &str = "SVMGUIDE_OUT";

const EXIT_PARTIAL: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "svmguide", version, about = "SVM-guided search-based testing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the algorithm x seed matrix described by an experiment file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the file and the SVMGUIDE_OUT variable).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of matrix cells run concurrently (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recompute the report and statistics from the archives in an output directory.
    Report { out_dir: PathBuf },
    /// Recompute the statistics from an output directory's report.
    Stats { out_dir: PathBuf },
    /// Check an experiment file without running anything.
    Validate { config: PathBuf },
}

fn print_stats(stats: &ExperimentStats) {
    println!("indicator values at {} evaluations", stats.checkpoint);
    println!("{:<10} {:<9} {:>5} {:>12} {:>12} {:>12}", "algorithm", "indicator", "n", "mean", "std", "median");
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.5}"));
    for s in &stats.summaries {
        println!(
            "{:<10} {:<9} {:>5} {:>12} {:>12} {:>12}",
            s.algorithm,
            s.indicator,
            s.present,
            fmt(s.mean),
            fmt(s.std_dev),
            fmt(s.median)
        );
    }
    println!();
    println!("{:<9} {:<22} {:>5} {:>10} {:>7} {:<10}", "indicator", "pair", "pairs", "p", "A12", "effect");
    for c in &stats.comparisons {
        println!(
            "{:<9} {:<22} {:>5} {:>10.4} {:>7} {:<10}",
            c.indicator,
            format!("{} vs {}", c.a, c.b),
            c.pairs,
            c.p_value,
            c.a12.map_or_else(|| "-".to_string(), |a| format!("{a:.3}")),
            c.magnitude.map_or_else(|| "-".to_string(), |m| format!("{m:?}").to_lowercase())
        );
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { config } => {
            let text = read_config(&config)?;
            match harness::validate_config(&text) {
                Ok(cfg) => {
                    let names: Vec<&str> = cfg.algorithms.iter().map(|(a, _)| a.name()).collect();
                    println!(
                        "{}: ok ({} x {} seeds, budget {})",
                        config.display(),
                        names.join(", "),
                        cfg.seeds.len(),
                        cfg.budget()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(diags) => {
                    for d in &diags.0 {
                        eprintln!("{}: {d}", config.display());
                    }
                    Ok(ExitCode::from(EXIT_INVALID_CONFIG))
                }
            }
        }
        Command::Run { config, out, jobs } => {
            let text = read_config(&config)?;
            let mut cfg = match harness::validate_config(&text) {
                Ok(cfg) => cfg,
                Err(diags) => {
                    for d in &diags.0 {
                        eprintln!("{}: {d}", config.display());
                    }
                    return Ok(ExitCode::from(EXIT_INVALID_CONFIG));
                }
            };
            if jobs == Some(0) {
                eprintln!("--jobs must be at least 1");
                return Ok(ExitCode::from(EXIT_INVALID_CONFIG));
            }
            if jobs.is_some() {
                cfg.parallelism = jobs;
            }
            let out_dir = out
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .unwrap_or_else(|| cfg.output_dir.clone());
            let outcome = harness::run_experiment(&cfg, &text, &out_dir)?;
            print_stats(&outcome.stats);
            println!();
            println!("{} runs written to {}", outcome.completed, out_dir.display());
            if outcome.is_complete() {
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &outcome.failures {
                    eprintln!("failed: {} seed {}: {}", f.algorithm, f.seed.0, f.message);
                }
                Ok(ExitCode::from(EXIT_PARTIAL))
            }
        }
        Command::Report { out_dir } => {
            let (rows, stats) = harness::report(&out_dir)?;
            println!("{} report rows written to {}", rows.len(), out_dir.join(harness::REPORT_FILE).display());
            print_stats(&stats);
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { out_dir } => {
            let stats = harness::stats(&out_dir)?;
            print_stats(&stats);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
