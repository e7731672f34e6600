//! Experiment runner: executes the algorithm x seed matrix, writes one
//! directory per cell and aggregates quality reports and statistics.
//!
//! Layout under the output directory:
//!
//! ```text
//! experiment.toml            copy of the experiment file
//! <alg>/<seed>/archive.csv   every evaluated test
//! <alg>/<seed>/metadata.json configuration and per-iteration log
//! <alg>/<seed>/svm_model.json | tree.txt
//! reference_front.csv
//! report.csv
//! stats.json
//! ```

mod config;
mod stats;

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    default_resolution, validate_config, ConfigDiagnostics, ExperimentConfig, ExternalProblemConfig,
    IndicatorOverrides, ResolvedSut, SutConfig,
};
pub use stats::{compute_stats, Comparison, ExperimentStats, IndicatorStats, INDICATORS};

use crate::algorithms::{self, AlgoConfig, Algorithm, IterationLog, RunResult};
use crate::error::{Error, Result};
use crate::indicators::{checkpoint_rows, non_dominated_indices, read_report_csv, write_report_csv, ReportRow};
use crate::problem::{to_minimization, Archive, SearchProblem};
use crate::rng::RngSeed;
use crate::suts::compute_ground_truth;

pub const EXPERIMENT_FILE: &str = "experiment.toml";
pub const REPORT_FILE: &str = "report.csv";
pub const STATS_FILE: &str = "stats.json";
pub const REFERENCE_FRONT_FILE: &str = "reference_front.csv";

#[derive(Serialize)]
struct Metadata<'a> {
    algorithm: Algorithm,
    seed: u64,
    sut: &'a str,
    oracle: String,
    config: &'a AlgoConfig,
    evaluations: usize,
    failing: usize,
    iterations: &'a [IterationLog],
}

/// A matrix cell that did not complete.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub algorithm: Algorithm,
    pub seed: RngSeed,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub completed: usize,
    pub failures: Vec<CellFailure>,
    pub report: Vec<ReportRow>,
    pub stats: ExperimentStats,
}

impl ExperimentOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn cell_dir(out: &Path, algorithm: Algorithm, seed: RngSeed) -> PathBuf {
    out.join(algorithm.name()).join(seed.0.to_string())
}

fn write_cell(dir: &Path, problem: &SearchProblem, cfg: &AlgoConfig, run: &RunResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.archive.write_csv(BufWriter::new(fs::File::create(dir.join("archive.csv"))?))?;
    let meta = Metadata {
        algorithm: run.algorithm,
        seed: cfg.seed.0,
        sut: problem.name(),
        oracle: problem.oracle().to_string(),
        config: cfg,
        evaluations: run.archive.len(),
        failing: run.archive.failing().count(),
        iterations: &run.log,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(dir.join("metadata.json"), text)?;
    if let Some(model) = &run.model {
        model.write_json(BufWriter::new(fs::File::create(dir.join("svm_model.json"))?))?;
    }
    if let Some(tree) = &run.tree {
        fs::write(dir.join("tree.txt"), tree.to_string())?;
    }
    Ok(())
}

/// Runs one matrix cell and writes its directory.
pub fn run_cell(problem: &SearchProblem, algorithm: Algorithm, cfg: &AlgoConfig, out: &Path) -> Result<RunResult> {
    let run = algorithms::run(algorithm, problem, cfg)?;
    write_cell(&cell_dir(out, algorithm, cfg.seed), problem, cfg, &run)?;
    Ok(run)
}

fn thread_pool(parallelism: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Runs the whole matrix and aggregates the results.
///
/// `source` is the experiment file text, copied verbatim into the output
/// directory so `report` and `stats` can be recomputed later. Failed cells
/// are logged and listed in the outcome; the rest of the matrix still runs.
pub fn run_experiment(cfg: &ExperimentConfig, source: &str, out: &Path) -> Result<ExperimentOutcome> {
    fs::create_dir_all(out)?;
    fs::write(out.join(EXPERIMENT_FILE), source)?;
    let problem = cfg.sut.problem();
    let cells: Vec<(Algorithm, RngSeed)> = cfg
        .algorithms
        .iter()
        .flat_map(|(a, _)| cfg.seeds.iter().map(move |s| (*a, *s)))
        .collect();

    let pool = thread_pool(cfg.parallelism)?;
    let results: Vec<(Algorithm, RngSeed, Result<Archive>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, seed)| {
                log::info!("running {a} seed {}", seed.0);
                let r = run_cell(&problem, a, &cfg.cell_config(a, seed), out).map(|run| run.archive);
                (a, seed, r)
            })
            .collect()
    });

    let mut archives = Vec::new();
    let mut failures = Vec::new();
    for (algorithm, seed, r) in results {
        match r {
            Ok(archive) => archives.push((algorithm, seed, archive)),
            Err(e) => {
                log::error!("{algorithm} seed {} failed: {e}", seed.0);
                failures.push(CellFailure {
                    algorithm,
                    seed,
                    message: e.to_string(),
                });
            }
        }
    }
    let (report, stats) = pool.install(|| aggregate(cfg, &problem, &archives, out))?;
    Ok(ExperimentOutcome {
        output_dir: out.to_path_buf(),
        completed: archives.len(),
        failures,
        report,
        stats,
    })
}

/// Reference Pareto front in raw units: dense-grid truth for synthetic
/// SUTs, otherwise the non-dominated failing tests of all runs.
pub fn reference_front(cfg: &ExperimentConfig, problem: &SearchProblem, archives: &[&Archive]) -> Result<Vec<Vec<f64>>> {
    if cfg.sut.synthetic().is_some() {
        let truth = compute_ground_truth(problem, &cfg.ground_truth_resolution)?;
        return Ok(truth.reference_front.into_iter().map(|f| f.values().to_vec()).collect());
    }
    let failing: Vec<Vec<f64>> = archives
        .iter()
        .flat_map(|a| a.failing().map(|t| t.fitness().values().to_vec()))
        .collect();
    let normalized: Vec<Vec<f64>> = failing.iter().map(|f| to_minimization(f, problem.senses())).collect();
    Ok(non_dominated_indices(&normalized)
        .into_iter()
        .map(|i| failing[i].clone())
        .collect())
}

fn write_front(path: &Path, front: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if let Some(first) = front.first() {
        w.write_record((1..=first.len()).map(|i| format!("f_{i}")))?;
    }
    for f in front {
        w.write_record(f.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn aggregate(
    cfg: &ExperimentConfig,
    problem: &SearchProblem,
    archives: &[(Algorithm, RngSeed, Archive)],
    out: &Path,
) -> Result<(Vec<ReportRow>, ExperimentStats)> {
    let views: Vec<&Archive> = archives.iter().map(|(_, _, a)| a).collect();
    let front = reference_front(cfg, problem, &views)?;
    write_front(&out.join(REFERENCE_FRONT_FILE), &front)?;

    let per_run: Vec<Vec<ReportRow>> = archives
        .par_iter()
        .map(|(a, seed, archive)| {
            let rows = checkpoint_rows(archive.tests(), problem.senses(), &front, &cfg.indicators)?;
            Ok(rows.into_iter().map(|s| ReportRow::new(a.name(), seed.0, s)).collect())
        })
        .collect::<Result<_>>()?;
    let mut report: Vec<ReportRow> = per_run.into_iter().flatten().collect();
    let order = |name: &str| cfg.algorithms.iter().position(|(a, _)| a.name() == name);
    report.sort_by(|x, y| {
        order(&x.algorithm)
            .cmp(&order(&y.algorithm))
            .then(x.seed.cmp(&y.seed))
            .then(x.evaluations.cmp(&y.evaluations))
    });
    write_report_csv(&report, BufWriter::new(fs::File::create(out.join(REPORT_FILE))?))?;

    let stats = write_stats(cfg, &report, out)?;
    Ok((report, stats))
}

fn write_stats(cfg: &ExperimentConfig, report: &[ReportRow], out: &Path) -> Result<ExperimentStats> {
    let names: Vec<&str> = cfg.algorithms.iter().map(|(a, _)| a.name()).collect();
    let stats = compute_stats(report, &names, cfg.budget());
    let mut text = serde_json::to_string_pretty(&stats)?;
    text.push('\n');
    fs::write(out.join(STATS_FILE), text)?;
    Ok(stats)
}

fn load_experiment(out: &Path) -> Result<(ExperimentConfig, String)> {
    let path = out.join(EXPERIMENT_FILE);
    let source = fs::read_to_string(&path)?;
    let cfg = validate_config(&source).map_err(|d| Error::Malformed {
        path: path.display().to_string(),
        reason: d.to_string(),
    })?;
    Ok((cfg, source))
}

/// Recomputes the reference front, report and statistics from the archives
/// of a finished experiment directory. Missing cells are skipped.
pub fn report(out: &Path) -> Result<(Vec<ReportRow>, ExperimentStats)> {
    let (cfg, _) = load_experiment(out)?;
    let problem = cfg.sut.problem();
    let mut archives = Vec::new();
    for (a, acfg) in &cfg.algorithms {
        for &seed in &cfg.seeds {
            let path = cell_dir(out, *a, seed).join("archive.csv");
            if !path.exists() {
                log::warn!("{} is missing; skipped", path.display());
                continue;
            }
            let archive = Archive::read_csv(
                fs::File::open(&path)?,
                problem.domain().dimension(),
                problem.oracle(),
                acfg.evaluation_budget,
            )
            .map_err(|e| Error::Malformed {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            archives.push((*a, seed, archive));
        }
    }
    aggregate(&cfg, &problem, &archives, out)
}

/// Recomputes the statistics file from an existing report.
pub fn stats(out: &Path) -> Result<ExperimentStats> {
    let (cfg, _) = load_experiment(out)?;
    let report = read_report_csv(fs::File::open(out.join(REPORT_FILE))?)?;
    write_stats(&cfg, &report, out)
}
