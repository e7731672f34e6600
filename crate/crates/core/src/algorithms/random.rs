use super::{AlgoConfig, Algorithm, IterationLog, RunResult};
use crate::error::Result;
use crate::problem::{Archive, SearchProblem};
use crate::rng::Stream;
use crate::sampling::uniform;

/// Evaluates `evaluation_budget` uniform samples, one population-sized
/// batch per logged iteration.
pub fn run_random_search(problem: &SearchProblem, cfg: &AlgoConfig) -> Result<RunResult> {
    let mut rng = cfg.seed.stream(Stream::Init);
    let mut archive = Archive::new(cfg.evaluation_budget);
    let mut log = Vec::new();
    let batch = cfg.population_size.max(1);
    while !archive.is_exhausted() {
        let before = archive.len();
        let count = batch.min(archive.remaining());
        archive.evaluate(uniform(problem.domain(), count, &mut rng), problem);
        log.push(IterationLog {
            iteration: log.len() + 1,
            archive_size: archive.len(),
            evaluations: archive.len() - before,
            svm_params: None,
            region_empty_fallbacks: 0,
            degenerate: false,
            critical_leaves: None,
        });
    }
    Ok(RunResult {
        algorithm: Algorithm::RandomSearch,
        archive,
        log,
        model: None,
        tree: None,
    })
}
