use super::{evolve, AlgoConfig, Algorithm, IterationLog, RunResult};
use crate::error::Result;
use crate::moo::failure_first_survival;
use crate::problem::{split_by_label, Archive, SearchProblem};
use crate::rng::Stream;
use crate::sampling::{latin_hypercube, rejection_sample, uniform, ATTEMPTS_PER_SAMPLE};
use crate::svm::{grid_search, SvmModel};

/// NSGA-II guided by an SVM model of the failing region.
///
/// Every outer iteration selects `n` parents failure-first from the whole
/// archive, runs `g` generations, retrains the SVM on every test so far
/// and evaluates `s` inputs drawn from the region the model predicts as
/// failing. Without both classes, or when rejection sampling comes up
/// short, the missing samples are drawn uniformly from the domain.
pub fn run_nsga2_svm(problem: &SearchProblem, cfg: &AlgoConfig) -> Result<RunResult> {
    let domain = problem.domain();
    let n = cfg.population_size;
    let mut init_rng = cfg.seed.stream(Stream::Init);
    let mut genetic_rng = cfg.seed.stream(Stream::Genetic);
    let mut sampling_rng = cfg.seed.stream(Stream::SvmSampling);
    let mut cv_rng = cfg.seed.stream(Stream::CrossValidation);

    let mut archive = Archive::new(cfg.evaluation_budget);
    archive.evaluate(latin_hypercube(domain, n, &mut init_rng), problem);

    let mut log = Vec::new();
    let mut model: Option<SvmModel> = None;
    let mut iteration = 0;
    while !archive.is_exhausted() {
        iteration += 1;
        let before = archive.len();
        let parents = failure_first_survival(archive.tests(), n, problem.senses());
        evolve(
            &mut archive,
            problem,
            parents,
            n,
            cfg.generations_per_iteration,
            &cfg.genetic,
            &mut genetic_rng,
        );

        let mut entry = IterationLog {
            iteration,
            archive_size: archive.len(),
            evaluations: 0,
            svm_params: None,
            region_empty_fallbacks: 0,
            degenerate: false,
            critical_leaves: None,
        };
        if !archive.is_exhausted() {
            let (failing, passing) = split_by_label(archive.tests());
            let samples = if failing.is_empty() || passing.is_empty() {
                log::debug!("iteration {iteration}: one class empty, sampling uniformly");
                entry.degenerate = true;
                uniform(domain, cfg.svm_samples, &mut sampling_rng)
            } else {
                let (points, labels) = crate::svm::to_dataset(&failing, &passing);
                let outcome = grid_search(&points, &labels, &cfg.grid, &cfg.smo, &mut cv_rng)?;
                entry.svm_params = Some(outcome.params);
                let mut drawn = rejection_sample(
                    &outcome.model,
                    domain,
                    cfg.svm_samples,
                    ATTEMPTS_PER_SAMPLE * cfg.svm_samples,
                    &mut sampling_rng,
                );
                let missing = cfg.svm_samples - drawn.accepted.len();
                if missing > 0 {
                    log::debug!("iteration {iteration}: predicted region yielded {} of {}", drawn.accepted.len(), cfg.svm_samples);
                    entry.region_empty_fallbacks = missing;
                    drawn.accepted.extend(uniform(domain, missing, &mut sampling_rng));
                }
                model = Some(outcome.model);
                drawn.accepted
            };
            archive.evaluate(samples, problem);
        }
        entry.archive_size = archive.len();
        entry.evaluations = archive.len() - before;
        log.push(entry);
    }

    Ok(RunResult {
        algorithm: Algorithm::Nsga2Svm,
        archive,
        log,
        model,
        tree: None,
    })
}
