use super::{evolve, AlgoConfig, Algorithm, IterationLog, RunResult};
use crate::dtree::{critical_leaves, fit_tests, TreeNode};
use crate::error::Result;
use crate::moo::failure_first_survival;
use crate::problem::{Archive, EvaluatedTest, SearchProblem};
use crate::rng::Stream;
use crate::sampling::{latin_hypercube, uniform};

/// NSGA-II restarted inside the failure-revealing leaves of a decision tree.
///
/// Each iteration fits a tree on the whole archive. Every critical leaf
/// seeds a population with its failing tests (the best `n` by
/// failure-first survival, or padded to `n` with evaluated uniform samples
/// from the leaf box) and runs `g` generations confined to that box. With
/// no critical leaf, one unconstrained round runs from the whole archive.
pub fn run_nsga2_dt(problem: &SearchProblem, cfg: &AlgoConfig) -> Result<RunResult> {
    let domain = problem.domain();
    let n = cfg.population_size;
    let senses = problem.senses();
    let mut init_rng = cfg.seed.stream(Stream::Init);
    let mut genetic_rng = cfg.seed.stream(Stream::Genetic);
    let mut tree_rng = cfg.seed.stream(Stream::Tree);

    let mut archive = Archive::new(cfg.evaluation_budget);
    archive.evaluate(latin_hypercube(domain, n, &mut init_rng), problem);

    let mut log = Vec::new();
    let mut last_tree: Option<TreeNode> = None;
    let mut iteration = 0;
    while !archive.is_exhausted() {
        iteration += 1;
        let before = archive.len();
        let tree = fit_tests(archive.tests(), &cfg.dt, domain)?;
        let leaves = tree.leaves();
        let critical: Vec<usize> = {
            let crit = critical_leaves(&tree, &cfg.dt);
            leaves
                .iter()
                .enumerate()
                .filter(|(_, l)| crit.iter().any(|c| std::ptr::eq(*c, **l)))
                .map(|(i, _)| i)
                .collect()
        };

        if critical.is_empty() {
            let parents = failure_first_survival(archive.tests(), n, senses);
            evolve(
                &mut archive,
                problem,
                parents,
                n,
                cfg.generations_per_iteration,
                &cfg.genetic,
                &mut genetic_rng,
            );
        } else {
            // leaf membership is fixed by the tree fitted at the start of the iteration
            let mut seeds: Vec<Vec<EvaluatedTest>> = vec![Vec::new(); leaves.len()];
            for t in archive.tests().iter().filter(|t| t.is_failing()) {
                seeds[tree.leaf_index(t.input())].push(t.clone());
            }
            for &leaf in &critical {
                if archive.is_exhausted() {
                    break;
                }
                let region = leaves[leaf].region.clone();
                let sub = problem.with_domain(region.clone())?;
                let mut members = std::mem::take(&mut seeds[leaf]);
                if members.len() < n {
                    let pad = uniform(&region, n - members.len(), &mut tree_rng);
                    members.extend_from_slice(archive.evaluate(pad, &sub));
                }
                let population = failure_first_survival(&members, n, senses);
                evolve(
                    &mut archive,
                    &sub,
                    population,
                    n,
                    cfg.generations_per_iteration,
                    &cfg.genetic,
                    &mut genetic_rng,
                );
            }
        }

        log.push(IterationLog {
            iteration,
            archive_size: archive.len(),
            evaluations: archive.len() - before,
            svm_params: None,
            region_empty_fallbacks: 0,
            degenerate: false,
            critical_leaves: Some(critical.len()),
        });
        last_tree = Some(tree);
    }

    Ok(RunResult {
        algorithm: Algorithm::Nsga2Dt,
        archive,
        log,
        model: None,
        tree: last_tree,
    })
}
