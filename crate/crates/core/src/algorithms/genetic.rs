use crate::moo::{binary_tournament, failure_first_survival, polynomial_mutation, sbx_crossover, GeneticConfig, RankedPopulation};
use crate::problem::{Archive, SearchProblem};
use crate::rng::Rng;

/// Runs up to `generations` NSGA-II generations from `population`.
///
/// Each generation breeds `n` children by binary tournament, SBX and
/// polynomial mutation inside `problem.domain()`, evaluates them into the
/// archive, and keeps the best `n` of parents and children by
/// failure-first survival. Stops early when the budget runs out. Returns
/// the number of evaluations performed.
pub fn evolve(
    archive: &mut Archive,
    problem: &SearchProblem,
    mut population: RankedPopulation,
    n: usize,
    generations: usize,
    genetic: &GeneticConfig,
    rng: &mut Rng,
) -> usize {
    let domain = problem.domain();
    let start = archive.len();
    for _ in 0..generations {
        if archive.is_exhausted() || population.is_empty() {
            break;
        }
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = binary_tournament(&population, rng);
            let b = binary_tournament(&population, rng);
            let (c1, c2) = sbx_crossover(
                population.members[a].input(),
                population.members[b].input(),
                genetic,
                domain,
                rng,
            );
            children.push(polynomial_mutation(&c1, genetic, domain, rng));
            if children.len() < n {
                children.push(polynomial_mutation(&c2, genetic, domain, rng));
            }
        }
        let offspring = archive.evaluate(children, problem).to_vec();
        let mut combined = population.members;
        combined.extend(offspring);
        population = failure_first_survival(&combined, n, problem.senses());
    }
    archive.len() - start
}
