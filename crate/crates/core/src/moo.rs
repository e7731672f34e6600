//! Dominance machinery and genetic operators.
//!
//! Objective vectors handed to the functions in this module are expected in
//! minimization form (see [`crate::problem::to_minimization`]); the
//! `EvaluatedTest`-level helpers take the problem's senses and normalize
//! themselves.

use std::cmp::Ordering;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::problem::{to_minimization, EvaluatedTest, SearchDomain, Sense, TestInput};
use crate::rng::Rng;

/// `a` dominates `b` under minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Dominance between raw fitness vectors with per-objective senses.
pub fn dominates_with_senses(a: &[f64], b: &[f64], senses: &[Sense]) -> bool {
    dominates(&to_minimization(a, senses), &to_minimization(b, senses))
}

/// Fast non-dominated sort. Returns the fronts as index lists, front 0 first.
pub fn pareto_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Rank (front index) of every point.
pub fn pareto_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let mut ranks = vec![0; points.len()];
    for (r, front) in pareto_fronts(points).iter().enumerate() {
        for &i in front {
            ranks[i] = r;
        }
    }
    ranks
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Crowding distance of each point of one front. Extremes per objective get
/// `+inf`; a front of two or fewer points is all `+inf`.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| {
            front[a][k]
                .total_cmp(&front[b][k])
                .then_with(|| lexicographic(&front[a], &front[b]))
        });
        let (lo, hi) = (front[order[0]][k], front[order[n - 1]][k]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if distance[i].is_finite() {
                distance[i] += (front[order[w + 1]][k] - front[order[w - 1]][k]) / range;
            }
        }
    }
    distance
}

/// Members with their Pareto rank and crowding distance.
#[derive(Clone, Debug, Default)]
pub struct RankedPopulation {
    pub members: Vec<EvaluatedTest>,
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
}

impl RankedPopulation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Ranks and crowding distances for a set of minimization vectors.
fn rank_and_crowd(points: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in pareto_fronts(points).into_iter().enumerate() {
        let pts: Vec<Vec<f64>> = front.iter().map(|&i| points[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd)
}

pub fn non_dominated_sort(tests: &[EvaluatedTest], senses: &[Sense]) -> RankedPopulation {
    let points: Vec<Vec<f64>> = tests.iter().map(|t| to_minimization(t.fitness(), senses)).collect();
    let (rank, crowding) = rank_and_crowd(&points);
    RankedPopulation {
        members: tests.to_vec(),
        rank,
        crowding,
    }
}

/// Survival with label precedence: failing before passing, then ascending
/// Pareto rank (computed within each label class), then descending crowding
/// distance. Remaining ties are broken by the objective vector so the
/// selected multiset does not depend on input order.
///
/// The returned ranks are offset for passing members so that, in a binary
/// tournament, any failing member beats any passing one.
pub fn failure_first_survival(candidates: &[EvaluatedTest], n: usize, senses: &[Sense]) -> RankedPopulation {
    let mut keyed: Vec<(usize, f64, Vec<f64>, &EvaluatedTest)> = Vec::with_capacity(candidates.len());
    let mut rank_offset = 0;
    for failing in [true, false] {
        let class: Vec<&EvaluatedTest> = candidates.iter().filter(|t| t.is_failing() == failing).collect();
        if class.is_empty() {
            continue;
        }
        let points: Vec<Vec<f64>> = class.iter().map(|t| to_minimization(t.fitness(), senses)).collect();
        let (rank, crowd) = rank_and_crowd(&points);
        let start = keyed.len();
        let fronts = rank.iter().max().map_or(0, |r| r + 1);
        for (((t, r), c), p) in class.into_iter().zip(rank).zip(crowd).zip(points) {
            keyed.push((r + rank_offset, c, p, t));
        }
        keyed[start..].sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| b.1.total_cmp(&a.1))
                .then_with(|| lexicographic(&a.2, &b.2))
        });
        rank_offset += fronts;
    }
    keyed.truncate(n);
    let mut out = RankedPopulation::default();
    for (r, c, _, t) in keyed {
        out.members.push(t.clone());
        out.rank.push(r);
        out.crowding.push(c);
    }
    out
}

/// Binary tournament: two uniform draws, lower rank wins, then higher
/// crowding distance, then the first draw. Returns the winner's index.
pub fn binary_tournament(pop: &RankedPopulation, rng: &mut Rng) -> usize {
    assert!(!pop.is_empty(), "tournament on an empty population");
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    match pop.rank[a].cmp(&pop.rank[b]) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal if pop.crowding[b] > pop.crowding[a] => b,
        Ordering::Equal => a,
    }
}

/// Variation operator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneticConfig {
    pub crossover_probability: f64,
    pub crossover_eta: f64,
    /// Per-variable mutation probability; `None` means `1 / dimension`.
    pub mutation_probability: Option<f64>,
    pub mutation_eta: f64,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        Self {
            crossover_probability: 0.9,
            crossover_eta: 20.0,
            mutation_probability: None,
            mutation_eta: 20.0,
        }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1] (got {p})"))
            }
        };
        unit("crossover_probability", self.crossover_probability)?;
        if let Some(p) = self.mutation_probability {
            unit("mutation_probability", p)?;
        }
        for (name, eta) in [("crossover_eta", self.crossover_eta), ("mutation_eta", self.mutation_eta)] {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(format!("{name} must be positive (got {eta})"));
            }
        }
        Ok(())
    }

    pub fn mutation_probability_for(&self, dimension: usize) -> f64 {
        self.mutation_probability.unwrap_or(1.0 / dimension as f64)
    }
}

/// Simulated binary crossover. Children are clamped to `domain`.
pub fn sbx_crossover(
    p1: &TestInput,
    p2: &TestInput,
    cfg: &GeneticConfig,
    domain: &SearchDomain,
    rng: &mut Rng,
) -> (TestInput, TestInput) {
    let mut c1 = p1.values().to_vec();
    let mut c2 = p2.values().to_vec();
    if rng.random::<f64>() < cfg.crossover_probability {
        let exponent = 1.0 / (cfg.crossover_eta + 1.0);
        for i in 0..c1.len() {
            if rng.random::<f64>() > 0.5 || (p1[i] - p2[i]).abs() <= 1e-14 {
                continue;
            }
            let u: f64 = rng.random();
            let beta = if u <= 0.5 {
                (2.0 * u).powf(exponent)
            } else {
                (1.0 / (2.0 * (1.0 - u))).powf(exponent)
            };
            c1[i] = 0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]);
            c2[i] = 0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]);
        }
    }
    (
        TestInput::new(c1, domain).expect("dimension matches domain"),
        TestInput::new(c2, domain).expect("dimension matches domain"),
    )
}

/// Polynomial mutation. Each coordinate is perturbed independently with
/// the configured probability; the result is clamped to `domain`.
pub fn polynomial_mutation(p: &TestInput, cfg: &GeneticConfig, domain: &SearchDomain, rng: &mut Rng) -> TestInput {
    let prob = cfg.mutation_probability_for(domain.dimension());
    let exponent = 1.0 / (cfg.mutation_eta + 1.0);
    let mut x = p.values().to_vec();
    for (i, v) in x.iter_mut().enumerate() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let u: f64 = rng.random();
        let delta = if u < 0.5 {
            (2.0 * u).powf(exponent) - 1.0
        } else {
            1.0 - (2.0 * (1.0 - u)).powf(exponent)
        };
        *v += delta * domain.width(i);
    }
    TestInput::new(x, domain).expect("dimension matches domain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Comparison, FitnessVector, Oracle, Threshold};
    use crate::rng::RngSeed;

    fn oracle() -> Oracle {
        Oracle::new(vec![Threshold { objective: 0, op: Comparison::Less, value: 0.0 }])
    }

    /// Minimization objectives; failing iff f1 < 0.
    fn test(i: usize, f: [f64; 2]) -> EvaluatedTest {
        let d = SearchDomain::unit(1).unwrap();
        EvaluatedTest::new(
            TestInput::new(vec![0.5], &d).unwrap(),
            FitnessVector::new(f.to_vec()).unwrap(),
            i,
            &oracle(),
        )
    }

    const MIN2: [Sense; 2] = [Sense::Minimize, Sense::Minimize];

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]));
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]));
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(dominates_with_senses(&[2.0, 2.0], &[1.0, 1.0], &[Sense::Maximize; 2]));
    }

    #[test]
    fn empty_and_incomparable_sorts() {
        assert!(non_dominated_sort(&[], &MIN2).is_empty());
        let pop = non_dominated_sort(&[test(0, [1.0, 3.0]), test(1, [2.0, 2.0]), test(2, [3.0, 1.0])], &MIN2);
        assert_eq!(pop.rank, vec![0, 0, 0]);
    }

    #[test]
    fn crowding_small_and_collinear() {
        assert!(crowding_distance(&[vec![0.0, 1.0], vec![1.0, 0.0]])
            .iter()
            .all(|d| d.is_infinite()));
        let d = crowding_distance(&[vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_range_objective_contributes_nothing() {
        let d = crowding_distance(&[vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0, 1.0], vec![3.0, 1.0]]);
        assert!((d[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn failing_member_comes_first() {
        let mut c: Vec<EvaluatedTest> = (0..5).map(|i| test(i, [i as f64, -(i as f64)])).collect();
        c.push(test(5, [-1.0, 100.0]));
        let out = failure_first_survival(&c, 3, &MIN2);
        assert_eq!(out.len(), 3);
        assert!(out.members[0].is_failing());
        assert!(out.members[1..].iter().all(|t| !t.is_failing()));
        assert!(out.rank[1] > out.rank[0]);
    }

    #[test]
    fn all_failing_front_keeps_most_crowded() {
        // points on f2 = -1 - f1 style line, all failing (f1 < 0)
        let c: Vec<EvaluatedTest> = [-10.0, -9.0, -8.5, -8.0, -5.0, -1.0]
            .iter()
            .enumerate()
            .map(|(i, &x)| test(i, [x, -x * 2.0 - 30.0]))
            .collect();
        let pts: Vec<Vec<f64>> = c.iter().map(|t| t.fitness().to_vec()).collect();
        let crowd = crowding_distance(&pts);
        let out = failure_first_survival(&c, 4, &MIN2);
        let mut expected: Vec<usize> = (0..c.len()).collect();
        expected.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]));
        let want: Vec<usize> = expected[..4].to_vec();
        let mut got: Vec<usize> = out.members.iter().map(|t| t.eval_index()).collect();
        got.sort_unstable();
        let mut want_sorted = want.clone();
        want_sorted.sort_unstable();
        assert_eq!(got, want_sorted);
    }

    #[test]
    fn tournament_rules() {
        let mut rng = RngSeed(1).rng();
        let single = non_dominated_sort(&[test(0, [0.0, 0.0])], &MIN2);
        for _ in 0..10 {
            assert_eq!(binary_tournament(&single, &mut rng), 0);
        }
        let pop = RankedPopulation {
            members: vec![test(0, [0.0, 0.0]), test(1, [1.0, 1.0])],
            rank: vec![0, 1],
            crowding: vec![1.0, 1.0],
        };
        // member 1 can only win when drawn twice (probability 1/4)
        let mut share = |pop: &RankedPopulation| {
            (0..4000).filter(|_| binary_tournament(pop, &mut rng) == 0).count() as f64 / 4000.0
        };
        assert!((share(&pop) - 0.75).abs() < 0.03);
        let pop = RankedPopulation {
            crowding: vec![3.0, 1.0],
            rank: vec![0, 0],
            ..pop
        };
        assert!((share(&pop) - 0.75).abs() < 0.03);
    }

    #[test]
    fn sbx_degenerate_cases() {
        let d = SearchDomain::unit(3).unwrap();
        let p1 = TestInput::new(vec![0.1, 0.2, 0.3], &d).unwrap();
        let p2 = TestInput::new(vec![0.9, 0.8, 0.7], &d).unwrap();
        let never = GeneticConfig {
            crossover_probability: 0.0,
            ..Default::default()
        };
        let mut rng = RngSeed(2).rng();
        let (c1, c2) = sbx_crossover(&p1, &p2, &never, &d, &mut rng);
        assert_eq!((c1, c2), (p1.clone(), p2.clone()));
        let always = GeneticConfig {
            crossover_probability: 1.0,
            ..Default::default()
        };
        for _ in 0..100 {
            let (c1, c2) = sbx_crossover(&p1, &p1, &always, &d, &mut rng);
            assert_eq!(c1, p1);
            assert_eq!(c2, p1);
        }
    }

    #[test]
    fn mutation_zero_probability_is_identity() {
        let d = SearchDomain::unit(3).unwrap();
        let p = TestInput::new(vec![0.1, 0.2, 0.3], &d).unwrap();
        let cfg = GeneticConfig {
            mutation_probability: Some(0.0),
            ..Default::default()
        };
        let mut rng = RngSeed(3).rng();
        assert_eq!(polynomial_mutation(&p, &cfg, &d, &mut rng), p);
    }

    #[test]
    fn config_validation() {
        assert!(GeneticConfig::default().validate().is_ok());
        let bad = GeneticConfig {
            crossover_eta: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GeneticConfig {
            mutation_probability: Some(1.5),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
