use rayon::prelude::*;
use svmguide::algorithms::{self, AlgoConfig, Algorithm, RunResult};
use svmguide::problem::{Archive, SearchProblem};
use svmguide::rng::{RngSeed, Stream};
use svmguide::sampling::latin_hypercube;
use svmguide::suts::{ball, SyntheticKind};

fn cfg(budget: usize, seed: u64) -> AlgoConfig {
    AlgoConfig {
        evaluation_budget: budget,
        seed: RngSeed(seed),
        ..AlgoConfig::default()
    }
}

fn csv(archive: &Archive) -> Vec<u8> {
    let mut buf = Vec::new();
    archive.write_csv(&mut buf).unwrap();
    buf
}

/// Ball SUT whose failing region misses every reachable input.
fn never_failing() -> SearchProblem {
    let mut sut = ball();
    sut.kind = SyntheticKind::Ball {
        center: vec![5.0; 3],
        radius: 0.1,
    };
    sut.problem()
}

fn runs(alg: Algorithm, problem: &SearchProblem, budget: usize, seeds: std::ops::RangeInclusive<u64>) -> Vec<RunResult> {
    seeds
        .into_par_iter()
        .map(|s| algorithms::run(alg, problem, &cfg(budget, s)).unwrap())
        .collect()
}

#[test]
fn budget_of_one_population_is_just_the_initial_design() {
    let problem = ball().problem();
    let lhs = latin_hypercube(problem.domain(), 20, &mut RngSeed(3).stream(Stream::Init));
    for alg in [Algorithm::Nsga2Svm, Algorithm::Nsga2Dt] {
        let run = algorithms::run(alg, &problem, &cfg(20, 3)).unwrap();
        assert_eq!(run.archive.len(), 20);
        assert!(run.log.is_empty(), "{alg}");
        let inputs: Vec<_> = run.archive.tests().iter().map(|t| t.input().clone()).collect();
        assert_eq!(inputs, lhs, "{alg}");
    }
}

#[test]
fn archives_fill_the_budget_exactly_and_labels_match_the_oracle() {
    let problem = ball().problem();
    for alg in Algorithm::ALL {
        for budget in [21, 150, 333] {
            let run = algorithms::run(alg, &problem, &cfg(budget, 1)).unwrap();
            assert_eq!(run.archive.len(), budget, "{alg} budget {budget}");
            let logged: usize = run.log.iter().map(|l| l.evaluations).sum();
            let initial = if alg == Algorithm::RandomSearch { 0 } else { 20 };
            assert_eq!(logged + initial, budget, "{alg} budget {budget}");
            for (i, t) in run.archive.tests().iter().enumerate() {
                assert_eq!(t.eval_index(), i);
                assert_eq!(t.is_failing(), problem.oracle().is_failing(t.fitness()));
            }
        }
    }
}

#[test]
fn runs_are_deterministic_per_seed() {
    let problem = ball().problem();
    for alg in Algorithm::ALL {
        let a = algorithms::run(alg, &problem, &cfg(300, 7)).unwrap();
        let b = algorithms::run(alg, &problem, &cfg(300, 7)).unwrap();
        let c = algorithms::run(alg, &problem, &cfg(300, 8)).unwrap();
        assert_eq!(csv(&a.archive), csv(&b.archive), "{alg}");
        assert_ne!(csv(&a.archive), csv(&c.archive), "{alg}");
    }
}

#[test]
fn svm_sampling_does_not_perturb_the_genetic_stream() {
    let problem = ball().problem();
    let base = algorithms::run(Algorithm::Nsga2Svm, &problem, &cfg(400, 2)).unwrap();
    let fewer = algorithms::run(
        Algorithm::Nsga2Svm,
        &problem,
        &AlgoConfig {
            svm_samples: 10,
            ..cfg(400, 2)
        },
    )
    .unwrap();
    // initial design plus the first NSGA-II burst
    let prefix = 20 + 100;
    assert_eq!(base.archive.prefix(prefix), fewer.archive.prefix(prefix));
    assert_ne!(csv(&base.archive), csv(&fewer.archive));
}

#[test]
fn svm_is_trained_exactly_when_both_classes_exist() {
    let problem = ball().problem();
    for seed in 1..=3 {
        let run = algorithms::run(Algorithm::Nsga2Svm, &problem, &cfg(1000, seed)).unwrap();
        for entry in &run.log {
            let full = entry.evaluations == 130;
            if !full {
                // the final, truncated iteration never reaches the SVM step
                assert!(entry.svm_params.is_none() && !entry.degenerate);
                continue;
            }
            let training = run.archive.prefix(entry.archive_size - 30);
            let failing = training.iter().filter(|t| t.is_failing()).count();
            let both = failing > 0 && failing < training.len();
            assert_eq!(entry.svm_params.is_some(), both, "seed {seed} iteration {}", entry.iteration);
            assert_eq!(entry.degenerate, !both);
        }
        assert!(run.model.is_some());
    }
}

#[test]
fn svm_without_failures_falls_back_to_uniform_samples() {
    let problem = never_failing();
    let run = algorithms::run(Algorithm::Nsga2Svm, &problem, &cfg(500, 4)).unwrap();
    assert_eq!(run.archive.len(), 500);
    assert!(run.model.is_none());
    assert!(run.log.iter().filter(|l| l.evaluations == 130).all(|l| l.degenerate));
}

#[test]
fn dt_without_failures_runs_unconstrained_rounds() {
    let problem = never_failing();
    let run = algorithms::run(Algorithm::Nsga2Dt, &problem, &cfg(520, 4)).unwrap();
    assert_eq!(run.archive.len(), 520);
    assert_eq!(run.log.len(), 5);
    for entry in &run.log {
        assert_eq!(entry.critical_leaves, Some(0));
        assert!(entry.evaluations <= 100);
    }
}

#[test]
fn dt_explores_critical_leaves_on_the_ball() {
    let problem = ball().problem();
    let run = algorithms::run(Algorithm::Nsga2Dt, &problem, &cfg(1000, 6)).unwrap();
    assert!(run.log.iter().any(|l| l.critical_leaves.is_some_and(|c| c > 0)));
    assert!(run.tree.is_some());
    assert!(run.failing().len() > 100);
}

#[test]
fn random_search_failure_count_matches_region_volume() {
    let problem = ball().problem();
    let results = runs(Algorithm::RandomSearch, &problem, 1000, 1..=10);
    let total: usize = results.iter().map(|r| r.failing().len()).sum();
    let n = 10_000.0;
    let expected = n * 0.03;
    let se = (n * 0.03 * 0.97f64).sqrt();
    assert!((total as f64 - expected).abs() < 3.0 * se, "{total} failing of 10000");
}

#[test]
fn guided_search_finds_more_failures_than_random_search_on_the_ball() {
    let problem = ball().problem();
    let svm = runs(Algorithm::Nsga2Svm, &problem, 1000, 1..=10);
    let rs = runs(Algorithm::RandomSearch, &problem, 1000, 1..=10);
    let wins = svm
        .iter()
        .zip(&rs)
        .filter(|(a, b)| a.failing().len() > b.failing().len())
        .count();
    assert!(wins >= 8, "NSGA-II-SVM ahead on {wins} of 10 seeds");
}

#[test]
fn invalid_configs_are_rejected() {
    let problem = ball().problem();
    for bad in [
        AlgoConfig {
            evaluation_budget: 0,
            ..AlgoConfig::default()
        },
        AlgoConfig {
            population_size: 1,
            ..AlgoConfig::default()
        },
        AlgoConfig {
            evaluation_budget: 10,
            ..AlgoConfig::default()
        },
    ] {
        assert!(algorithms::run(Algorithm::Nsga2Svm, &problem, &bad).is_err(), "{bad:?}");
    }
}
