use std::fs;
use std::path::Path;

use svmguide::harness::{self, cell_dir, validate_config, ExperimentStats, REFERENCE_FRONT_FILE, REPORT_FILE, STATS_FILE};
use svmguide::indicators::read_report_csv;
use svmguide::problem::Archive;
use svmguide::rng::RngSeed;
use svmguide::svm::SvmModel;
use svmguide::{Algorithm, SearchProblem};

const SMALL: &str = r#"
seeds = [1, 2, 3]
ground_truth_resolution = [40, 40, 40]
parallelism = 2

[sut]
name = "ball"

[search]
evaluation_budget = 250
"#;

fn read_stats(out: &Path) -> ExperimentStats {
    serde_json::from_str(&fs::read_to_string(out.join(STATS_FILE)).unwrap()).unwrap()
}

#[test]
fn experiment_layout_and_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let cfg = validate_config(SMALL).unwrap();
    let outcome = harness::run_experiment(&cfg, SMALL, &out).unwrap();
    assert!(outcome.is_complete());
    assert_eq!(outcome.completed, 9);

    assert_eq!(fs::read_to_string(out.join("experiment.toml")).unwrap(), SMALL);
    assert!(out.join(REFERENCE_FRONT_FILE).exists());
    let problem: SearchProblem = cfg.sut.problem();
    for alg in Algorithm::ALL {
        for seed in 1..=3 {
            let cell = cell_dir(&out, alg, RngSeed(seed));
            let archive = Archive::read_csv(
                fs::File::open(cell.join("archive.csv")).unwrap(),
                3,
                problem.oracle(),
                250,
            )
            .unwrap();
            assert_eq!(archive.len(), 250);
            let meta: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(cell.join("metadata.json")).unwrap()).unwrap();
            assert_eq!(meta["algorithm"], alg.name());
            assert_eq!(meta["seed"], seed);
            assert_eq!(meta["failing"], archive.failing().count());
            assert_eq!(cell.join("svm_model.json").exists(), alg == Algorithm::Nsga2Svm);
            assert_eq!(cell.join("tree.txt").exists(), alg == Algorithm::Nsga2Dt);
            if alg == Algorithm::Nsga2Svm {
                SvmModel::read_json(fs::File::open(cell.join("svm_model.json")).unwrap()).unwrap();
            }
        }
    }

    // checkpoints at 100, 200 and the final 250 for each run
    let rows = read_report_csv(fs::File::open(out.join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(rows.len(), 27);
    assert_eq!(rows, outcome.report);
    let marks: Vec<usize> = rows.iter().take(3).map(|r| r.evaluations).collect();
    assert_eq!(marks, [100, 200, 250]);
    assert_eq!(read_stats(&out), outcome.stats);
    assert_eq!(outcome.stats.checkpoint, 250);

    // recomputing from the archives reproduces both files byte for byte
    let report_bytes = fs::read(out.join(REPORT_FILE)).unwrap();
    let stats_bytes = fs::read(out.join(STATS_FILE)).unwrap();
    fs::remove_file(out.join(REPORT_FILE)).unwrap();
    fs::remove_file(out.join(STATS_FILE)).unwrap();
    let (again, _) = harness::report(&out).unwrap();
    assert_eq!(again, rows);
    assert_eq!(fs::read(out.join(REPORT_FILE)).unwrap(), report_bytes);
    assert_eq!(fs::read(out.join(STATS_FILE)).unwrap(), stats_bytes);
    fs::remove_file(out.join(STATS_FILE)).unwrap();
    harness::stats(&out).unwrap();
    assert_eq!(fs::read(out.join(STATS_FILE)).unwrap(), stats_bytes);

    // three comparisons per indicator
    assert_eq!(outcome.stats.comparisons.len(), 3 * harness::INDICATORS.len());
}

#[test]
fn report_skips_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let text = "seeds = [1, 2]\nalgorithms = [\"rs\"]\nground_truth_resolution = [20, 20, 20]\n[sut]\nname = \"ball\"\n[search]\nevaluation_budget = 100\n";
    let cfg = validate_config(text).unwrap();
    harness::run_experiment(&cfg, text, out).unwrap();
    fs::remove_dir_all(cell_dir(out, Algorithm::RandomSearch, RngSeed(2))).unwrap();
    let (rows, _) = harness::report(out).unwrap();
    assert!(rows.iter().all(|r| r.seed == 1));
}

#[test]
fn external_experiment_uses_the_run_union_front() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    // fitness is the input itself: failing iff x1 > 0.8
    let text = r#"
seeds = [1, 2]
algorithms = ["nsga2-svm", "rs"]

[sut]
name = "external"

[sut.external]
command = ["sh", "-c", "while read a b; do echo \"$a $b\"; done"]
bounds = [[0.0, 1.0], [0.0, 1.0]]
senses = ["maximize", "maximize"]
oracle = [{ objective = 0, op = ">", value = 0.8 }]
timeout_secs = 10
pool_size = 2

[search]
evaluation_budget = 160

[indicators]
hv_reference_point = [0.8, 0.0]
grid_bounds = [[0.8, 1.0], [0.0, 1.0]]
"#;
    let cfg = validate_config(text).unwrap();
    let outcome = harness::run_experiment(&cfg, text, out).unwrap();
    assert!(outcome.is_complete());
    let front = fs::read_to_string(out.join(REFERENCE_FRONT_FILE)).unwrap();
    let points: Vec<Vec<f64>> = front
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(!points.is_empty());
    assert!(points.iter().all(|p| p[0] > 0.8));
    // every final GD is zero or positive and defined once failures exist
    for row in outcome.report.iter().filter(|r| r.evaluations == 160) {
        if row.distinct > 0 {
            assert!(row.gd.is_some_and(|g| g >= 0.0));
        }
    }
}

#[test]
fn invalid_experiment_lists_every_problem() {
    let text = r#"
seeds = []
algorithms = ["nsga2-svm", "hill-climb"]
[sut]
name = "ball"
[search]
population_size = 1
"#;
    let err = validate_config(text).unwrap_err();
    let joined = err.to_string();
    assert!(err.0.len() >= 3, "{joined}");
    assert!(joined.contains("seeds"), "{joined}");
    assert!(joined.contains("hill-climb"), "{joined}");
    assert!(joined.contains("population_size"), "{joined}");
}
