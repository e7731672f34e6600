use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
output_dir = "never-used"
seeds = [1, 2]
algorithms = ["nsga2-svm", "rs"]
ground_truth_resolution = [30, 30, 30]

[sut]
name = "two-blobs"

[search]
evaluation_budget = 200
"#;

fn svmguide(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_svmguide"));
    cmd.args(args).env_remove("SVMGUIDE_OUT");
    if let Some(out) = env_out {
        cmd.env("SVMGUIDE_OUT", out);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn validate_accepts_a_good_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = svmguide(&["validate", &cfg], None);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("nsga2-svm, rs x 2 seeds, budget 200"), "{stdout}");
}

#[test]
fn invalid_config_exits_with_two_and_names_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[search]\npopulation_size = 0\nsvm_samples = 0\n");
    for verb in ["validate", "run"] {
        let out = svmguide(&[verb, &cfg], None);
        assert_eq!(out.status.code(), Some(2), "{verb}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains("population_size"), "{stderr}");
        assert!(stderr.contains("svm_samples"), "{stderr}");
    }
}

#[test]
fn zero_jobs_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = svmguide(&["run", &cfg, "--jobs", "0"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_experiment_directory_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = svmguide(&["stats", &dir.path().join("absent").display().to_string()], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_report_stats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let env_out = dir.path().join("from-env");
    let flag_out = dir.path().join("from-flag");

    // the environment variable overrides the file's output_dir
    let run = svmguide(&["run", &cfg, "--jobs", "2"], Some(&env_out));
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(env_out.join("report.csv").exists());
    assert!(env_out.join("nsga2-svm/2/svm_model.json").exists());
    assert!(!Path::new("never-used").exists());
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("indicator values at 200 evaluations"), "{stdout}");
    assert!(stdout.contains("nsga2-svm vs rs"), "{stdout}");

    // and --out overrides the environment variable
    let run = svmguide(&["run", &cfg, "--out", &flag_out.display().to_string()], Some(&env_out));
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(
        fs::read(env_out.join("report.csv")).unwrap(),
        fs::read(flag_out.join("report.csv")).unwrap()
    );

    let before = fs::read(flag_out.join("stats.json")).unwrap();
    let report = svmguide(&["report", &flag_out.display().to_string()], None);
    assert_eq!(report.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&report.stdout).contains("8 report rows"));
    let stats = svmguide(&["stats", &flag_out.display().to_string()], None);
    assert_eq!(stats.status.code(), Some(0));
    assert_eq!(fs::read(flag_out.join("stats.json")).unwrap(), before);
}
