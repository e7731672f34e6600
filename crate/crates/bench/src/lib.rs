//! Deterministic inputs shared by the benchmarks.

use svmguide::problem::{to_minimization, EvaluatedTest};
use svmguide::suts::ball;
use svmguide::{Archive, SearchDomain, TestInput};

/// A 2-D labeled point cloud: failing iff inside a disc of radius 0.3.
pub fn disc_dataset(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
    let golden = 0.618_033_988_749_895_f64;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = i as f64 + 0.5;
            vec![(t / n as f64).fract(), (t * golden).fract()]
        })
        .collect();
    let labels = points
        .iter()
        .map(|p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.09)
        .collect();
    (points, labels)
}

/// Evaluated tests on the ball SUT laid out on a low-discrepancy sequence.
pub fn ball_tests(n: usize) -> Vec<EvaluatedTest> {
    let sut = ball();
    let problem = sut.problem();
    let domain = SearchDomain::unit(3).expect("unit cube");
    let inputs: Vec<TestInput> = (0..n)
        .map(|i| {
            let t = i as f64 + 0.5;
            let x = vec![(t * 0.754_877_666).fract(), (t * 0.569_840_291).fract(), (t * 0.430_159_709).fract()];
            TestInput::new(x, &domain).expect("3-D point")
        })
        .collect();
    let mut archive = Archive::new(n);
    archive.evaluate(inputs, &problem);
    archive.tests().to_vec()
}

/// Minimization-form objective vectors of [`ball_tests`].
pub fn ball_objectives(n: usize) -> Vec<Vec<f64>> {
    let senses = ball().senses;
    ball_tests(n).iter().map(|t| to_minimization(t.fitness(), &senses)).collect()
}
