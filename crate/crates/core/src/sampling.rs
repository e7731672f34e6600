//! Space-filling initialization and rejection sampling inside a predicted
//! failing region.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::problem::{SearchDomain, TestInput};
use crate::rng::Rng;

/// Anything that can label a point of the domain as predicted-failing.
pub trait Predictor {
    fn predicts_failing(&self, x: &[f64]) -> bool;
}

impl<F: Fn(&[f64]) -> bool> Predictor for F {
    fn predicts_failing(&self, x: &[f64]) -> bool {
        self(x)
    }
}

/// Default attempt cap per requested sample.
pub const ATTEMPTS_PER_SAMPLE: usize = 10_000;

/// Latin hypercube sample: per dimension, exactly one point in each of the
/// `count` equal-width strata.
pub fn latin_hypercube(domain: &SearchDomain, count: usize, rng: &mut Rng) -> Vec<TestInput> {
    assert!(count >= 1, "latin_hypercube needs count >= 1");
    let n = domain.dimension();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for d in 0..n {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        let (lo, width) = (domain.lower(d), domain.width(d));
        columns.push(
            strata
                .into_iter()
                .map(|k| {
                    let u: f64 = rng.random();
                    lo + (k as f64 + u) / count as f64 * width
                })
                .collect(),
        );
    }
    (0..count)
        .map(|i| {
            let x = columns.iter().map(|c| c[i]).collect();
            TestInput::new(x, domain).expect("dimension matches domain")
        })
        .collect()
}

/// I.i.d. uniform points over the box.
pub fn uniform(domain: &SearchDomain, count: usize, rng: &mut Rng) -> Vec<TestInput> {
    (0..count).map(|_| uniform_point(domain, rng)).collect()
}

pub fn uniform_point(domain: &SearchDomain, rng: &mut Rng) -> TestInput {
    let x = domain
        .bounds()
        .iter()
        .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
        .collect();
    TestInput::new(x, domain).expect("dimension matches domain")
}

#[derive(Clone, Debug, PartialEq)]
pub struct RejectionOutcome {
    pub accepted: Vec<TestInput>,
    pub attempts: usize,
}

impl RejectionOutcome {
    /// No point was accepted: the caller should fall back to another source.
    pub fn region_empty(&self) -> bool {
        self.accepted.is_empty()
    }
}

/// Draws uniform candidates and keeps those `predictor` labels failing,
/// stopping at `count` accepted or `max_attempts` drawn.
pub fn rejection_sample<P: Predictor + ?Sized>(
    predictor: &P,
    domain: &SearchDomain,
    count: usize,
    max_attempts: usize,
    rng: &mut Rng,
) -> RejectionOutcome {
    let mut accepted = Vec::with_capacity(count);
    let mut attempts = 0;
    while accepted.len() < count && attempts < max_attempts {
        attempts += 1;
        let x = uniform_point(domain, rng);
        if predictor.predicts_failing(&x) {
            accepted.push(x);
        }
    }
    if accepted.is_empty() {
        log::debug!("rejection sampling found no predicted-failing point in {attempts} attempts");
    }
    RejectionOutcome { accepted, attempts }
}
