//! Search-based testing guided by a learned model of the failing region.
//!
//! The central algorithm, [`algorithms::run_nsga2_svm`], alternates short
//! NSGA-II bursts with an RBF-kernel SVM trained on every test evaluated so
//! far, and spends part of its budget sampling where the SVM predicts
//! failures. Two baselines ([`algorithms::run_nsga2_dt`],
//! [`algorithms::run_random_search`]), synthetic systems under test with
//! known failing regions, quality indicators and an experiment harness
//! complete the toolkit.
//!
//! ```
//! use svmguide::{algorithms, suts, AlgoConfig, Algorithm};
//!
//! let problem = suts::ball().problem();
//! let cfg = AlgoConfig { evaluation_budget: 150, ..AlgoConfig::default() };
//! let run = algorithms::run(Algorithm::Nsga2Svm, &problem, &cfg).unwrap();
//! assert_eq!(run.archive.len(), 150);
//! ```

pub mod algorithms;
pub mod dtree;
pub mod error;
pub mod harness;
pub mod indicators;
pub mod moo;
pub mod problem;
pub mod rng;
pub mod sampling;
pub mod suts;
pub mod svm;

pub use algorithms::{AlgoConfig, Algorithm, IterationLog, RunResult};
pub use error::{Error, Result};
pub use problem::{
    Archive, Comparison, EvaluatedTest, FitnessEvaluator, FitnessVector, Oracle, SearchDomain, SearchProblem, Sense,
    TestInput, Threshold,
};
pub use rng::{RngSeed, Stream};
pub use svm::{SvmHyperParams, SvmModel};
