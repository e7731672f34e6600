//! The three search strategies. Each consumes one [`SearchProblem`] and one
//! [`AlgoConfig`] and fills a budgeted [`Archive`].

mod genetic;
mod nsga2_dt;
mod nsga2_svm;
mod random;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use genetic::evolve;
pub use nsga2_dt::run_nsga2_dt;
pub use nsga2_svm::run_nsga2_svm;
pub use random::run_random_search;

use crate::dtree::{DtConfig, TreeNode};
use crate::error::{Error, Result};
use crate::moo::GeneticConfig;
use crate::problem::{Archive, EvaluatedTest, SearchProblem};
use crate::rng::RngSeed;
use crate::svm::{GridSearchSpec, SmoParams, SvmHyperParams, SvmModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "nsga2-svm")]
    Nsga2Svm,
    #[serde(rename = "nsga2-dt")]
    Nsga2Dt,
    #[serde(rename = "rs")]
    RandomSearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Nsga2Svm, Algorithm::Nsga2Dt, Algorithm::RandomSearch];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsga2Svm => "nsga2-svm",
            Algorithm::Nsga2Dt => "nsga2-dt",
            Algorithm::RandomSearch => "rs",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?} (expected one of nsga2-svm, nsga2-dt, rs)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgoConfig {
    pub population_size: usize,
    pub generations_per_iteration: usize,
    pub svm_samples: usize,
    pub evaluation_budget: usize,
    pub grid: GridSearchSpec,
    pub smo: SmoParams,
    pub genetic: GeneticConfig,
    pub dt: DtConfig,
    pub seed: RngSeed,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations_per_iteration: 5,
            svm_samples: 30,
            evaluation_budget: 1000,
            grid: GridSearchSpec::default(),
            smo: SmoParams::default(),
            genetic: GeneticConfig::default(),
            dt: DtConfig::default(),
            seed: RngSeed(0),
        }
    }
}

impl AlgoConfig {
    /// Every violated constraint, as `field: message`.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.population_size < 2 {
            out.push(format!("population_size: must be at least 2 (got {})", self.population_size));
        }
        if self.generations_per_iteration < 1 {
            out.push("generations_per_iteration: must be at least 1 (got 0)".to_string());
        }
        if self.svm_samples < 1 {
            out.push("svm_samples: must be at least 1 (got 0)".to_string());
        }
        if self.evaluation_budget < self.population_size.max(1) {
            out.push(format!(
                "evaluation_budget: must be at least population_size {} (got {})",
                self.population_size, self.evaluation_budget
            ));
        }
        let nested = [
            ("grid", self.grid.validate()),
            ("genetic", self.genetic.validate()),
            ("dt", self.dt.validate()),
            ("smo", self.smo.validate()),
        ];
        for (name, r) in nested {
            if let Err(e) = r {
                out.push(format!("{name}: {e}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems.join("; ")))
        }
    }
}

/// One pass of an algorithm's outer loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Archive size at the end of the iteration.
    pub archive_size: usize,
    /// Evaluations consumed by the iteration.
    pub evaluations: usize,
    /// Hyperparameters of the SVM trained in this iteration, if any.
    pub svm_params: Option<SvmHyperParams>,
    /// Uniform samples drawn because the predicted region yielded too few points.
    pub region_empty_fallbacks: usize,
    /// No SVM could be trained because one class was empty.
    pub degenerate: bool,
    /// NSGA-II-DT only: number of critical leaves explored.
    pub critical_leaves: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub archive: Archive,
    pub log: Vec<IterationLog>,
    /// Last SVM trained by NSGA-II-SVM.
    pub model: Option<SvmModel>,
    /// Last tree fitted by NSGA-II-DT.
    pub tree: Option<TreeNode>,
}

impl RunResult {
    /// The failing tests C+, in evaluation order.
    pub fn failing(&self) -> Vec<&EvaluatedTest> {
        self.archive.failing().collect()
    }
}

pub fn run(algorithm: Algorithm, problem: &SearchProblem, cfg: &AlgoConfig) -> Result<RunResult> {
    cfg.validate()?;
    Ok(match algorithm {
        Algorithm::Nsga2Svm => run_nsga2_svm(problem, cfg)?,
        Algorithm::Nsga2Dt => run_nsga2_dt(problem, cfg)?,
        Algorithm::RandomSearch => run_random_search(problem, cfg)?,
    })
}
