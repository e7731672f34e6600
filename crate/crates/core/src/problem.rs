//! The search-based testing problem: domain, test inputs, fitness, oracle
//! and the append-only archive of evaluated tests.
//!
//! All algorithms share one [`Archive`] per run. It is the only place where
//! evaluations happen, so the evaluation budget is enforced here and nowhere
//! else.

use std::fmt;
use std::io::{Read, Write};
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::suts::SutError;

/// Axis-aligned box `D ⊆ R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct SearchDomain {
    bounds: Vec<(f64, f64)>,
}

impl SearchDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!(
                    "dimension {i}: lower bound {lo} must be finite and below upper bound {hi}"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The unit hypercube `[0, 1]^n`.
    pub fn unit(dimension: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); dimension])
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.bounds[i].0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.bounds[i].1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bounds[i].1 - self.bounds[i].0
    }

    pub fn volume(&self) -> f64 {
        (0..self.dimension()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn clamp_in_place(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            // NaN maps to the lower bound so a broken operator cannot leak it.
            *v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
        }
    }
}

impl TryFrom<Vec<(f64, f64)>> for SearchDomain {
    type Error = Error;

    fn try_from(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(bounds)
    }
}

impl From<SearchDomain> for Vec<(f64, f64)> {
    fn from(domain: SearchDomain) -> Self {
        domain.bounds
    }
}

/// A point of the search domain. Construction clamps into the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestInput(Vec<f64>);

impl TestInput {
    pub fn new(mut values: Vec<f64>, domain: &SearchDomain) -> Result<Self> {
        if values.len() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                actual: values.len(),
            });
        }
        domain.clamp_in_place(&mut values);
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TestInput {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Raw objective values as reported by the SUT, in the SUT's own sense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector(Vec<f64>);

impl FitnessVector {
    /// Rejects non-finite components.
    pub fn new(values: Vec<f64>) -> std::result::Result<Self, SutError> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SutError::NonFinite(*v));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for FitnessVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Maps a raw objective value into the internal minimization convention.
    pub fn normalize(self, value: f64) -> f64 {
        match self {
            Sense::Minimize => value,
            Sense::Maximize => -value,
        }
    }
}

/// Converts a raw fitness vector into minimization form.
pub fn to_minimization(fitness: &[f64], senses: &[Sense]) -> Vec<f64> {
    fitness.iter().zip(senses).map(|(&v, s)| s.normalize(v)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterEq,
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
}

impl Comparison {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Greater => lhs > rhs,
            Comparison::GreaterEq => lhs >= rhs,
            Comparison::Less => lhs < rhs,
            Comparison::LessEq => lhs <= rhs,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::Greater => ">",
            Comparison::GreaterEq => ">=",
            Comparison::Less => "<",
            Comparison::LessEq => "<=",
        })
    }
}

/// `f[objective] <op> value`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub objective: usize,
    pub op: Comparison,
    pub value: f64,
}

/// Test oracle: a conjunction of thresholds over the raw fitness vector.
/// A test fails iff every clause holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub clauses: Vec<Threshold>,
}

impl Oracle {
    pub fn new(clauses: Vec<Threshold>) -> Self {
        Self { clauses }
    }

    pub fn is_failing(&self, fitness: &[f64]) -> bool {
        self.clauses
            .iter()
            .all(|c| fitness.get(c.objective).is_some_and(|&v| c.op.holds(v, c.value)))
    }

    /// A finite fitness vector this oracle labels passing. Used as the
    /// recorded fitness of tests whose evaluation failed.
    pub fn passing_sentinel(&self, objective_count: usize) -> FitnessVector {
        let mut values = vec![0.0; objective_count];
        if let Some(c) = self.clauses.first() {
            values[c.objective] = match c.op {
                Comparison::Greater | Comparison::Less => c.value,
                Comparison::GreaterEq => c.value - 1.0,
                Comparison::LessEq => c.value + 1.0,
            };
        }
        FitnessVector(values)
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "f{} {} {}", c.objective + 1, c.op, c.value)?;
        }
        Ok(())
    }
}

/// Anything that maps a test input to a raw fitness vector.
pub trait FitnessEvaluator: Send + Sync {
    fn evaluate(&self, input: &[f64]) -> std::result::Result<Vec<f64>, SutError>;

    /// Results must come back in input order.
    fn evaluate_batch(&self, inputs: &[&[f64]]) -> Vec<std::result::Result<Vec<f64>, SutError>> {
        inputs.iter().map(|x| self.evaluate(x)).collect()
    }
}

/// The tuple `(S, D, F, O)`.
#[derive(Clone)]
pub struct SearchProblem {
    name: String,
    domain: SearchDomain,
    senses: Vec<Sense>,
    oracle: Oracle,
    evaluator: Arc<dyn FitnessEvaluator>,
}

impl fmt::Debug for SearchProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("senses", &self.senses)
            .field("oracle", &self.oracle)
            .finish_non_exhaustive()
    }
}

impl SearchProblem {
    pub fn new(
        name: impl Into<String>,
        domain: SearchDomain,
        senses: Vec<Sense>,
        oracle: Oracle,
        evaluator: Arc<dyn FitnessEvaluator>,
    ) -> Result<Self> {
        let m = senses.len();
        if m == 0 {
            return Err(Error::InvalidProblem("at least one objective is required".into()));
        }
        if oracle.clauses.is_empty() {
            return Err(Error::InvalidProblem("oracle needs at least one clause".into()));
        }
        if let Some(c) = oracle.clauses.iter().find(|c| c.objective >= m) {
            return Err(Error::InvalidProblem(format!(
                "oracle references objective {} but the problem has {m}",
                c.objective + 1
            )));
        }
        Ok(Self {
            name: name.into(),
            domain,
            senses,
            oracle,
            evaluator,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &SearchDomain {
        &self.domain
    }

    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn objective_count(&self) -> usize {
        self.senses.len()
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn evaluator(&self) -> &Arc<dyn FitnessEvaluator> {
        &self.evaluator
    }

    /// Same problem on a sub-box of the domain.
    pub fn with_domain(&self, domain: SearchDomain) -> Result<Self> {
        if domain.dimension() != self.domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dimension(),
                actual: domain.dimension(),
            });
        }
        Ok(Self {
            domain,
            ..self.clone()
        })
    }

    fn fitness_of(&self, result: std::result::Result<Vec<f64>, SutError>) -> FitnessVector {
        let checked = result.and_then(|values| {
            if values.len() != self.objective_count() {
                return Err(SutError::Malformed(format!(
                    "expected {} objectives, got {}",
                    self.objective_count(),
                    values.len()
                )));
            }
            FitnessVector::new(values)
        });
        match checked {
            Ok(f) => f,
            Err(e) => {
                log::warn!("{}: evaluation failed ({e}); recording sentinel fitness", self.name);
                self.oracle.passing_sentinel(self.objective_count())
            }
        }
    }
}

/// A test input together with its fitness and oracle verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedTest {
    input: TestInput,
    fitness: FitnessVector,
    failing: bool,
    eval_index: usize,
}

impl EvaluatedTest {
    /// The label is always derived from `oracle`.
    pub fn new(input: TestInput, fitness: FitnessVector, eval_index: usize, oracle: &Oracle) -> Self {
        let failing = oracle.is_failing(&fitness);
        Self {
            input,
            fitness,
            failing,
            eval_index,
        }
    }

    pub fn input(&self) -> &TestInput {
        &self.input
    }

    pub fn fitness(&self) -> &FitnessVector {
        &self.fitness
    }

    pub fn is_failing(&self) -> bool {
        self.failing
    }

    pub fn eval_index(&self) -> usize {
        self.eval_index
    }
}

/// Every test evaluated during one run, in evaluation order.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    tests: Vec<EvaluatedTest>,
    budget: usize,
}

impl Archive {
    pub fn new(budget: usize) -> Self {
        Self {
            tests: Vec::with_capacity(budget.min(1 << 16)),
            budget,
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.tests.len()
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == 0
    }

    pub fn tests(&self) -> &[EvaluatedTest] {
        &self.tests
    }

    /// The first `count` evaluations.
    pub fn prefix(&self, count: usize) -> &[EvaluatedTest] {
        &self.tests[..count.min(self.tests.len())]
    }

    pub fn failing(&self) -> impl Iterator<Item = &EvaluatedTest> {
        self.tests.iter().filter(|t| t.failing)
    }

    /// Evaluates `inputs` in order and appends them. Inputs beyond the
    /// remaining budget are dropped. Returns the appended tests.
    pub fn evaluate(&mut self, inputs: Vec<TestInput>, problem: &SearchProblem) -> &[EvaluatedTest] {
        let start = self.tests.len();
        let take = inputs.len().min(self.remaining());
        if take == 0 {
            return &self.tests[start..];
        }
        let inputs: Vec<TestInput> = inputs.into_iter().take(take).collect();
        let views: Vec<&[f64]> = inputs.iter().map(|x| x.values()).collect();
        let results = problem.evaluator.evaluate_batch(&views);
        debug_assert_eq!(results.len(), inputs.len());
        for (input, result) in inputs.into_iter().zip(results) {
            let fitness = problem.fitness_of(result);
            let index = self.tests.len();
            self.tests
                .push(EvaluatedTest::new(input, fitness, index, &problem.oracle));
        }
        &self.tests[start..]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_tests_csv(&self.tests, writer)
    }

    /// Reads an archive CSV. Labels are recomputed with `oracle` and must
    /// agree with the `failing` column.
    pub fn read_csv<R: Read>(reader: R, dimension: usize, oracle: &Oracle, budget: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header_len = rdr.headers()?.len();
        if header_len < dimension + 3 {
            return Err(malformed(format!("header has {header_len} columns")));
        }
        let m = header_len - dimension - 2;
        let mut tests = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| malformed(format!("row {row}, column {i}: {e}")))
            };
            let eval_index: usize = record[0]
                .trim()
                .parse()
                .map_err(|e| malformed(format!("row {row}: bad eval_index: {e}")))?;
            if eval_index != row {
                return Err(malformed(format!("row {row}: eval_index {eval_index} out of sequence")));
            }
            let x = (1..=dimension).map(field).collect::<Result<Vec<_>>>()?;
            let f = (dimension + 1..=dimension + m).map(field).collect::<Result<Vec<_>>>()?;
            let failing: bool = record[dimension + m + 1]
                .trim()
                .parse()
                .map_err(|e| malformed(format!("row {row}: bad failing flag: {e}")))?;
            let fitness = FitnessVector::new(f).map_err(|e| malformed(format!("row {row}: {e}")))?;
            let test = EvaluatedTest::new(TestInput(x), fitness, eval_index, oracle);
            if test.failing != failing {
                return Err(malformed(format!("row {row}: failing flag disagrees with oracle")));
            }
            tests.push(test);
        }
        if tests.len() > budget {
            return Err(malformed(format!("{} rows exceed budget {budget}", tests.len())));
        }
        Ok(Self { tests, budget })
    }
}

fn malformed(reason: String) -> Error {
    Error::Malformed {
        path: "archive.csv".into(),
        reason,
    }
}

/// Writes tests in the archive CSV layout: `eval_index,x_1..x_n,f_1..f_m,failing`.
pub fn write_tests_csv<W: Write>(tests: &[EvaluatedTest], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let (n, m) = tests
        .first()
        .map(|t| (t.input.len(), t.fitness.len()))
        .unwrap_or((0, 0));
    let mut header = vec!["eval_index".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend((1..=m).map(|i| format!("f_{i}")));
    header.push("failing".into());
    wtr.write_record(&header)?;
    for t in tests {
        let mut row = Vec::with_capacity(n + m + 2);
        row.push(t.eval_index.to_string());
        row.extend(t.input.iter().map(|v| v.to_string()));
        row.extend(t.fitness.iter().map(|v| v.to_string()));
        row.push(t.failing.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Partitions tests into `(failing, passing)`.
pub fn split_by_label(tests: &[EvaluatedTest]) -> (Vec<&EvaluatedTest>, Vec<&EvaluatedTest>) {
    tests.iter().partition(|t| t.failing)
}
