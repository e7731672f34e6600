//! RBF-kernel C-SVM classifier of failing regions.
//!
//! Inputs are standardized with statistics from the training set before
//! any kernel evaluation; the scaling lives in the model. The failing class
//! is labeled `+1`, so `decision_value > 0` means predicted failing.

mod grid;
pub mod smo;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use grid::{grid_search, stratified_folds, CellScore, CvScoring, GridSearchOutcome, GridSearchSpec};
pub use smo::{KernelMatrix, SmoParams};

use crate::error::{Error, Result};
use crate::problem::EvaluatedTest;
use crate::sampling::Predictor;

/// `exp(-gamma * |a - b|^2)`
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmHyperParams {
    pub c: f64,
    pub gamma: f64,
}

impl SvmHyperParams {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "SVM hyperparameters must be positive (C = {c}, gamma = {gamma})"
            )));
        }
        Ok(Self { c, gamma })
    }
}

/// Per-dimension `(offset, scale)`; a feature maps to `(x - offset) / scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling(pub Vec<(f64, f64)>);

impl FeatureScaling {
    /// Zero mean, unit variance over `points`. Constant features keep scale 1.
    pub fn standardize(points: &[Vec<f64>]) -> Self {
        let n = points.len() as f64;
        let dim = points.first().map_or(0, Vec::len);
        Self(
            (0..dim)
                .map(|d| {
                    let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
                    let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n;
                    let sd = var.sqrt();
                    (mean, if sd > 1e-12 { sd } else { 1.0 })
                })
                .collect(),
        )
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.0).map(|(v, (o, s))| (v - o) / s).collect()
    }
}

/// Serialized form of [`SvmModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SvmModelFile {
    hyperparams: SvmHyperParams,
    feature_scaling: FeatureScaling,
    bias: f64,
    support_vectors: Vec<Vec<f64>>,
    dual_coefficients: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SvmModelFile", into = "SvmModelFile")]
pub struct SvmModel {
    hyperparams: SvmHyperParams,
    feature_scaling: FeatureScaling,
    bias: f64,
    /// In input units.
    support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i`
    dual_coefficients: Vec<f64>,
    scaled_support_vectors: Vec<Vec<f64>>,
    /// Training diagnostics, not serialized.
    iterations: usize,
    converged: bool,
}

impl From<SvmModelFile> for SvmModel {
    fn from(f: SvmModelFile) -> Self {
        let scaled = f.support_vectors.iter().map(|v| f.feature_scaling.apply(v)).collect();
        Self {
            hyperparams: f.hyperparams,
            feature_scaling: f.feature_scaling,
            bias: f.bias,
            support_vectors: f.support_vectors,
            dual_coefficients: f.dual_coefficients,
            scaled_support_vectors: scaled,
            iterations: 0,
            converged: true,
        }
    }
}

impl From<SvmModel> for SvmModelFile {
    fn from(m: SvmModel) -> Self {
        Self {
            hyperparams: m.hyperparams,
            feature_scaling: m.feature_scaling,
            bias: m.bias,
            support_vectors: m.support_vectors,
            dual_coefficients: m.dual_coefficients,
        }
    }
}

impl SvmModel {
    pub fn hyperparams(&self) -> SvmHyperParams {
        self.hyperparams
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn dual_coefficients(&self) -> &[f64] {
        &self.dual_coefficients
    }

    pub fn feature_scaling(&self) -> &FeatureScaling {
        &self.feature_scaling
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// `sum_i coef_i * k(sv_i, x) + b`
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        let z = self.feature_scaling.apply(x);
        self.scaled_support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, coef)| coef * rbf_kernel(sv, &z, self.hyperparams.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision_value(x) > 0.0
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

impl Predictor for SvmModel {
    fn predicts_failing(&self, x: &[f64]) -> bool {
        self.predict(x)
    }
}

fn check_classes(failing: &[bool]) -> Result<()> {
    let positives = failing.iter().filter(|&&f| f).count();
    if positives == 0 || positives == failing.len() {
        return Err(Error::DegenerateTrainingSet(format!(
            "{positives} failing and {} passing points; both classes are required",
            failing.len() - positives
        )));
    }
    Ok(())
}

/// Trains on `points` with labels `failing[i]` (true = failing = +1).
pub fn train(points: &[Vec<f64>], failing: &[bool], params: SvmHyperParams) -> Result<SvmModel> {
    train_with(points, failing, params, &SmoParams::default())
}

pub fn train_with(points: &[Vec<f64>], failing: &[bool], params: SvmHyperParams, smo: &SmoParams) -> Result<SvmModel> {
    if points.len() != failing.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            actual: failing.len(),
        });
    }
    check_classes(failing)?;
    let scaling = FeatureScaling::standardize(points);
    let scaled: Vec<Vec<f64>> = points.iter().map(|p| scaling.apply(p)).collect();
    let kernel = KernelMatrix::rbf(&scaled, params.gamma);
    Ok(fit_scaled(points, scaled, &kernel, failing, params, scaling, smo))
}

/// Trains from a precomputed kernel over already-scaled points.
fn fit_scaled(
    raw: &[Vec<f64>],
    scaled: Vec<Vec<f64>>,
    kernel: &KernelMatrix,
    failing: &[bool],
    params: SvmHyperParams,
    scaling: FeatureScaling,
    smo: &SmoParams,
) -> SvmModel {
    let y: Vec<f64> = failing.iter().map(|&f| if f { 1.0 } else { -1.0 }).collect();
    let sol = smo::solve(kernel, &y, params.c, smo, false);
    let mut support_vectors = Vec::new();
    let mut scaled_support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for (i, z) in scaled.into_iter().enumerate() {
        if sol.alpha[i] > 0.0 {
            support_vectors.push(raw[i].clone());
            scaled_support_vectors.push(z);
            dual_coefficients.push(sol.alpha[i] * y[i]);
        }
    }
    SvmModel {
        hyperparams: params,
        feature_scaling: scaling,
        bias: sol.bias,
        support_vectors,
        dual_coefficients,
        scaled_support_vectors,
        iterations: sol.iterations,
        converged: sol.converged,
    }
}

/// Convenience wrapper over labeled tests.
pub fn train_tests(failing: &[&EvaluatedTest], passing: &[&EvaluatedTest], params: SvmHyperParams) -> Result<SvmModel> {
    let (points, labels) = to_dataset(failing, passing);
    train(&points, &labels, params)
}

pub(crate) fn to_dataset(failing: &[&EvaluatedTest], passing: &[&EvaluatedTest]) -> (Vec<Vec<f64>>, Vec<bool>) {
    let points = failing
        .iter()
        .chain(passing)
        .map(|t| t.input().values().to_vec())
        .collect();
    let labels = std::iter::repeat_n(true, failing.len())
        .chain(std::iter::repeat_n(false, passing.len()))
        .collect();
    (points, labels)
}
