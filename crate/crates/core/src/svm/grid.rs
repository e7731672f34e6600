use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_classes, fit_scaled, FeatureScaling, KernelMatrix, SmoParams, SvmHyperParams, SvmModel};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvScoring {
    #[default]
    Accuracy,
    BalancedAccuracy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSearchSpec {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub folds: usize,
    pub scoring: CvScoring,
    /// Used when the minority class is too small to cross-validate.
    pub fallback: SvmHyperParams,
}

impl Default for GridSearchSpec {
    fn default() -> Self {
        Self {
            c_values: vec![1.0, 10.0, 100.0, 1000.0],
            gamma_values: vec![0.01, 0.1, 1.0, 10.0],
            folds: 5,
            scoring: CvScoring::Accuracy,
            fallback: SvmHyperParams { c: 1000.0, gamma: 1.0 },
        }
    }
}

impl GridSearchSpec {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.c_values.is_empty() {
            return Err("c_values must not be empty".into());
        }
        if self.gamma_values.is_empty() {
            return Err("gamma_values must not be empty".into());
        }
        for (name, list) in [("c_values", &self.c_values), ("gamma_values", &self.gamma_values)] {
            if let Some(v) = list.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(format!("{name} must be positive (got {v})"));
            }
        }
        if self.folds < 2 {
            return Err(format!("folds must be at least 2 (got {})", self.folds));
        }
        SvmHyperParams::new(self.fallback.c, self.fallback.gamma).map_err(|e| e.to_string())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub c: f64,
    pub gamma: f64,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct GridSearchOutcome {
    pub params: SvmHyperParams,
    pub model: SvmModel,
    /// Mean validation score per cell, in grid order (C ascending, then gamma).
    pub scores: Vec<CellScore>,
    /// Folds actually used; 0 when cross-validation was skipped.
    pub folds_used: usize,
    /// Number of cross-validation trainings performed.
    pub trainings: usize,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(failing: &[bool], folds: usize, rng: &mut Rng) -> Vec<usize> {
    let mut assignment = vec![0; failing.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..failing.len()).filter(|&i| failing[i] == class).collect();
        idx.shuffle(rng);
        for (k, i) in idx.into_iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    assignment
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

struct Fold {
    train_raw: Vec<Vec<f64>>,
    train_scaled: Vec<Vec<f64>>,
    train_labels: Vec<bool>,
    distances: KernelMatrix,
    scaling: FeatureScaling,
    validation: Vec<(Vec<f64>, bool)>,
}

fn score(model: &SvmModel, validation: &[(Vec<f64>, bool)], scoring: CvScoring) -> f64 {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (x, label) in validation {
        let predicted = model.predict(x);
        if *label {
            pos += 1;
            tp += usize::from(predicted);
        } else {
            neg += 1;
            tn += usize::from(!predicted);
        }
    }
    match scoring {
        CvScoring::Accuracy => (tp + tn) as f64 / validation.len() as f64,
        CvScoring::BalancedAccuracy => {
            let rate = |hit: usize, total: usize| if total == 0 { None } else { Some(hit as f64 / total as f64) };
            let rates: Vec<f64> = [rate(tp, pos), rate(tn, neg)].into_iter().flatten().collect();
            rates.iter().sum::<f64>() / rates.len() as f64
        }
    }
}

/// Picks `(C, gamma)` by mean stratified k-fold validation score, then
/// retrains on all points with the winner. Ties go to the smaller C, then
/// the smaller gamma.
pub fn grid_search(
    points: &[Vec<f64>],
    failing: &[bool],
    spec: &GridSearchSpec,
    smo: &SmoParams,
    rng: &mut Rng,
) -> Result<GridSearchOutcome> {
    if points.len() != failing.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            actual: failing.len(),
        });
    }
    check_classes(failing)?;
    let positives = failing.iter().filter(|&&f| f).count();
    let minority = positives.min(failing.len() - positives);

    let full_scaling = FeatureScaling::standardize(points);
    let full_scaled: Vec<Vec<f64>> = points.iter().map(|p| full_scaling.apply(p)).collect();
    let full_distances = KernelMatrix::squared_distances(&full_scaled);
    let retrain = |params: SvmHyperParams| {
        let kernel = KernelMatrix::rbf_from_distances(&full_distances, params.gamma);
        fit_scaled(points, full_scaled.clone(), &kernel, failing, params, full_scaling.clone(), smo)
    };

    if minority < 2 {
        log::debug!("minority class has {minority} member(s); skipping grid search");
        let params = spec.fallback;
        return Ok(GridSearchOutcome {
            params,
            model: retrain(params),
            scores: Vec::new(),
            folds_used: 0,
            trainings: 0,
        });
    }

    let k = spec.folds.min(minority).max(2);
    let assignment = stratified_folds(failing, k, rng);
    let folds: Vec<Fold> = (0..k)
        .into_par_iter()
        .map(|f| {
            let mut train_raw = Vec::new();
            let mut train_labels = Vec::new();
            let mut validation = Vec::new();
            for (i, p) in points.iter().enumerate() {
                if assignment[i] == f {
                    validation.push((p.clone(), failing[i]));
                } else {
                    train_raw.push(p.clone());
                    train_labels.push(failing[i]);
                }
            }
            let scaling = FeatureScaling::standardize(&train_raw);
            let train_scaled: Vec<Vec<f64>> = train_raw.iter().map(|p| scaling.apply(p)).collect();
            let distances = KernelMatrix::squared_distances(&train_scaled);
            Fold {
                train_raw,
                train_scaled,
                train_labels,
                distances,
                scaling,
                validation,
            }
        })
        .collect();

    let cs = sorted(&spec.c_values);
    let gammas = sorted(&spec.gamma_values);
    // scores[fold][gamma][c]
    let per_fold_gamma: Vec<Vec<f64>> = (0..k * gammas.len())
        .into_par_iter()
        .map(|job| {
            let fold = &folds[job / gammas.len()];
            let gamma = gammas[job % gammas.len()];
            let kernel = KernelMatrix::rbf_from_distances(&fold.distances, gamma);
            cs.iter()
                .map(|&c| {
                    let model = fit_scaled(
                        &fold.train_raw,
                        fold.train_scaled.clone(),
                        &kernel,
                        &fold.train_labels,
                        SvmHyperParams { c, gamma },
                        fold.scaling.clone(),
                        smo,
                    );
                    score(&model, &fold.validation, spec.scoring)
                })
                .collect()
        })
        .collect();

    let mut scores = Vec::with_capacity(cs.len() * gammas.len());
    let mut best: Option<CellScore> = None;
    for (ci, &c) in cs.iter().enumerate() {
        for (gi, &gamma) in gammas.iter().enumerate() {
            let mean = (0..k).map(|f| per_fold_gamma[f * gammas.len() + gi][ci]).sum::<f64>() / k as f64;
            let cell = CellScore { c, gamma, score: mean };
            if best.is_none_or(|b| cell.score > b.score + 1e-12) {
                best = Some(cell);
            }
            scores.push(cell);
        }
    }
    let best = best.expect("grid is nonempty");
    let params = SvmHyperParams {
        c: best.c,
        gamma: best.gamma,
    };
    Ok(GridSearchOutcome {
        params,
        model: retrain(params),
        scores,
        folds_used: k,
        trainings: k * cs.len() * gammas.len(),
    })
}
