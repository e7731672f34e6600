use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::indicators::{a12_magnitude, vargha_delaney_a12, wilcoxon_signed_rank, EffectMagnitude, ReportRow};

pub const INDICATORS: [&str; 4] = ["hv", "gd", "spread", "distinct"];

fn value(row: &ReportRow, indicator: &str) -> Option<f64> {
    match indicator {
        "hv" => row.hv,
        "gd" => row.gd,
        "spread" => row.spread,
        "distinct" => Some(row.distinct as f64),
        _ => None,
    }
}

/// Across-seed summary of one indicator for one algorithm. Missing values
/// are excluded; `runs` counts all seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorStats {
    pub algorithm: String,
    pub indicator: String,
    pub runs: usize,
    pub present: usize,
    pub mean: Option<f64>,
    pub std_dev: Option<f64>,
    pub median: Option<f64>,
}

/// Paired comparison of two algorithms on one indicator. Pairs are formed
/// by seed; a seed missing either value is dropped. `a12` is the
/// probability that `a` scores higher than `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub indicator: String,
    pub a: String,
    pub b: String,
    pub pairs: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub exact: bool,
    pub a12: Option<f64>,
    pub magnitude: Option<EffectMagnitude>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentStats {
    /// Evaluation count whose indicator values are compared.
    pub checkpoint: usize,
    pub summaries: Vec<IndicatorStats>,
    pub comparisons: Vec<Comparison>,
}

impl ExperimentStats {
    pub fn summary(&self, algorithm: &str, indicator: &str) -> Option<&IndicatorStats> {
        self.summaries
            .iter()
            .find(|s| s.algorithm == algorithm && s.indicator == indicator)
    }

    pub fn comparison(&self, a: &str, b: &str, indicator: &str) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.a == a && c.b == b && c.indicator == indicator)
    }
}

pub(crate) fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
pub(crate) fn std_dev(values: &[f64]) -> Option<f64> {
    match values.len() {
        0 => None,
        1 => Some(0.0),
        n => {
            let mean = values.iter().sum::<f64>() / n as f64;
            Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt())
        }
    }
}

/// Statistics over the rows at `checkpoint` evaluations. A run without a
/// row at that checkpoint contributes its last row instead.
pub fn compute_stats(report: &[ReportRow], algorithms: &[&str], checkpoint: usize) -> ExperimentStats {
    // algorithm -> seed -> row
    let mut at: BTreeMap<&str, BTreeMap<u64, &ReportRow>> = BTreeMap::new();
    for row in report {
        let slot = at.entry(row.algorithm.as_str()).or_default().entry(row.seed).or_insert(row);
        let better = |r: &ReportRow| (r.evaluations == checkpoint, r.evaluations <= checkpoint, r.evaluations);
        if better(row) > better(slot) {
            *slot = row;
        }
    }

    let mut summaries = Vec::new();
    for &alg in algorithms {
        let runs = at.get(alg);
        for indicator in INDICATORS {
            let values: Vec<f64> = runs
                .map(|r| r.values().filter_map(|row| value(row, indicator)).collect())
                .unwrap_or_default();
            summaries.push(IndicatorStats {
                algorithm: alg.to_string(),
                indicator: indicator.to_string(),
                runs: runs.map_or(0, BTreeMap::len),
                present: values.len(),
                mean: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
                std_dev: std_dev(&values),
                median: median(&values),
            });
        }
    }

    let mut comparisons = Vec::new();
    for (i, &a) in algorithms.iter().enumerate() {
        for &b in &algorithms[i + 1..] {
            let (Some(ra), Some(rb)) = (at.get(a), at.get(b)) else {
                continue;
            };
            for indicator in INDICATORS {
                let (xa, xb): (Vec<f64>, Vec<f64>) = ra
                    .iter()
                    .filter_map(|(seed, row)| Some((value(row, indicator)?, value(rb.get(seed)?, indicator)?)))
                    .unzip();
                let w = wilcoxon_signed_rank(&xa, &xb).expect("paired samples have equal length");
                let a12 = (!xa.is_empty()).then(|| vargha_delaney_a12(&xa, &xb));
                comparisons.push(Comparison {
                    indicator: indicator.to_string(),
                    a: a.to_string(),
                    b: b.to_string(),
                    pairs: xa.len(),
                    w_plus: w.w_plus,
                    w_minus: w.w_minus,
                    p_value: w.p_value,
                    exact: w.exact,
                    a12,
                    magnitude: a12.map(a12_magnitude),
                });
            }
        }
    }

    ExperimentStats {
        checkpoint,
        summaries,
        comparisons,
    }
}
