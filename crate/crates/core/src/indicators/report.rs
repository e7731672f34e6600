use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distinct_failing_count, generational_distance, hypervolume, pareto_front, spread};
use crate::error::{Error, Result};
use crate::problem::{to_minimization, EvaluatedTest, Sense};

/// Indicator settings shared by every run of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorConfig {
    /// Raw objective units; normalized with the problem senses before use.
    pub hv_reference_point: Vec<f64>,
    /// Per-objective `[low, high]` of the distinct-failure grid, raw units.
    pub grid_bounds: Vec<(f64, f64)>,
    #[serde(default = "default_cells")]
    pub grid_cells_per_dimension: usize,
    #[serde(default = "default_interval")]
    pub checkpoint_interval: usize,
}

fn default_cells() -> usize {
    50
}

fn default_interval() -> usize {
    100
}

impl IndicatorConfig {
    pub fn validate(&self, objective_count: usize) -> std::result::Result<(), String> {
        if self.hv_reference_point.len() != objective_count {
            return Err(format!(
                "hv_reference_point has {} values, problem has {objective_count} objectives",
                self.hv_reference_point.len()
            ));
        }
        if self.grid_bounds.len() != objective_count {
            return Err(format!(
                "grid_bounds has {} ranges, problem has {objective_count} objectives",
                self.grid_bounds.len()
            ));
        }
        if let Some((lo, hi)) = self.grid_bounds.iter().find(|(lo, hi)| lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less)) {
            return Err(format!("grid bound [{lo}, {hi}] is empty"));
        }
        if self.grid_cells_per_dimension == 0 {
            return Err("grid_cells_per_dimension must be positive".into());
        }
        if self.checkpoint_interval == 0 {
            return Err("checkpoint_interval must be positive".into());
        }
        Ok(())
    }

    /// Checkpoints for an archive of `len` tests: every multiple of the
    /// interval, plus `len` itself when the archive ends between two.
    pub fn checkpoints(&self, len: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (1..=len / self.checkpoint_interval)
            .map(|k| k * self.checkpoint_interval)
            .collect();
        if !len.is_multiple_of(self.checkpoint_interval) {
            out.push(len);
        }
        out
    }
}

/// Indicator values for one archive prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSummary {
    pub evaluations: usize,
    pub hv: Option<f64>,
    pub gd: Option<f64>,
    pub spread: Option<f64>,
    pub distinct: usize,
}

/// Indicators of one archive prefix. `reference_front` holds raw fitness
/// vectors. HV is missing when no failing test exists yet.
pub fn summarize(
    tests: &[EvaluatedTest],
    senses: &[Sense],
    reference_front: &[Vec<f64>],
    cfg: &IndicatorConfig,
) -> Result<IndicatorSummary> {
    let failing: Vec<&EvaluatedTest> = tests.iter().filter(|t| t.is_failing()).collect();
    let front: Vec<Vec<f64>> = pareto_front(&failing, senses)
        .into_iter()
        .map(|t| to_minimization(t.fitness(), senses))
        .collect();
    let reference: Vec<Vec<f64>> = reference_front.iter().map(|f| to_minimization(f, senses)).collect();
    let hv_ref = to_minimization(&cfg.hv_reference_point, senses);
    let hv = if front.is_empty() {
        None
    } else {
        Some(hypervolume(&front, &hv_ref)?)
    };
    let views: Vec<&[f64]> = failing.iter().map(|t| t.fitness().values()).collect();
    Ok(IndicatorSummary {
        evaluations: tests.len(),
        hv,
        gd: generational_distance(&front, &reference),
        spread: if senses.len() == 2 {
            spread(&front, &reference)
        } else {
            None
        },
        distinct: distinct_failing_count(&views, &cfg.grid_bounds, cfg.grid_cells_per_dimension),
    })
}

/// Indicator rows for every checkpoint of one run's archive, computed in
/// parallel.
pub fn checkpoint_rows(
    tests: &[EvaluatedTest],
    senses: &[Sense],
    reference_front: &[Vec<f64>],
    cfg: &IndicatorConfig,
) -> Result<Vec<IndicatorSummary>> {
    cfg.checkpoints(tests.len())
        .into_par_iter()
        .map(|k| summarize(&tests[..k], senses, reference_front, cfg))
        .collect()
}

/// One line of the quality report CSV. Missing values are empty fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub seed: u64,
    pub evaluations: usize,
    pub hv: Option<f64>,
    pub gd: Option<f64>,
    pub spread: Option<f64>,
    pub distinct: usize,
}

impl ReportRow {
    pub fn new(algorithm: impl Into<String>, seed: u64, s: IndicatorSummary) -> Self {
        Self {
            algorithm: algorithm.into(),
            seed,
            evaluations: s.evaluations,
            hv: s.hv,
            gd: s.gd,
            spread: s.spread,
            distinct: s.distinct,
        }
    }
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(["algorithm", "seed", "evaluations", "hv", "gd", "spread", "distinct"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a report CSV and checks that evaluations strictly increase within
/// each (algorithm, seed) run.
pub fn read_report_csv<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>()?;
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.algorithm == b.algorithm && a.seed == b.seed && b.evaluations <= a.evaluations {
            return Err(Error::Malformed {
                path: "report".into(),
                reason: format!(
                    "evaluations not increasing for {} seed {}: {} then {}",
                    a.algorithm, a.seed, a.evaluations, b.evaluations
                ),
            });
        }
    }
    Ok(rows)
}
