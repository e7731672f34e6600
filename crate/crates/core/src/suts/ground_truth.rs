use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indicators::non_dominated_indices;
use crate::problem::{to_minimization, FitnessVector, SearchProblem};

/// Desk-scale cap on the number of grid cells.
pub const MAX_GROUND_TRUTH_CELLS: u128 = 100_000_000;

/// Dense-grid approximation of the failing region and its Pareto front.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub resolution: Vec<usize>,
    /// Oracle verdict at each cell center, first dimension varying fastest.
    pub failing: Vec<bool>,
    pub failure_volume_fraction: f64,
    /// Non-dominated raw fitness vectors among failing cell centers.
    pub reference_front: Vec<FitnessVector>,
}

impl GroundTruth {
    pub fn cell_count(&self) -> usize {
        self.failing.len()
    }

    /// Per-dimension cell coordinates of a flat index.
    pub fn cell_coords(&self, mut index: usize) -> Vec<usize> {
        self.resolution
            .iter()
            .map(|&r| {
                let c = index % r;
                index /= r;
                c
            })
            .collect()
    }

    pub fn flat_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.resolution)
            .rev()
            .fold(0, |acc, (&c, &r)| acc * r + c)
    }
}

/// Evaluates the problem at every cell center of a regular grid.
pub fn compute_ground_truth(problem: &SearchProblem, resolution: &[usize]) -> Result<GroundTruth> {
    let domain = problem.domain();
    if resolution.len() != domain.dimension() {
        return Err(Error::DimensionMismatch {
            expected: domain.dimension(),
            actual: resolution.len(),
        });
    }
    if resolution.contains(&0) {
        return Err(Error::InvalidConfig("ground-truth resolution must be positive".into()));
    }
    let cells: u128 = resolution.iter().map(|&r| r as u128).product();
    if cells > MAX_GROUND_TRUTH_CELLS {
        return Err(Error::ResolutionTooLarge {
            cells,
            cap: MAX_GROUND_TRUTH_CELLS,
        });
    }
    let cells = cells as usize;
    let oracle = problem.oracle();
    let evaluator = problem.evaluator();
    let m = problem.objective_count();

    let center = |mut index: usize| -> Vec<f64> {
        resolution
            .iter()
            .enumerate()
            .map(|(d, &r)| {
                let c = index % r;
                index /= r;
                domain.lower(d) + (c as f64 + 0.5) / r as f64 * domain.width(d)
            })
            .collect()
    };

    let evaluated: Vec<(bool, Option<Vec<f64>>)> = (0..cells)
        .into_par_iter()
        .map(|i| match evaluator.evaluate(&center(i)) {
            Ok(f) if f.len() == m && f.iter().all(|v| v.is_finite()) => {
                let failing = oracle.is_failing(&f);
                (failing, failing.then_some(f))
            }
            _ => (false, None),
        })
        .collect();

    let failing: Vec<bool> = evaluated.iter().map(|(f, _)| *f).collect();
    let failing_fitness: Vec<Vec<f64>> = evaluated.into_iter().filter_map(|(_, f)| f).collect();
    let normalized: Vec<Vec<f64>> = failing_fitness
        .iter()
        .map(|f| to_minimization(f, problem.senses()))
        .collect();
    let reference_front = non_dominated_indices(&normalized)
        .into_iter()
        .map(|i| FitnessVector::new(failing_fitness[i].clone()).expect("finite by construction"))
        .collect();
    let count = failing.iter().filter(|&&f| f).count();
    Ok(GroundTruth {
        resolution: resolution.to_vec(),
        failure_volume_fraction: count as f64 / cells as f64,
        failing,
        reference_front,
    })
}
