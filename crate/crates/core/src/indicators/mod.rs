//! Quality indicators over failing-solution sets and cross-run statistics.
//!
//! Front-level functions work on objective vectors in minimization form.
//! Values that are undefined for a given input (for instance the
//! generational distance of an empty front) are `None`, never zero.

mod report;
mod stats;

use std::collections::HashSet;

pub use report::{
    checkpoint_rows, read_report_csv, summarize, write_report_csv, IndicatorConfig, IndicatorSummary, ReportRow,
};
pub use stats::{a12_magnitude, vargha_delaney_a12, wilcoxon_signed_rank, EffectMagnitude, WilcoxonResult};

use crate::error::{Error, Result};
use crate::moo::dominates;
use crate::problem::{to_minimization, EvaluatedTest, Sense};

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Indices of the non-dominated points (minimization), in ascending
/// lexicographic order of the points.
pub fn non_dominated_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex(&points[a], &points[b]).then(a.cmp(&b)));
    // A dominating point is lexicographically no greater, so it is always
    // visited first.
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&j| dominates(&points[j], &points[i])) {
            front.push(i);
        }
    }
    front
}

/// Non-dominated subset of the failing tests, in input order.
pub fn pareto_front<'a>(failing: &[&'a EvaluatedTest], senses: &[Sense]) -> Vec<&'a EvaluatedTest> {
    let points: Vec<Vec<f64>> = failing.iter().map(|t| to_minimization(t.fitness(), senses)).collect();
    let mut idx = non_dominated_indices(&points);
    idx.sort_unstable();
    idx.into_iter().map(|i| failing[i]).collect()
}

fn hv2(points: &mut [(f64, f64)], reference: (f64, f64)) -> f64 {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut best_y = reference.1;
    for (k, &(x, y)) in points.iter().enumerate() {
        if y >= best_y {
            continue;
        }
        let next_x = points[k + 1..]
            .iter()
            .find(|p| p.1 < y)
            .map_or(reference.0, |p| p.0);
        area += (next_x - x) * (reference.1 - y);
        best_y = y;
    }
    area
}

/// Lebesgue measure of the region dominated by `front` and bounded by
/// `reference`, for two or three objectives. Points that do not dominate
/// the reference are dropped with a warning.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if m != 2 && m != 3 {
        return Err(Error::UnsupportedObjectiveCount(m));
    }
    let mut kept: Vec<&Vec<f64>> = Vec::with_capacity(front.len());
    for p in front {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: p.len(),
            });
        }
        if dominates(p, reference) {
            kept.push(p);
        } else {
            log::warn!("hypervolume: point {p:?} does not dominate reference {reference:?}; discarded");
        }
    }
    if m == 2 {
        let mut pts: Vec<(f64, f64)> = kept.iter().map(|p| (p[0], p[1])).collect();
        return Ok(hv2(&mut pts, (reference[0], reference[1])));
    }
    // slice along the third objective
    let mut pts: Vec<&Vec<f64>> = kept;
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    for k in 0..pts.len() {
        let z_next = pts.get(k + 1).map_or(reference[2], |p| p[2]);
        let depth = z_next - pts[k][2];
        if depth <= 0.0 {
            continue;
        }
        let mut slice: Vec<(f64, f64)> = pts[..=k].iter().map(|p| (p[0], p[1])).collect();
        volume += depth * hv2(&mut slice, (reference[0], reference[1]));
    }
    Ok(volume)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean distance from each front point to its nearest reference point.
pub fn generational_distance(front: &[Vec<f64>], reference_front: &[Vec<f64>]) -> Option<f64> {
    if front.is_empty() || reference_front.is_empty() {
        return None;
    }
    let total: f64 = front
        .iter()
        .map(|p| {
            reference_front
                .iter()
                .map(|r| euclidean(p, r))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Some(total / front.len() as f64)
}

/// Deb's spread for bi-objective fronts; extremes come from the reference
/// front (sorted by the first objective).
pub fn spread(front: &[Vec<f64>], reference_front: &[Vec<f64>]) -> Option<f64> {
    if front.len() < 2 || reference_front.is_empty() {
        return None;
    }
    let by_first = |a: &&Vec<f64>, b: &&Vec<f64>| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]));
    let mut f: Vec<&Vec<f64>> = front.iter().collect();
    f.sort_by(by_first);
    let mut r: Vec<&Vec<f64>> = reference_front.iter().collect();
    r.sort_by(by_first);
    let gaps: Vec<f64> = f.windows(2).map(|w| euclidean(w[0], w[1])).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let d_first = euclidean(r[0], f[0]);
    let d_last = euclidean(r[r.len() - 1], f[f.len() - 1]);
    let numerator = d_first + d_last + gaps.iter().map(|d| (d - mean).abs()).sum::<f64>();
    let denominator = d_first + d_last + gaps.len() as f64 * mean;
    (denominator > 0.0).then(|| numerator / denominator)
}

/// Grid cell of `value` in `[lo, hi]` split into `cells` equal parts. The
/// last cell is closed; values outside the range have no cell.
pub fn cell_index(value: f64, (lo, hi): (f64, f64), cells: usize) -> Option<usize> {
    if !(value >= lo && value <= hi) {
        return None;
    }
    let k = ((value - lo) / (hi - lo) * cells as f64).floor() as usize;
    Some(k.min(cells - 1))
}

/// Number of occupied cells of the `cells^m` grid over `bounds` (raw
/// objective units). Points outside `bounds` are ignored.
pub fn distinct_failing_count(fitness: &[&[f64]], bounds: &[(f64, f64)], cells: usize) -> usize {
    let mut occupied: HashSet<Vec<usize>> = HashSet::new();
    for f in fitness {
        let key: Option<Vec<usize>> = f
            .iter()
            .zip(bounds)
            .map(|(&v, &b)| cell_index(v, b, cells))
            .collect();
        match key {
            Some(k) => {
                occupied.insert(k);
            }
            None => log::debug!("fitness {f:?} lies outside the distinct-failure grid"),
        }
    }
    occupied.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hv_rectangle_and_union() {
        assert_eq!(hypervolume(&[vec![1.0, 1.0]], &[3.0, 3.0]).unwrap(), 4.0);
        assert_eq!(hypervolume(&[vec![1.0, 2.0], vec![2.0, 1.0]], &[3.0, 3.0]).unwrap(), 3.0);
        assert_eq!(hypervolume(&[], &[3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hv_ignores_dominated_and_outside_points() {
        let hv = hypervolume(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![5.0, 0.0]], &[3.0, 3.0]).unwrap();
        assert_eq!(hv, 4.0);
    }

    #[test]
    fn hv_three_objectives() {
        assert_eq!(hypervolume(&[vec![0.0, 0.0, 0.0]], &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        // two unit-offset boxes: 2*1*1 + 1*2*1 - overlap 1*1*1
        let hv = hypervolume(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]], &[2.0, 2.0, 2.0]).unwrap();
        assert!((hv - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hv_rejects_four_objectives() {
        assert!(hypervolume(&[vec![0.0; 4]], &[1.0; 4]).is_err());
    }

    #[test]
    fn gd_cases() {
        assert_eq!(generational_distance(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]), Some(5.0));
        let r = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(generational_distance(&r[..1], &r), Some(0.0));
        assert_eq!(generational_distance(&[], &r), None);
    }

    #[test]
    fn spread_cases() {
        let front: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 4.0 - i as f64]).collect();
        assert_eq!(spread(&front, &front), Some(0.0));
        assert_eq!(spread(&front[..1], &front), None);
        let uneven = vec![vec![0.0, 4.0], vec![0.01, 3.99], vec![0.02, 3.98], vec![0.03, 3.97], vec![4.0, 0.0]];
        assert!(spread(&uneven, &front).unwrap() > 1.0);
    }

    #[test]
    fn distinct_cells() {
        let b = [(0.8, 1.0), (0.1, 3.0)];
        let pts: Vec<&[f64]> = vec![&[0.9, 0.5], &[0.9001, 0.5001]];
        assert_eq!(distinct_failing_count(&pts, &b, 50), 1);
        assert_eq!(cell_index(1.0, (0.8, 1.0), 50), Some(49));
        assert_eq!(cell_index(0.8, (0.8, 1.0), 50), Some(0));
        assert_eq!(cell_index(0.5, (0.0, 1.0), 2), Some(1));
        assert_eq!(cell_index(1.1, (0.8, 1.0), 50), None);
    }

    #[test]
    fn ninety_three_distinct_cells() {
        let pts: Vec<Vec<f64>> = (0..93)
            .map(|i| vec![0.8 + (i % 50) as f64 * 0.004 + 0.001, 0.1 + (i / 50) as f64 * 0.058 + 0.01])
            .collect();
        let views: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        assert_eq!(distinct_failing_count(&views, &[(0.8, 1.0), (0.1, 3.0)], 50), 93);
    }

    #[test]
    fn front_of_one_is_itself() {
        assert_eq!(non_dominated_indices(&[vec![1.0, 2.0]]), vec![0]);
        assert!(non_dominated_indices(&[]).is_empty());
    }
}
