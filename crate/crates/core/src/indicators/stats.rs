use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of nonzero differences handled with the exact null
/// distribution; above it the tie-corrected normal approximation is used.
pub const EXACT_LIMIT: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Sum of the ranks of negative differences.
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    /// Two-sided.
    pub p_value: f64,
    pub exact: bool,
}

/// Average ranks of `|d|`, 1-based.
fn abs_ranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Paired two-sided Wilcoxon signed-rank test of `a` against `b`.
///
/// Zero differences are dropped. Up to [`EXACT_LIMIT`] remaining pairs the
/// p-value comes from the exact permutation distribution of the positive
/// rank sum (ties handled through average ranks); beyond that from the
/// normal approximation with tie correction. All-zero differences give
/// `p = 1`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            n: 0,
            p_value: 1.0,
            exact: true,
        });
    }
    let ranks = abs_ranks(&diffs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;

    if n <= EXACT_LIMIT {
        // Ranks are multiples of 1/2; count sign assignments per doubled sum.
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut counts = vec![0u64; max_sum + 1];
        counts[0] = 1;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let observed = (w_plus * 2.0).round() as usize;
        let all = (1u64 << n) as f64;
        let lower: u64 = counts[..=observed].iter().sum();
        let upper: u64 = counts[observed..].iter().sum();
        let p_value = (2.0 * lower.min(upper) as f64 / all).min(1.0);
        return Ok(WilcoxonResult {
            w_plus,
            w_minus,
            n,
            p_value,
            exact: true,
        });
    }

    let nf = n as f64;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = (w_plus - mean) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
    };
    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        n,
        p_value,
        exact: false,
    })
}

/// Vargha-Delaney `A12`: probability that a value drawn from `a` exceeds one
/// drawn from `b`, counting ties as one half.
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "A12 needs two nonempty samples");
    let mut wins = 0.0;
    for x in a {
        for y in b {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    wins / (a.len() * b.len()) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectMagnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

pub fn a12_magnitude(a12: f64) -> EffectMagnitude {
    let scaled = a12.max(1.0 - a12);
    if scaled < 0.56 {
        EffectMagnitude::Negligible
    } else if scaled < 0.64 {
        EffectMagnitude::Small
    } else if scaled < 0.71 {
        EffectMagnitude::Medium
    } else {
        EffectMagnitude::Large
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(vargha_delaney_a12(&a, &a), 0.5);
    }

    #[test]
    fn all_positive_ten() {
        let a: Vec<f64> = (1..=10).map(|i| i as f64 + 100.0).collect();
        let b: Vec<f64> = (1..=10).map(|i| i as f64 * 0.5).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.w_plus, 55.0);
        assert!((r.p_value - 2.0 / 1024.0).abs() < 1e-15);
    }

    #[test]
    fn a12_examples() {
        assert_eq!(vargha_delaney_a12(&[5.0, 6.0], &[1.0, 2.0]), 1.0);
        assert_eq!(vargha_delaney_a12(&[1.0, 2.0], &[1.0, 3.0]), 0.375);
        assert_eq!(a12_magnitude(0.375), EffectMagnitude::Small);
        assert_eq!(a12_magnitude(0.5), EffectMagnitude::Negligible);
        assert_eq!(a12_magnitude(0.9), EffectMagnitude::Large);
        assert_eq!(a12_magnitude(0.66), EffectMagnitude::Medium);
    }

    #[test]
    fn large_sample_uses_normal_approximation() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).sin() + 0.5).collect();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos()).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!r.exact);
        assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn length_mismatch_is_error() {
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }
}
