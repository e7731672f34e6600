//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a` is no worse everywhere and better somewhere (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Indices of points not dominated by any other point, ascending.
pub fn brute_force_front(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !(0..points.len()).any(|j| j != i && dominates(&points[j], &points[i])))
        .collect()
}

/// Random objective vectors on a coarse grid so ties and duplicates occur.
pub fn random_points(rng: &mut TestRng, n: usize, m: usize, levels: u32) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..m).map(|_| f64::from(rng.random_range(0..levels))).collect())
        .collect()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Monte Carlo estimate of the volume dominated by `front` inside the box
/// spanned by the componentwise minimum of `front` and `reference`.
pub fn monte_carlo_hv(front: &[Vec<f64>], reference: &[f64], samples: usize, rng: &mut TestRng) -> f64 {
    let m = reference.len();
    let lower: Vec<f64> = (0..m)
        .map(|d| front.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = (0..m).map(|d| reference[d] - lower[d]).product();
    let mut hits = 0usize;
    let mut x = vec![0.0; m];
    for _ in 0..samples {
        for d in 0..m {
            x[d] = lower[d] + rng.random::<f64>() * (reference[d] - lower[d]);
        }
        if front.iter().any(|p| p.iter().zip(&x).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    box_volume * hits as f64 / samples as f64
}

pub fn brute_gd(front: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for p in front {
        let mut best = f64::INFINITY;
        for r in reference {
            let d = euclid(p, r);
            if d < best {
                best = d;
            }
        }
        total += best;
    }
    total / front.len() as f64
}

/// Deb's spread written out directly from its definition.
pub fn brute_spread(front: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    let mut f = front.to_vec();
    f.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    let mut r = reference.to_vec();
    r.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    let n = f.len();
    let mut d = Vec::new();
    for i in 0..n - 1 {
        d.push(euclid(&f[i], &f[i + 1]));
    }
    let mean: f64 = d.iter().sum::<f64>() / (n - 1) as f64;
    let df = euclid(&r[0], &f[0]);
    let dl = euclid(&r[r.len() - 1], &f[n - 1]);
    let mut dev = 0.0;
    for di in &d {
        dev += (di - mean).abs();
    }
    (df + dl + dev) / (df + dl + (n - 1) as f64 * mean)
}

/// Two-sided signed-rank p-value by enumerating all `2^n` sign patterns.
pub fn enumerated_wilcoxon_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    // average ranks of |d|
    let mut ranks = vec![0.0; n];
    for i in 0..n {
        let less = d.iter().filter(|v| v.abs() < d[i].abs()).count();
        let equal = d.iter().filter(|v| v.abs() == d[i].abs()).count();
        ranks[i] = less as f64 + (equal as f64 + 1.0) / 2.0;
    }
    let observed: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

/// Standardization identical in definition to the library's (population
/// variance), recomputed here.
pub fn standardize(points: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = points.len() as f64;
    (0..points[0].len())
        .map(|d| {
            let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
            let sd = (points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n).sqrt();
            (mean, if sd > 1e-12 { sd } else { 1.0 })
        })
        .collect()
}

pub fn apply_scaling(s: &[(f64, f64)], x: &[f64]) -> Vec<f64> {
    x.iter().zip(s).map(|(v, (o, sd))| (v - o) / sd).collect()
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

/// Euclidean projection onto `{0 <= a <= c, y.a = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> (Vec<f64>, f64) {
        let a: Vec<f64> = v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect();
        let s = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
        (a, s)
    };
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // y.a(lambda) is nonincreasing in lambda
        if at(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi)).0
}

/// Dual SVM by accelerated projected gradient. Returns `(alpha, bias)`.
pub fn projected_gradient_svm(k: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> (Vec<f64>, f64) {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let mut alpha = vec![0.0; n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        // ascent on e.a - a.Q.a / 2
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()).collect();
        let v: Vec<f64> = (0..n).map(|i| z[i] + step * grad[i]).collect();
        let next = project(&v, y, c);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..n)
            .map(|i| next[i] + (t - 1.0) / t_next * (next[i] - alpha[i]))
            .collect();
        alpha = next;
        t = t_next;
    }
    let margin = |i: usize| y[i] - (0..n).map(|j| alpha[j] * y[j] * k[j][i]).sum::<f64>();
    let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 1e-6 * c && alpha[i] < c * (1.0 - 1e-6)).collect();
    let bias = if free.is_empty() {
        // midpoint of the interval allowed by the bound multipliers
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let at_upper = alpha[i] >= c * (1.0 - 1e-6);
            let m = margin(i);
            if (y[i] > 0.0) != at_upper {
                lo = lo.max(m);
            } else {
                hi = hi.min(m);
            }
        }
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo
        } else {
            hi
        }
    } else {
        free.iter().map(|&i| margin(i)).sum::<f64>() / free.len() as f64
    };
    (alpha, bias)
}
