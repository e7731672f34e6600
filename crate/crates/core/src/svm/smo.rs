//! Sequential minimal optimization for the soft-margin C-SVM dual
//!
//! ```text
//! min_a  f(a) = 1/2 a^T Q a - e^T a
//! s.t.   y^T a = 0,  0 <= a_t <= C
//! ```
//!
//! with `Q_ij = y_i y_j K_ij`. The working pair is the maximal violating
//! pair over the gradient of `f`.

use serde::{Deserialize, Serialize};

/// Dense symmetric kernel matrix, row-major.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    /// Squared Euclidean distances between all pairs of `points`.
    pub fn squared_distances(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self { n, values }
    }

    /// RBF kernel from a squared-distance matrix.
    pub fn rbf_from_distances(distances: &KernelMatrix, gamma: f64) -> Self {
        Self {
            n: distances.n,
            values: distances.values.iter().map(|d| (-gamma * d).exp()).collect(),
        }
    }

    pub fn rbf(points: &[Vec<f64>], gamma: f64) -> Self {
        Self::rbf_from_distances(&Self::squared_distances(points), gamma)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoParams {
    /// Stop once the maximal KKT violation `m(a) - M(a)` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 10_000,
        }
    }
}

impl SmoParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(format!("tolerance must be positive (got {})", self.tolerance));
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective `e^T a - 1/2 a^T Q a` after every iteration, when
    /// requested.
    pub objective_trace: Option<Vec<f64>>,
}

const TAU: f64 = 1e-12;

/// Solves the dual for labels `y` in `{-1, +1}`.
pub fn solve(kernel: &KernelMatrix, y: &[f64], c: f64, params: &SmoParams, record_trace: bool) -> SmoSolution {
    let n = y.len();
    assert_eq!(kernel.len(), n);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = record_trace.then(Vec::new);

    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y < 0.0 && a < c) || (y > 0.0 && a > 0.0);

    let mut iterations = 0;
    let mut converged = false;
    let mut m_up: f64;
    let mut m_low: f64;
    loop {
        // maximal violating pair
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        m_up = f64::NEG_INFINITY;
        m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m_up {
                m_up = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < m_low {
                m_low = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || m_up - m_low < params.tolerance {
            converged = true;
            break;
        }
        if iterations >= params.max_iterations {
            break;
        }
        iterations += 1;

        let eta = (kernel.get(i, i) + kernel.get(j, j) - 2.0 * kernel.get(i, j)).max(TAU);
        let mut step = (m_up - m_low) / eta;
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        step = step.min(room_i).min(room_j);

        alpha[i] += y[i] * step;
        alpha[j] -= y[j] * step;
        // snap to the box so bound checks stay exact
        for t in [i, j] {
            if alpha[t] < 1e-14 * c {
                alpha[t] = 0.0;
            } else if alpha[t] > c * (1.0 - 1e-14) {
                alpha[t] = c;
            }
        }

        let (ki, kj) = (kernel.row(i), kernel.row(j));
        for t in 0..n {
            grad[t] += step * y[t] * (ki[t] - kj[t]);
        }

        if let Some(trace) = trace.as_mut() {
            trace.push(dual_objective(&alpha, &grad));
        }
    }
    if !converged {
        log::debug!(
            "SMO stopped at the iteration cap {} with violation {:.3e}",
            params.max_iterations,
            m_up - m_low
        );
    }

    // b = -y_i G_i averaged over free vectors, else the midpoint of the
    // feasible interval [m_up, m_low].
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += -y[t] * grad[t];
            free += 1;
        }
    }
    let bias = if free > 0 {
        sum / free as f64
    } else if m_up.is_finite() && m_low.is_finite() {
        0.5 * (m_up + m_low)
    } else if m_up.is_finite() {
        m_up
    } else {
        m_low
    };

    SmoSolution {
        alpha,
        bias,
        iterations,
        converged,
        objective_trace: trace,
    }
}

/// `e^T a - 1/2 a^T Q a`, using `Q a = grad + e`.
fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    alpha.iter().zip(grad).map(|(a, g)| a - 0.5 * a * (g + 1.0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_become_support_vectors() {
        let pts = vec![vec![0.0], vec![1.0]];
        let k = KernelMatrix::rbf(&pts, 1.0);
        let sol = solve(&k, &[1.0, -1.0], 10.0, &SmoParams::default(), false);
        assert!(sol.converged);
        assert!(sol.alpha.iter().all(|&a| a > 0.0));
        assert!((sol.alpha[0] - sol.alpha[1]).abs() < 1e-12);
    }

    #[test]
    fn dual_objective_never_decreases() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()]).collect();
        let y: Vec<f64> = (0..20).map(|i| if (i * 7) % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let k = KernelMatrix::rbf(&pts, 2.0);
        let sol = solve(&k, &y, 5.0, &SmoParams::default(), true);
        let trace = sol.objective_trace.unwrap();
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} then {}", w[0], w[1]);
        }
    }
}
