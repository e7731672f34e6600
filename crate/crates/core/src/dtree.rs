//! CART classification tree over test inputs (Gini impurity, axis-aligned
//! splits). Leaves carry the sub-box of the domain they cover.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{EvaluatedTest, SearchDomain};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DtConfig {
    /// A leaf is critical when its failing fraction reaches this value.
    pub criticality_threshold: f64,
    pub min_impurity_decrease: f64,
    pub min_leaf_size: usize,
    pub max_depth: usize,
}

impl Default for DtConfig {
    fn default() -> Self {
        Self {
            criticality_threshold: 0.5,
            min_impurity_decrease: 0.01,
            min_leaf_size: 5,
            max_depth: 8,
        }
    }
}

impl DtConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.criticality_threshold > 0.0 && self.criticality_threshold <= 1.0) {
            return Err(format!(
                "criticality_threshold must lie in (0, 1] (got {})",
                self.criticality_threshold
            ));
        }
        if self.min_impurity_decrease.is_nan() || self.min_impurity_decrease < 0.0 {
            return Err("min_impurity_decrease must be nonnegative".into());
        }
        if self.min_leaf_size == 0 {
            return Err("min_leaf_size must be positive".into());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub failing: usize,
    pub passing: usize,
    pub region: SearchDomain,
}

impl Leaf {
    pub fn failing_fraction(&self) -> f64 {
        let total = self.failing + self.passing;
        if total == 0 {
            0.0
        } else {
            self.failing as f64 / total as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode {
    Split {
        dimension: usize,
        /// Points with `x[dimension] <= threshold` go left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf(Leaf),
}

/// Gini impurity of a two-class node.
pub fn gini(failing: usize, passing: usize) -> f64 {
    let n = (failing + passing) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = failing as f64 / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct BestSplit {
    dimension: usize,
    threshold: f64,
    decrease: f64,
}

fn best_split(points: &[&[f64]], failing: &[bool], cfg: &DtConfig) -> Option<BestSplit> {
    let n = points.len();
    let total_fail = failing.iter().filter(|&&f| f).count();
    let parent = gini(total_fail, n - total_fail);
    let dim = points[0].len();
    let mut best: Option<BestSplit> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        order.sort_by(|&a, &b| points[a][d].total_cmp(&points[b][d]));
        let mut left_fail = 0;
        for k in 0..n - 1 {
            left_fail += usize::from(failing[order[k]]);
            let (lo, hi) = (points[order[k]][d], points[order[k + 1]][d]);
            if lo == hi {
                continue;
            }
            let left = k + 1;
            let right = n - left;
            if left < cfg.min_leaf_size || right < cfg.min_leaf_size {
                continue;
            }
            let weighted = (left as f64 * gini(left_fail, left - left_fail)
                + right as f64 * gini(total_fail - left_fail, right - (total_fail - left_fail)))
                / n as f64;
            let decrease = parent - weighted;
            if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(BestSplit {
                    dimension: d,
                    threshold: 0.5 * (lo + hi),
                    decrease,
                });
            }
        }
    }
    best.filter(|b| b.decrease > 0.0 && b.decrease >= cfg.min_impurity_decrease)
}

fn grow(points: &[&[f64]], failing: &[bool], region: SearchDomain, depth: usize, cfg: &DtConfig) -> TreeNode {
    let fail = failing.iter().filter(|&&f| f).count();
    let leaf = |region| {
        TreeNode::Leaf(Leaf {
            failing: fail,
            passing: points.len() - fail,
            region,
        })
    };
    if fail == 0 || fail == points.len() || depth >= cfg.max_depth || points.len() < 2 * cfg.min_leaf_size {
        return leaf(region);
    }
    let Some(split) = best_split(points, failing, cfg) else {
        return leaf(region);
    };
    let (mut lp, mut lf, mut rp, mut rf) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (p, &f) in points.iter().zip(failing) {
        if p[split.dimension] <= split.threshold {
            lp.push(*p);
            lf.push(f);
        } else {
            rp.push(*p);
            rf.push(f);
        }
    }
    let mut lb = region.bounds().to_vec();
    let mut rb = lb.clone();
    lb[split.dimension].1 = split.threshold;
    rb[split.dimension].0 = split.threshold;
    let (Ok(lr), Ok(rr)) = (SearchDomain::new(lb), SearchDomain::new(rb)) else {
        // threshold coincides with the region boundary
        return leaf(region);
    };
    TreeNode::Split {
        dimension: split.dimension,
        threshold: split.threshold,
        left: Box::new(grow(&lp, &lf, lr, depth + 1, cfg)),
        right: Box::new(grow(&rp, &rf, rr, depth + 1, cfg)),
    }
}

/// Greedy Gini tree over `points` labeled by `failing`, rooted at `domain`.
pub fn fit(points: &[Vec<f64>], failing: &[bool], cfg: &DtConfig, domain: &SearchDomain) -> Result<TreeNode> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("decision tree needs at least one training point".into()));
    }
    if points.len() != failing.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            actual: failing.len(),
        });
    }
    let views: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
    Ok(grow(&views, failing, domain.clone(), 0, cfg))
}

pub fn fit_tests(tests: &[EvaluatedTest], cfg: &DtConfig, domain: &SearchDomain) -> Result<TreeNode> {
    let points: Vec<Vec<f64>> = tests.iter().map(|t| t.input().values().to_vec()).collect();
    let labels: Vec<bool> = tests.iter().map(EvaluatedTest::is_failing).collect();
    fit(&points, &labels, cfg, domain)
}

impl TreeNode {
    /// Leaves in depth-first, left-to-right order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                TreeNode::Leaf(l) => out.push(l),
                TreeNode::Split { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        out
    }

    /// Index (into [`TreeNode::leaves`]) of the leaf `x` routes to.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        fn count(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf(_) => 1,
                TreeNode::Split { left, right, .. } => count(left) + count(right),
            }
        }
        let mut node = self;
        let mut offset = 0;
        loop {
            match node {
                TreeNode::Leaf(_) => return offset,
                TreeNode::Split {
                    dimension,
                    threshold,
                    left,
                    right,
                } => {
                    if x[*dimension] <= *threshold {
                        node = left;
                    } else {
                        offset += count(left);
                        node = right;
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match self {
            TreeNode::Leaf(l) => {
                write!(f, "{pad}leaf failing={} passing={} box=", l.failing, l.passing)?;
                for (i, (lo, hi)) in l.region.bounds().iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "[{lo},{hi}]")?;
                }
                writeln!(f)
            }
            TreeNode::Split {
                dimension,
                threshold,
                left,
                right,
            } => {
                writeln!(f, "{pad}split x_{} <= {threshold}", dimension + 1)?;
                left.write_indented(f, depth + 1)?;
                right.write_indented(f, depth + 1)
            }
        }
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Leaves whose failing fraction reaches the criticality threshold.
pub fn critical_leaves<'a>(tree: &'a TreeNode, cfg: &DtConfig) -> Vec<&'a Leaf> {
    tree.leaves()
        .into_iter()
        .filter(|l| l.failing > 0 && l.failing_fraction() >= cfg.criticality_threshold)
        .collect()
}
