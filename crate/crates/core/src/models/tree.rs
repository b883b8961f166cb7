//! CART regression tree with variance-reduction splits.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::FACTOR_COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<u32>,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: Some(4), min_leaf: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { value: f64 },
    /// Rows with `x[factor] <= threshold` go left.
    Split { factor: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes in an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split { factor, threshold, left, right } => {
                    at = if x[factor] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

struct Candidate {
    factor: usize,
    threshold: f64,
    gain: f64,
}

struct Builder<'a> {
    rows: &'a [[f64; FACTOR_COUNT]],
    y: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: u32) -> usize {
        let at = self.nodes.len();
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(TreeNode::Leaf { value: mean });
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        if pure || !depth_ok || idx.len() < 2 * self.params.min_leaf {
            return at;
        }
        let Some(best) = self.best_split(idx) else {
            return at;
        };
        let (factor, threshold) = (best.factor, best.threshold);
        // Stable partition: original row order is kept on both sides.
        let (mut lo, mut hi): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][factor] <= threshold);
        let left = self.grow(&mut lo, depth + 1);
        let right = self.grow(&mut hi, depth + 1);
        self.nodes[at] = TreeNode::Split { factor, threshold, left, right };
        at
    }

    /// Split maximizing the between-group sum of squares
    /// `n_l · n_r / n · (mean_l − mean_r)²`, which equals the reduction in
    /// within-node squared error.
    fn best_split(&self, idx: &mut [usize]) -> Option<Candidate> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf;
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mut best: Option<Candidate> = None;
        for factor in 0..FACTOR_COUNT {
            idx.sort_by(|&a, &b| self.rows[a][factor].total_cmp(&self.rows[b][factor]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 1..n {
                left_sum += self.y[idx[k - 1]];
                let (xl, xr) = (self.rows[idx[k - 1]][factor], self.rows[idx[k]][factor]);
                if k < min_leaf || n - k < min_leaf || xl == xr {
                    continue;
                }
                let (nl, nr) = (k as f64, (n - k) as f64);
                let diff = left_sum / nl - (total - left_sum) / nr;
                let gain = nl * nr / n as f64 * diff * diff;
                let better = match &best {
                    None => gain > 0.0,
                    Some(b) => gain > b.gain * (1.0 + 1e-12),
                };
                if better {
                    best = Some(Candidate { factor, threshold: 0.5 * (xl + xr), gain });
                }
            }
        }
        best
    }
}

pub(crate) fn fit(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &TreeParams) -> RegressionTree {
    let mut builder = Builder { rows, y, params, nodes: Vec::new() };
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    builder.grow(&mut idx, 0);
    RegressionTree { nodes: builder.nodes }
}
