//! CART regression tree.
//!
//! Splits minimize the summed squared error of the two children. Candidate
//! thresholds are midpoints between consecutive distinct feature values and a
//! row goes left when its value is below the threshold. Ties keep the lowest
//! feature index, then the lowest threshold.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_shape, RegressError, Result};

/// Relative margin a later candidate must win by to replace the best split.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            min_leaf: 5,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(RegressError::InvalidHyperparameter("max_depth must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(RegressError::InvalidHyperparameter("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
        rows: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes stored flat; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Left SSE plus right SSE.
    pub sse: f64,
}

/// Sum of squared deviations from the mean, computed in two passes.
pub(crate) fn sse(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (sum, n) = values.clone().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    values.map(|v| (v - mean) * (v - mean)).sum()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Best split of `rows` over `features` (ascending), if any leaves both
/// children with at least `min_leaf` rows.
pub(crate) fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    // Centre targets on the node mean to keep the running sums well conditioned.
    let centre = mean(rows.iter().map(|&r| y[r]));
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let total: f64 = order.iter().map(|&r| y[r] - centre).sum();
        let total_sq: f64 = order.iter().map(|&r| (y[r] - centre).powi(2)).sum();
        let (mut left_sum, mut left_sq) = (0.0, 0.0);
        for i in 0..n - 1 {
            let v = y[order[i]] - centre;
            left_sum += v;
            left_sq += v * v;
            let left_n = i + 1;
            let right_n = n - left_n;
            let lo = x[order[i]][f];
            let hi = x[order[i + 1]][f];
            if lo == hi || left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let right_sq = total_sq - left_sq;
            let cost = (left_sq - left_sum * left_sum / left_n as f64)
                + (right_sq - right_sum * right_sum / right_n as f64);
            let better = match best {
                None => true,
                Some(b) => cost < b.sse - TIE_EPS * (1.0 + b.sse.abs()),
            };
            if better {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    sse: cost.max(0.0),
                });
            }
        }
    }
    best
}

pub(crate) struct Grower<'a, R: Rng> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub params: &'a TreeParams,
    /// Features considered per split; `None` or a count >= width means all.
    pub max_features: Option<usize>,
    pub rng: Option<&'a mut R>,
}

impl<R: Rng> Grower<'_, R> {
    pub fn grow(mut self, rows: Vec<usize>) -> RegressionTree {
        let mut nodes = Vec::new();
        self.node(&mut nodes, rows, 0);
        RegressionTree { nodes }
    }

    fn features(&mut self) -> Vec<usize> {
        let width = self.x[0].len();
        match (self.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < width => {
                let mut f = sample(rng, width, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..width).collect(),
        }
    }

    fn node(&mut self, nodes: &mut Vec<Node>, rows: Vec<usize>, depth: usize) -> usize {
        let id = nodes.len();
        let value = mean(rows.iter().map(|&r| self.y[r]));
        nodes.push(Node::Leaf {
            value,
            rows: rows.len(),
        });

        let first = self.y[rows[0]];
        let constant = rows.iter().all(|&r| self.y[r] == first);
        if depth >= self.params.max_depth || constant {
            return id;
        }
        let features = self.features();
        let Some(split) = best_split(self.x, self.y, &rows, &features, self.params.min_leaf) else {
            return id;
        };
        let node_sse = sse(rows.iter().map(|&r| self.y[r]));
        if split.sse >= node_sse - TIE_EPS * (1.0 + node_sse) {
            return id;
        }
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x[r][split.feature] < split.threshold);
        let l = self.node(nodes, left, depth + 1);
        let r = self.node(nodes, right, depth + 1);
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

impl RegressionTree {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &TreeParams) -> Result<Self> {
        params.validate()?;
        check_shape(x, y)?;
        if x.len() < 2 * params.min_leaf {
            return Err(RegressError::TooFewRows {
                rows: x.len(),
                min_leaf: params.min_leaf,
            });
        }
        let grower: Grower<'_, rand_chacha::ChaCha8Rng> = Grower {
            x,
            y,
            params,
            max_features: None,
            rng: None,
        };
        Ok(grower.grow((0..x.len()).collect()))
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(max_depth: usize, min_leaf: usize) -> TreeParams {
        TreeParams { max_depth, min_leaf }
    }

    #[test]
    fn pure_split_at_the_midpoint() {
        let x = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
        let y = vec![0.0, 0.0, 2.0, 2.0];
        let tree = RegressionTree::fit(&x, &y, &params(6, 1)).unwrap();
        match tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.5);
            }
            ref n => panic!("expected a split, got {n:?}"),
        }
        assert_eq!(tree.leaves(), 2);
        assert_eq!(tree.predict_row(&[0.2]), 0.0);
        assert_eq!(tree.predict_row(&[0.9]), 2.0);
    }

    #[test]
    fn constant_target_is_a_single_leaf() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let tree = RegressionTree::fit(&x, &[1.5; 8], &params(6, 1)).unwrap();
        assert_eq!(tree.nodes, vec![Node::Leaf { value: 1.5, rows: 8 }]);
    }

    #[test]
    fn ties_pick_lowest_feature_then_threshold() {
        // Both columns separate the targets identically.
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let y = vec![0.0, 0.0, 5.0, 5.0];
        let tree = RegressionTree::fit(&x, &y, &params(1, 1)).unwrap();
        assert!(matches!(tree.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 1.5));
    }

    #[test]
    fn min_leaf_respected() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let mut y = vec![0.0; 10];
        y[0] = 100.0;
        let tree = RegressionTree::fit(&x, &y, &params(3, 3)).unwrap();
        for n in &tree.nodes {
            if let Node::Leaf { rows, .. } = n {
                assert!(*rows >= 3);
            }
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        let x = vec![vec![0.0]; 9];
        assert_eq!(
            RegressionTree::fit(&x, &[0.0; 9], &params(6, 5)),
            Err(RegressError::TooFewRows { rows: 9, min_leaf: 5 })
        );
    }

    #[test]
    fn depth_is_capped() {
        let x: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64).collect();
        let tree = RegressionTree::fit(&x, &y, &params(3, 1)).unwrap();
        assert!(tree.depth() <= 3);
    }
}
