use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Grower, RegressionTree, TreeParams};
use super::{check_shape, RegressError, Result};

/// Features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    /// `ceil(sqrt(p))`.
    #[default]
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, width: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (width as f64).sqrt().ceil() as usize,
            MaxFeatures::All => width,
            MaxFeatures::Count(n) => n.min(width),
        }
        .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Resample size as a fraction of the training rows.
    pub bootstrap_fraction: f64,
    pub max_features: MaxFeatures,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            bootstrap_fraction: 1.0,
            max_features: MaxFeatures::Sqrt,
            tree: TreeParams::default(),
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(RegressError::InvalidHyperparameter("n_trees must be at least 1".into()));
        }
        if !(self.bootstrap_fraction > 0.0 && self.bootstrap_fraction <= 1.0) {
            return Err(RegressError::InvalidHyperparameter(
                "bootstrap_fraction must lie in (0, 1]".into(),
            ));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(RegressError::InvalidHyperparameter("max_features must be at least 1".into()));
        }
        self.tree.validate()
    }
}

/// Bagged regression trees; the prediction is the mean over trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let width = check_shape(x, y)?;
        let n = x.len();
        let sample_size = if params.bootstrap {
            ((params.bootstrap_fraction * n as f64).round() as usize).max(1)
        } else {
            n
        };
        if sample_size < 2 * params.tree.min_leaf {
            return Err(RegressError::TooFewRows {
                rows: sample_size,
                min_leaf: params.tree.min_leaf,
            });
        }
        let max_features = params.max_features.resolve(width);

        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let tree_seeds: Vec<u64> = (0..params.n_trees).map(|_| master.random()).collect();
        let trees = tree_seeds
            .into_par_iter()
            .map(|tree_seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..sample_size).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Grower {
                    x,
                    y,
                    params: &params.tree,
                    max_features: Some(max_features),
                    rng: Some(&mut rng),
                }
                .grow(rows)
            })
            .collect();
        Ok(RandomForest { trees })
    }

    /// Mean of the given per-tree predictions.
    pub fn combine(predictions: &[f64]) -> f64 {
        predictions.iter().sum::<f64>() / predictions.len() as f64
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let per_tree: Vec<f64> = self.trees.iter().map(|t| t.predict_row(row)).collect();
        Self::combine(&per_tree)
    }
}
