use serde::{Deserialize, Serialize};

use super::{check_shape, RegressError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(RegressError::InvalidHyperparameter("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Unweighted mean of the k nearest training targets (Euclidean distance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &KnnParams) -> Result<Self> {
        params.validate()?;
        check_shape(x, y)?;
        if params.k > x.len() {
            return Err(RegressError::KTooLarge {
                k: params.k,
                rows: x.len(),
            });
        }
        Ok(KnnModel {
            k: params.k,
            rows: x.to_vec(),
            targets: y.to_vec(),
        })
    }

    /// Training indices of the k nearest rows; equal distances keep the lower index.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let d: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
            dist.truncate(self.k);
        }
        dist.sort_by(by_distance);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, query: &[f64]) -> f64 {
        let idx = self.neighbours(query);
        idx.iter().map(|&i| self.targets[i]).sum::<f64>() / idx.len() as f64
    }
}
