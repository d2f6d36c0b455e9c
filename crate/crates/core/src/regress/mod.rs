//! Regression engines for goals-scored models.
//!
//! [`TrainedModel::fit`] wraps each engine with its feature scaling and the
//! fingerprint of the column layout it was trained on, so a model cannot be
//! fed rows built from a different schema or player universe.

mod forest;
mod knn;
mod linear;
mod scaler;
mod svr;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use forest::{ForestParams, MaxFeatures, RandomForest};
pub use knn::{KnnModel, KnnParams};
pub use linear::{LinearModel, LinearParams, RIDGE_FALLBACK};
pub use scaler::Scaler;
pub use svr::{linear_objective, Kernel, SvrFunction, SvrModel, SvrParams, SvrStatus};
pub use tree::{Node, RegressionTree, TreeParams};

/// Bumped whenever the serialized model layout changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RegressError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("k = {k} exceeds the {rows} training rows")]
    KTooLarge { k: usize, rows: usize },
    #[error("{rows} rows cannot be split with min_leaf = {min_leaf}")]
    TooFewRows { rows: usize, min_leaf: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("rows were built for a different feature layout")]
    SchemaMismatch,
    #[error("empty training set")]
    Empty,
}

pub type Result<T, E = RegressError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Lr,
    Knn,
    Dtr,
    Rfr,
    Svr,
}

impl Technique {
    pub const ALL: [Technique; 5] = [
        Technique::Lr,
        Technique::Knn,
        Technique::Dtr,
        Technique::Rfr,
        Technique::Svr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Lr => "lr",
            Technique::Knn => "knn",
            Technique::Dtr => "dtr",
            Technique::Rfr => "rfr",
            Technique::Svr => "svr",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Technique::Lr => "LR",
            Technique::Knn => "KNN",
            Technique::Dtr => "DTR",
            Technique::Rfr => "RFR",
            Technique::Svr => "SVR",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown technique {s:?}"))
    }
}

/// Hyperparameters for every technique; only the selected one is read.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub lr: LinearParams,
    pub knn: KnnParams,
    pub dtr: TreeParams,
    pub rfr: ForestParams,
    pub svr: SvrParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub technique: Technique,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl RegressorSpec {
    pub fn new(technique: Technique) -> Self {
        RegressorSpec {
            technique,
            hyperparameters: Hyperparameters::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyperparameters;
        match self.technique {
            Technique::Lr => Ok(()),
            Technique::Knn => h.knn.validate(),
            Technique::Dtr => h.dtr.validate(),
            Technique::Rfr => h.rfr.validate(),
            Technique::Svr => h.svr.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Engine {
    Linear(LinearModel),
    Knn(KnnModel),
    Tree(RegressionTree),
    Forest(RandomForest),
    Svr(SvrModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub spec: RegressorSpec,
    pub columns: Vec<String>,
    pub fingerprint: String,
    /// Present for engines that consume standardized features.
    pub scaler: Option<Scaler>,
    pub engine: Engine,
    pub training_rows: usize,
}

pub(crate) fn check_shape(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(RegressError::Empty);
    }
    if x.len() != y.len() {
        return Err(RegressError::DimensionMismatch(format!(
            "{} rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    let width = x[0].len();
    if let Some(bad) = x.iter().position(|r| r.len() != width) {
        return Err(RegressError::DimensionMismatch(format!(
            "row {bad} has {} columns, expected {width}",
            x[bad].len()
        )));
    }
    Ok(width)
}

impl TrainedModel {
    /// Fits `spec` on rows laid out as `columns` (identified by `fingerprint`).
    pub fn fit(
        spec: &RegressorSpec,
        columns: Vec<String>,
        fingerprint: String,
        x: &[Vec<f64>],
        y: &[f64],
    ) -> Result<Self> {
        spec.validate()?;
        let width = check_shape(x, y)?;
        if width != columns.len() {
            return Err(RegressError::DimensionMismatch(format!(
                "{width} feature values for {} columns",
                columns.len()
            )));
        }
        let h = &spec.hyperparameters;
        let standardize = match spec.technique {
            Technique::Knn | Technique::Svr => true,
            Technique::Lr => h.lr.standardize,
            Technique::Dtr | Technique::Rfr => false,
        };
        let scaler = standardize.then(|| Scaler::fit(x));
        let scaled;
        let inputs = match &scaler {
            Some(s) => {
                scaled = s.transform(x);
                &scaled
            }
            None => x,
        };
        let engine = match spec.technique {
            Technique::Lr => Engine::Linear(LinearModel::fit(inputs, y)?),
            Technique::Knn => Engine::Knn(KnnModel::fit(inputs, y, &h.knn)?),
            Technique::Dtr => Engine::Tree(RegressionTree::fit(inputs, y, &h.dtr)?),
            Technique::Rfr => Engine::Forest(RandomForest::fit(inputs, y, &h.rfr, spec.seed)?),
            Technique::Svr => Engine::Svr(SvrModel::fit(inputs, y, &h.svr)?),
        };
        Ok(TrainedModel {
            version: MODEL_FORMAT_VERSION,
            spec: spec.clone(),
            columns,
            fingerprint,
            scaler,
            engine,
            training_rows: x.len(),
        })
    }

    /// Un-rounded predictions for rows laid out as `fingerprint`.
    pub fn predict(&self, fingerprint: &str, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if fingerprint != self.fingerprint {
            return Err(RegressError::SchemaMismatch);
        }
        if let Some(bad) = x.iter().position(|r| r.len() != self.columns.len()) {
            return Err(RegressError::DimensionMismatch(format!(
                "row {bad} has {} columns, model expects {}",
                x[bad].len(),
                self.columns.len()
            )));
        }
        let scaled;
        let inputs = match &self.scaler {
            Some(s) => {
                scaled = s.transform(x);
                &scaled
            }
            None => x,
        };
        Ok(inputs.iter().map(|row| self.predict_row(row)).collect())
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.engine {
            Engine::Linear(m) => m.predict_row(row),
            Engine::Knn(m) => m.predict_row(row),
            Engine::Tree(m) => m.predict_row(row),
            Engine::Forest(m) => m.predict_row(row),
            Engine::Svr(m) => m.predict_row(row),
        }
    }

    pub fn technique(&self) -> Technique {
        self.spec.technique
    }

    /// Solver status for SVR models.
    pub fn svr_status(&self) -> Option<&SvrStatus> {
        match &self.engine {
            Engine::Svr(m) => Some(&m.status),
            _ => None,
        }
    }

    /// Ridge strength used when the normal equations were singular.
    pub fn ridge_lambda(&self) -> Option<f64> {
        match &self.engine {
            Engine::Linear(m) => m.ridge_lambda,
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
