//! Football score prediction from starting lineups.
//!
//! Every fixture is predicted by two independent goal models, one for the
//! home side and one for the away side; their rounded outputs combine into a
//! scoreline. The crate covers the whole path from local CSV files to an
//! evaluation report:
//!
//! - [`ingest`]: fixtures, long-format player statistics and correct-score odds.
//! - [`features`]: walk-forward feature rows for the Players, Lineup Stats and
//!   Team Stats representations.
//! - [`regress`]: linear, k-nearest-neighbour, decision tree, random forest and
//!   support vector regressors behind one train/predict contract.
//! - [`heuristics`]: Home Win, Tradition and Recency baselines plus league tables.
//! - [`predict`]: turning goal models into integer scorelines.
//! - [`evaluate`]: fitness metrics, simulated standings, Kendall tau-b, zone
//!   accuracy, betting backtests, chi-squared importance and rank sums.
//! - [`pipeline`]: the glue that trains and evaluates the full model grid.

pub mod evaluate;
pub mod features;
pub mod heuristics;
pub mod ingest;
pub mod pipeline;
pub mod predict;
pub mod regress;

pub use evaluate::EvalError;
pub use features::{Approach, FeatureBuilder, FeatureError, FeatureMatrix, FeatureSchema, Side};
pub use heuristics::{Heuristic, StandingsTable};
pub use ingest::{Dataset, Fixture, IngestError, PositionGroup, Scoreline};
pub use predict::{PredictError, ScorelinePrediction};
pub use regress::{RegressError, RegressorSpec, Technique, TrainedModel};

/// Hex-encoded SHA-256 of `bytes`.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
