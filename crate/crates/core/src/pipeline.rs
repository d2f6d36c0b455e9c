//! Training and evaluation of the full model grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluate::{
    actual_standings, bet_run, chi2_importance, fitness_by_side, kendall_tau, overview,
    simulate_standings, zone_accuracy, BettingLedger, EvalError, FeatureRanking, FitnessReport,
    MissingOddsPolicy, OverviewRow, ScenarioScores, Zone,
};
use crate::features::{
    Approach, FeatureBuilder, FeatureError, FeatureSchema, PlayerUniverse, SkippedFixture,
};
use crate::heuristics::{Heuristic, HeuristicError, HeuristicKind, StandingsTable};
use crate::ingest::{Dataset, Side};
use crate::predict::{
    predict_scorelines, ModelPair, PredictError, PredictionBatch, ScorelinePrediction,
    ScorelinePredictor,
};
use crate::regress::{Hyperparameters, RegressError, RegressorSpec, Technique, TrainedModel};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{model}: {source}")]
    Model {
        model: String,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    fn in_model(self, model: &ModelId) -> Self {
        PipelineError::Model {
            model: model.label(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// A machine-learning model (approach and technique) or a heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    Ml(Approach, Technique),
    Heuristic(HeuristicKind),
}

impl ModelId {
    /// The 15 machine-learning models followed by the 3 heuristics.
    pub fn grid() -> Vec<ModelId> {
        let mut ids: Vec<ModelId> = Approach::ALL
            .iter()
            .flat_map(|&a| Technique::ALL.iter().map(move |&t| ModelId::Ml(a, t)))
            .collect();
        ids.extend(HeuristicKind::ALL.iter().map(|&h| ModelId::Heuristic(h)));
        ids
    }

    /// For example "Team Stats KNN" or "Recency".
    pub fn label(&self) -> String {
        match self {
            ModelId::Ml(a, t) => format!("{} {}", a.label(), t.label()),
            ModelId::Heuristic(h) => h.label().to_string(),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelId::Ml(a, t) => write!(f, "{a}:{t}"),
            ModelId::Heuristic(h) => write!(f, "{h}"),
        }
    }
}

impl FromStr for ModelId {
    type Err = String;

    /// Accepts a heuristic name or `approach:technique`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Some((a, t)) = s.split_once(':') {
            return Ok(ModelId::Ml(a.parse()?, t.parse()?));
        }
        s.parse::<HeuristicKind>().map(ModelId::Heuristic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub stake: f64,
    pub missing_odds: MissingOddsPolicy,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            stake: 1.0,
            missing_odds: MissingOddsPolicy::Skip,
        }
    }
}

/// Shared state for training and evaluating against one dataset.
pub struct Workbench<'a> {
    pub dataset: &'a Dataset,
    pub builder: FeatureBuilder<'a>,
    pub actual: StandingsTable,
}

impl<'a> Workbench<'a> {
    /// The player universe for the players approach comes from training lineups.
    pub fn new(dataset: &'a Dataset, schema: &'a FeatureSchema) -> Result<Self> {
        let builder = FeatureBuilder::new(&dataset.stats, schema)
            .with_universe(PlayerUniverse::from_fixtures(dataset.train()));
        let actual = actual_standings(dataset.test())?;
        Ok(Workbench {
            dataset,
            builder,
            actual,
        })
    }

    /// Home and away models for `approach`, plus the training fixtures skipped.
    pub fn train_pair(
        &self,
        approach: Approach,
        spec: &RegressorSpec,
    ) -> Result<(ModelPair, Vec<SkippedFixture>)> {
        let mut skipped = Vec::new();
        let mut fit_side = |side: Side| -> Result<TrainedModel> {
            let matrix = self
                .builder
                .build_matrix(self.dataset.train(), approach, side)?;
            let (x, y) = matrix.labelled();
            let fingerprint = matrix.fingerprint();
            let model = TrainedModel::fit(spec, matrix.columns, fingerprint, &x, &y)?;
            for s in matrix.skipped {
                if !skipped.iter().any(|k: &SkippedFixture| k.fixture_id == s.fixture_id) {
                    skipped.push(s);
                }
            }
            Ok(model)
        };
        let home = fit_side(Side::Home)?;
        let away = fit_side(Side::Away)?;
        Ok((
            ModelPair {
                approach,
                home,
                away,
            },
            skipped,
        ))
    }

    pub fn heuristic(&self, kind: HeuristicKind) -> Result<Heuristic> {
        Ok(Heuristic::build(kind, self.dataset.train(), &self.dataset.fixtures)?)
    }

    /// Test-set predictions for `pair`.
    pub fn predict_pair(&self, pair: &ModelPair) -> Result<PredictionBatch> {
        Ok(predict_scorelines(pair, self.dataset.test(), &self.builder)?)
    }

    /// Scores a batch of test-set predictions in every scenario.
    pub fn evaluate(
        &self,
        model: &str,
        batch: PredictionBatch,
        settings: &EvalSettings,
    ) -> Result<ModelReport> {
        let fitness = fitness_by_side(&batch.predictions)?;
        let standings = simulate_standings(self.actual.teams(), &batch.predictions)?;
        let tau = kendall_tau(&standings, &self.actual)?;
        let top4 = zone_accuracy(&standings, &self.actual, Zone::Top4)?;
        let relegation = zone_accuracy(&standings, &self.actual, Zone::Bottom3)?;
        let betting = bet_run(
            &batch.predictions,
            &self.dataset.odds,
            settings.stake,
            settings.missing_odds,
        );
        Ok(ModelReport {
            model: model.to_string(),
            predictions: batch.predictions,
            skipped: batch.skipped,
            fitness,
            standings,
            tau,
            top4,
            relegation,
            betting,
        })
    }

    /// Trains (if needed), predicts and evaluates one model.
    pub fn run_model(
        &self,
        id: ModelId,
        hyperparameters: &Hyperparameters,
        seed: u64,
        settings: &EvalSettings,
    ) -> Result<ModelReport> {
        let run = || -> Result<ModelReport> {
            let batch = match id {
                ModelId::Ml(approach, technique) => {
                    let spec = RegressorSpec {
                        technique,
                        hyperparameters: hyperparameters.clone(),
                        seed,
                    };
                    let (pair, _) = self.train_pair(approach, &spec)?;
                    self.predict_pair(&pair)?
                }
                ModelId::Heuristic(kind) => self.heuristic(kind)?.predict_batch(self.dataset.test())?,
            };
            self.evaluate(&id.label(), batch, settings)
        };
        run().map_err(|e| e.in_model(&id))
    }

    /// Chi-squared ranking of `approach` features over the training rows.
    pub fn importance(&self, approach: Approach, side: Side) -> Result<FeatureRanking> {
        let matrix = self
            .builder
            .build_matrix(self.dataset.train(), approach, side)?;
        let (x, y) = matrix.labelled();
        let targets: Vec<u32> = y.iter().map(|&g| g as u32).collect();
        Ok(chi2_importance(&matrix.columns, &x, &targets)?)
    }

    /// Every model in `ids`, evaluated in parallel, plus the rank-sum overview.
    pub fn run_grid(
        &self,
        ids: &[ModelId],
        hyperparameters: &Hyperparameters,
        seed: u64,
        settings: &EvalSettings,
    ) -> Result<GridReport> {
        let reports = ids
            .par_iter()
            .map(|&id| self.run_model(id, hyperparameters, seed, settings))
            .collect::<Result<Vec<_>>>()?;
        let scores: Vec<ScenarioScores> = reports.iter().map(ModelReport::scenario_scores).collect();
        let overview = overview(&scores)?;
        Ok(GridReport {
            actual: self.actual.clone(),
            reports,
            overview,
        })
    }
}

/// Everything measured for one model on the test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub predictions: Vec<ScorelinePrediction>,
    pub skipped: Vec<SkippedFixture>,
    pub fitness: [FitnessReport; 2],
    pub standings: StandingsTable,
    pub tau: Option<f64>,
    pub top4: f64,
    pub relegation: f64,
    pub betting: BettingLedger,
}

impl ModelReport {
    pub fn scenario_scores(&self) -> ScenarioScores {
        ScenarioScores {
            model: self.model.clone(),
            home_mae: self.fitness[0].mae,
            away_mae: self.fitness[1].mae,
            net_earnings: self.betting.net_earnings,
            tau: self.tau,
            top4: self.top4,
            relegation: self.relegation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub actual: StandingsTable,
    pub reports: Vec<ModelReport>,
    pub overview: Vec<OverviewRow>,
}
