//! Scoreline prediction from a pair of goal models or a heuristic.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::features::{Approach, FeatureBuilder, FeatureError, SkippedFixture};
use crate::heuristics::Heuristic;
use crate::ingest::{Fixture, Scoreline, Side};
use crate::regress::{RegressError, TrainedModel};

#[derive(Debug, thiserror::Error)]
pub enum PredictError {
    #[error("raw prediction {0} is not finite")]
    NonFinite(f64),
    #[error("no fixtures to predict")]
    EmptyTestSet,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error("writing predictions: {0}")]
    Csv(#[from] csv::Error),
}

/// Goals from a raw model output: negatives clamp to 0, halves round up.
pub fn round_goals(raw: f64) -> Result<u32, PredictError> {
    if !raw.is_finite() {
        return Err(PredictError::NonFinite(raw));
    }
    if raw <= 0.0 {
        return Ok(0);
    }
    Ok((raw + 0.5).floor().min(f64::from(u32::MAX)) as u32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorelinePrediction {
    pub fixture_id: String,
    pub model: String,
    pub home_team: String,
    pub away_team: String,
    pub raw_home: f64,
    pub raw_away: f64,
    pub pred_home: u32,
    pub pred_away: u32,
    pub actual_home: Option<u32>,
    pub actual_away: Option<u32>,
}

impl ScorelinePrediction {
    /// Rounds `raw` into a prediction for `fixture`.
    pub fn from_raw(
        model: &str,
        fixture: &Fixture,
        raw_home: f64,
        raw_away: f64,
    ) -> Result<Self, PredictError> {
        Ok(ScorelinePrediction {
            fixture_id: fixture.fixture_id.clone(),
            model: model.to_string(),
            home_team: fixture.home_team.clone(),
            away_team: fixture.away_team.clone(),
            raw_home,
            raw_away,
            pred_home: round_goals(raw_home)?,
            pred_away: round_goals(raw_away)?,
            actual_home: fixture.goals(Side::Home),
            actual_away: fixture.goals(Side::Away),
        })
    }

    pub fn predicted(&self) -> Scoreline {
        Scoreline::new(self.pred_home, self.pred_away)
    }

    pub fn actual(&self) -> Option<Scoreline> {
        Some(Scoreline::new(self.actual_home?, self.actual_away?))
    }

    pub fn raw(&self, side: Side) -> f64 {
        match side {
            Side::Home => self.raw_home,
            Side::Away => self.raw_away,
        }
    }

    pub fn actual_goals(&self, side: Side) -> Option<u32> {
        match side {
            Side::Home => self.actual_home,
            Side::Away => self.actual_away,
        }
    }
}

/// Predictions in fixture order plus the fixtures that could not be predicted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionBatch {
    pub predictions: Vec<ScorelinePrediction>,
    pub skipped: Vec<SkippedFixture>,
}

/// Anything that turns fixtures into scorelines.
pub trait ScorelinePredictor {
    fn label(&self) -> String;

    fn predict_batch(&self, fixtures: &[Fixture]) -> Result<PredictionBatch, PredictError>;
}

impl ScorelinePredictor for Heuristic {
    fn label(&self) -> String {
        self.kind().label().to_string()
    }

    fn predict_batch(&self, fixtures: &[Fixture]) -> Result<PredictionBatch, PredictError> {
        if fixtures.is_empty() {
            return Err(PredictError::EmptyTestSet);
        }
        let label = self.label();
        let predictions = fixtures
            .iter()
            .map(|f| {
                let s = self.predict(f);
                ScorelinePrediction::from_raw(&label, f, f64::from(s.home), f64::from(s.away))
            })
            .collect::<Result<_, _>>()?;
        Ok(PredictionBatch {
            predictions,
            skipped: Vec::new(),
        })
    }
}

/// Home-goals and away-goals models trained on one approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPair {
    pub approach: Approach,
    pub home: TrainedModel,
    pub away: TrainedModel,
}

impl ModelPair {
    pub fn model(&self, side: Side) -> &TrainedModel {
        match side {
            Side::Home => &self.home,
            Side::Away => &self.away,
        }
    }

    /// For example "Lineup Stats SVR".
    pub fn label(&self) -> String {
        format!("{} {}", self.approach.label(), self.home.technique().label())
    }
}

/// Raw goal predictions for one side, keyed by fixture, plus skips.
/// Raw goals keyed by fixture id, plus the fixtures without a row.
type SideOutput = (Vec<(String, f64)>, Vec<SkippedFixture>);

fn predict_side(
    pair: &ModelPair,
    side: Side,
    fixtures: &[Fixture],
    builder: &FeatureBuilder<'_>,
) -> Result<SideOutput, PredictError> {
    let model = pair.model(side);
    let fingerprint = builder.fingerprint(pair.approach, side)?;
    if fingerprint != model.fingerprint {
        return Err(PredictError::SchemaMismatch(format!(
            "{side} model was trained on a different {} column layout",
            pair.approach
        )));
    }
    let matrix = match builder.build_matrix(fixtures, pair.approach, side) {
        Ok(m) => m,
        Err(FeatureError::NoRows(skipped)) => return Ok((Vec::new(), skipped)),
        Err(e) => return Err(e.into()),
    };
    if let Some(c) = matrix.coverage {
        if c.ratio() < 1.0 {
            log::warn!(
                "{side}: {} of {} lineup players unseen in training",
                c.listed - c.known,
                c.listed
            );
        }
    }
    let raw = model.predict(&fingerprint, &matrix.values())?;
    let ids = matrix.rows.iter().map(|r| r.fixture_id.clone());
    Ok((ids.zip(raw).collect(), matrix.skipped))
}

/// One prediction per fixture whose home and away rows can both be built.
/// Output follows the input order.
pub fn predict_scorelines(
    pair: &ModelPair,
    fixtures: &[Fixture],
    builder: &FeatureBuilder<'_>,
) -> Result<PredictionBatch, PredictError> {
    if fixtures.is_empty() {
        return Err(PredictError::EmptyTestSet);
    }
    let (home, mut skipped) = predict_side(pair, Side::Home, fixtures, builder)?;
    let (away, away_skipped) = predict_side(pair, Side::Away, fixtures, builder)?;
    let mut seen: BTreeSet<String> = skipped.iter().map(|s| s.fixture_id.clone()).collect();
    for s in away_skipped {
        if seen.insert(s.fixture_id.clone()) {
            skipped.push(s);
        }
    }
    let home: std::collections::HashMap<_, _> = home.into_iter().collect();
    let away: std::collections::HashMap<_, _> = away.into_iter().collect();

    let label = pair.label();
    let mut predictions = Vec::new();
    for f in fixtures {
        if let (Some(&h), Some(&a)) = (home.get(&f.fixture_id), away.get(&f.fixture_id)) {
            predictions.push(ScorelinePrediction::from_raw(&label, f, h, a)?);
        }
    }
    let order: Vec<&str> = fixtures.iter().map(|f| f.fixture_id.as_str()).collect();
    skipped.sort_by_key(|s| order.iter().position(|id| *id == s.fixture_id));
    Ok(PredictionBatch {
        predictions,
        skipped,
    })
}

/// [`ModelPair`] bound to a feature builder.
pub struct RegressionPredictor<'a> {
    pub pair: &'a ModelPair,
    pub builder: &'a FeatureBuilder<'a>,
}

impl ScorelinePredictor for RegressionPredictor<'_> {
    fn label(&self) -> String {
        self.pair.label()
    }

    fn predict_batch(&self, fixtures: &[Fixture]) -> Result<PredictionBatch, PredictError> {
        predict_scorelines(self.pair, fixtures, self.builder)
    }
}

pub const PREDICTION_COLUMNS: [&str; 8] = [
    "fixture_id",
    "model",
    "raw_home",
    "raw_away",
    "pred_home",
    "pred_away",
    "actual_home",
    "actual_away",
];

/// CSV export; unknown actual goals are left blank.
pub fn write_predictions<W: Write>(
    writer: W,
    predictions: &[ScorelinePrediction],
) -> Result<(), PredictError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PREDICTION_COLUMNS)?;
    let opt = |v: Option<u32>| v.map(|g| g.to_string()).unwrap_or_default();
    for p in predictions {
        w.write_record([
            p.fixture_id.clone(),
            p.model.clone(),
            p.raw_home.to_string(),
            p.raw_away.to_string(),
            p.pred_home.to_string(),
            p.pred_away.to_string(),
            opt(p.actual_home),
            opt(p.actual_away),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn fixture(id: &str) -> Fixture {
        Fixture {
            fixture_id: id.into(),
            season: "2022".into(),
            kickoff: Utc.with_ymd_and_hms(2022, 1, 1, 15, 0, 0).unwrap(),
            home_team: "A".into(),
            away_team: "B".into(),
            result: Some(Scoreline::new(2, 1)),
            home_lineup: None,
            away_lineup: None,
        }
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(round_goals(1.1).unwrap(), 1);
        assert_eq!(round_goals(-0.3).unwrap(), 0);
        assert_eq!(round_goals(1.5).unwrap(), 2);
        assert_eq!(round_goals(2.49).unwrap(), 2);
        assert_eq!(round_goals(0.5).unwrap(), 1);
        assert!(matches!(round_goals(f64::NAN), Err(PredictError::NonFinite(_))));
        assert!(matches!(round_goals(f64::INFINITY), Err(PredictError::NonFinite(_))));
    }

    #[test]
    fn raw_pair_rounds_into_a_scoreline() {
        let p = ScorelinePrediction::from_raw("m", &fixture("f"), 1.7, 0.2).unwrap();
        assert_eq!(p.predicted(), Scoreline::new(2, 0));
        assert_eq!(p.actual(), Some(Scoreline::new(2, 1)));
    }

    #[test]
    fn home_win_through_the_predictor_interface() {
        let fixtures: Vec<Fixture> = (0..5).map(|i| fixture(&format!("f{i}"))).collect();
        let batch = Heuristic::HomeWin.predict_batch(&fixtures).unwrap();
        assert_eq!(batch.predictions.len(), 5);
        for p in &batch.predictions {
            assert_eq!(p.predicted(), Scoreline::new(1, 0));
            assert_eq!((p.raw_home, p.raw_away), (1.0, 0.0));
            assert_eq!(p.model, "Home Win");
        }
    }

    #[test]
    fn empty_fixture_list_rejected() {
        assert!(matches!(
            Heuristic::HomeWin.predict_batch(&[]),
            Err(PredictError::EmptyTestSet)
        ));
    }

    #[test]
    fn csv_export_header_and_blanks() {
        let mut f = fixture("f1");
        f.result = None;
        let p = ScorelinePrediction::from_raw("m", &f, 0.25, 3.0).unwrap();
        let mut out = Vec::new();
        write_predictions(&mut out, &[p]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "fixture_id,model,raw_home,raw_away,pred_home,pred_away,actual_home,actual_away"
        );
        assert_eq!(lines.next().unwrap(), "f1,m,0.25,3,0,3,,");
    }
}
