//! Feature building, heuristics and prediction on the bundled dataset.

use std::collections::BTreeSet;
use std::path::PathBuf;

use scoreline_core::features::{
    Approach, FeatureBuilder, FeatureSchema, PlayerUniverse, DEFENSIVE_DF, DEFENSIVE_GK,
    OFFENSIVE_DF, OFFENSIVE_FW, OFFENSIVE_MF, STATS_WIDTH,
};
use scoreline_core::heuristics::{build_training_table, recency_predict, tradition_predict, Heuristic, HeuristicKind};
use scoreline_core::ingest::Dataset;
use scoreline_core::pipeline::{EvalSettings, ModelId, Workbench};
use scoreline_core::predict::{round_goals, ScorelinePredictor};
use scoreline_core::regress::{Hyperparameters, RegressorSpec, Technique};
use scoreline_core::{Scoreline, Side};

fn sample_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn dataset() -> Dataset {
    Dataset::load(sample_dir(), 8).unwrap()
}

#[test]
fn sample_has_expected_shape() {
    let d = dataset();
    assert_eq!(d.fixtures.len(), 40);
    assert_eq!(d.test().len(), 8);
    assert_eq!(d.stats.len(), 40 * 22);
    assert!(d.fixtures.windows(2).all(|w| w[0].kickoff <= w[1].kickoff));
    assert_eq!(d.odds.len(), 40);
}

#[test]
fn every_stats_row_has_52_partitioned_columns() {
    let d = dataset();
    let schema = FeatureSchema::default();
    assert_eq!(
        [OFFENSIVE_DF, OFFENSIVE_MF, OFFENSIVE_FW, DEFENSIVE_GK, DEFENSIVE_DF],
        [13, 14, 13, 5, 7]
    );
    let builder = FeatureBuilder::new(&d.stats, &schema);
    for approach in [Approach::LineupStats, Approach::TeamStats] {
        for side in Side::BOTH {
            let m = builder.build_matrix(&d.fixtures, approach, side).unwrap();
            assert_eq!(m.columns.len(), STATS_WIDTH);
            // Offensive blocks describe the side itself, defensive ones its opponent.
            let count = |team_is_away: bool, prefix: &str| {
                m.columns
                    .iter()
                    .filter(|c| c.starts_with("away ") == team_is_away)
                    .filter(|c| c.trim_start_matches("away ").starts_with(prefix))
                    .count()
            };
            let own = side == Side::Away;
            let offensive = (count(own, "d_"), count(own, "m_"), count(own, "a_"), count(own, "g_"));
            let defensive = (count(!own, "g_"), count(!own, "d_"), count(!own, "m_"), count(!own, "a_"));
            assert_eq!(offensive, (13, 14, 13, 0));
            assert_eq!(defensive, (5, 7, 0, 0));
            for row in &m.rows {
                assert_eq!(row.values.len(), 52, "{} {approach}", row.fixture_id);
            }
            // Only the opening fixtures lack any earlier data.
            assert!(m.skipped.len() <= 4, "{:?}", m.skipped);
        }
    }
}

#[test]
fn truncating_the_archive_at_kickoff_changes_no_row() {
    let d = dataset();
    let schema = FeatureSchema::default();
    let universe = PlayerUniverse::from_fixtures(d.train());
    let full = FeatureBuilder::new(&d.stats, &schema).with_universe(universe.clone());
    for f in &d.fixtures {
        let truncated_archive = d.stats.retain_before(f.kickoff);
        let truncated = FeatureBuilder::new(&truncated_archive, &schema).with_universe(universe.clone());
        for approach in Approach::ALL {
            for side in Side::BOTH {
                let a = full.build_row(f, approach, side).map_err(|e| e.to_string());
                let b = truncated.build_row(f, approach, side).map_err(|e| e.to_string());
                assert_eq!(a, b, "{} {approach} {side}", f.fixture_id);
            }
        }
    }
}

#[test]
fn recency_matches_a_manual_trace() {
    let d = dataset();
    let f = &d.fixtures[20];
    // Walk the history by hand: latest earlier match of each team.
    let last = |team: &str| {
        let mut goals = None;
        for g in &d.fixtures {
            if g.kickoff >= f.kickoff {
                break;
            }
            let s = g.result.unwrap();
            if g.home_team == team {
                goals = Some(s.home);
            } else if g.away_team == team {
                goals = Some(s.away);
            }
        }
        goals.unwrap_or(1)
    };
    let expected = Scoreline::new(last(&f.home_team), last(&f.away_team));
    assert_eq!(recency_predict(f, &d.fixtures), expected);
    // Truncating history after kickoff changes nothing.
    let before: Vec<_> = d.fixtures.iter().filter(|g| g.kickoff < f.kickoff).cloned().collect();
    assert_eq!(recency_predict(f, &before), expected);
}

#[test]
fn tradition_puts_a_promoted_side_last() {
    let d = dataset();
    let table = build_training_table(d.train()).unwrap();
    let mut f = d.test()[0].clone();
    f.away_team = "Newcome Town".into();
    assert_eq!(tradition_predict(&f, &table), Scoreline::new(1, 0));
    std::mem::swap(&mut f.home_team, &mut f.away_team);
    assert_eq!(tradition_predict(&f, &table), Scoreline::new(0, 1));
}

#[test]
fn eight_test_fixtures_give_eight_predictions_matching_a_manual_trace() {
    let d = dataset();
    let schema = FeatureSchema::default();
    let bench = Workbench::new(&d, &schema).unwrap();
    let spec = RegressorSpec::new(Technique::Knn).with_seed(1);
    let (pair, _) = bench.train_pair(Approach::TeamStats, &spec).unwrap();
    let batch = bench.predict_pair(&pair).unwrap();
    assert_eq!(batch.predictions.len(), 8);
    assert!(batch.skipped.is_empty());

    for (p, f) in batch.predictions.iter().zip(d.test()) {
        assert_eq!(p.fixture_id, f.fixture_id);
        for side in Side::BOTH {
            let row = bench.builder.build_row(f, Approach::TeamStats, side).unwrap();
            let model = pair.model(side);
            let raw = model.predict(&model.fingerprint, &[row.values]).unwrap()[0];
            assert_eq!(p.raw(side).to_bits(), raw.to_bits());
        }
        assert_eq!(p.pred_home, round_goals(p.raw_home).unwrap());
        assert_eq!(p.pred_away, round_goals(p.raw_away).unwrap());
        assert_eq!(p.actual(), f.result);
    }
}

#[test]
fn home_and_away_models_are_order_independent() {
    let d = dataset();
    let schema = FeatureSchema::default();
    let bench = Workbench::new(&d, &schema).unwrap();
    let spec = RegressorSpec::new(Technique::Lr);
    let (pair, _) = bench.train_pair(Approach::LineupStats, &spec).unwrap();
    let f = &d.test()[3];
    let away_first = {
        let a = bench.builder.build_row(f, Approach::LineupStats, Side::Away).unwrap();
        let h = bench.builder.build_row(f, Approach::LineupStats, Side::Home).unwrap();
        (pair.home.predict(&pair.home.fingerprint, &[h.values]).unwrap(), pair.away.predict(&pair.away.fingerprint, &[a.values]).unwrap())
    };
    let batch = bench.predict_pair(&pair).unwrap();
    let p = batch.predictions.iter().find(|p| p.fixture_id == f.fixture_id).unwrap();
    assert_eq!((p.raw_home, p.raw_away), (away_first.0[0], away_first.1[0]));
}

#[test]
fn players_model_refuses_a_stats_row() {
    let d = dataset();
    let schema = FeatureSchema::default();
    let bench = Workbench::new(&d, &schema).unwrap();
    let (pair, _) = bench.train_pair(Approach::Players, &RegressorSpec::new(Technique::Dtr)).unwrap();
    let row = bench.builder.build_row(&d.test()[0], Approach::TeamStats, Side::Home).unwrap();
    let fp = bench.builder.fingerprint(Approach::TeamStats, Side::Home).unwrap();
    assert!(pair.home.predict(&fp, &[row.values]).is_err());
}

#[test]
fn grid_covers_every_model_once_with_consistent_rank_sums() {
    let d = dataset();
    let schema = FeatureSchema::default();
    let bench = Workbench::new(&d, &schema).unwrap();
    let grid = bench
        .run_grid(&ModelId::grid(), &Hyperparameters::default(), 7, &EvalSettings::default())
        .unwrap();
    assert_eq!(grid.overview.len(), 18);
    let names: BTreeSet<&str> = grid.overview.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(names.len(), 18);
    for r in &grid.overview {
        assert_eq!(r.rank_sum, r.ranks.iter().sum::<u32>());
        assert!(r.ranks.iter().all(|&k| (1..=18).contains(&k)));
    }
    assert!(grid.overview.windows(2).all(|w| w[0].rank_sum <= w[1].rank_sum));
    for report in &grid.reports {
        let ids: BTreeSet<&str> = report.predictions.iter().map(|p| p.fixture_id.as_str()).collect();
        assert_eq!(ids.len(), report.predictions.len(), "{}", report.model);
    }
}

#[test]
fn home_win_predictions_are_constant_on_the_test_window() {
    let d = dataset();
    let h = Heuristic::build(HeuristicKind::HomeWin, d.train(), &d.fixtures).unwrap();
    let batch = h.predict_batch(d.test()).unwrap();
    assert!(batch.predictions.iter().all(|p| p.predicted() == Scoreline::new(1, 0)));
}
