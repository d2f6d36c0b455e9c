//! Invariants over randomly generated inputs.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use proptest::prelude::*;
use scoreline_core::evaluate::{
    bet_run, chi2_importance, fitness, kendall_tau, simulate_standings, tau_b, zone_accuracy,
    MissingOddsPolicy, Zone,
};
use scoreline_core::heuristics::{tradition_predict, recency_predict, StandingsTable, TableSource};
use scoreline_core::ingest::{Fixture, OddsBook, OddsRecord};
use scoreline_core::predict::{round_goals, ScorelinePrediction};
use scoreline_core::regress::Scaler;
use scoreline_core::{Scoreline, Side};

const TEAMS: [&str; 8] = ["Ayr", "Bury", "Cork", "Derby", "Ely", "Fife", "Goole", "Hull"];

fn table_with_points(points: &[u32]) -> StandingsTable {
    let mut t = StandingsTable::from_results(
        TableSource::Actual,
        TEAMS[..points.len()].iter().copied(),
        std::iter::empty::<(&str, &str, Scoreline)>(),
    );
    for row in &mut t.rows {
        let i = TEAMS.iter().position(|n| *n == row.team).unwrap();
        row.points = points[i];
    }
    t.rows.sort_by(|a, b| b.points.cmp(&a.points).then_with(|| a.team.cmp(&b.team)));
    t
}

/// Fixtures between distinct teams, one per day, in kickoff order.
fn fixtures_strategy(max: usize) -> impl Strategy<Value = Vec<Fixture>> {
    prop::collection::vec((0..8usize, 1..8usize, 0..5u32, 0..5u32), 1..max).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (h, offset, hg, ag))| Fixture {
                fixture_id: format!("f{i}"),
                season: "2022".into(),
                kickoff: Utc.with_ymd_and_hms(2022, 1, 1, 15, 0, 0).unwrap() + Duration::days(i as i64),
                home_team: TEAMS[h].into(),
                away_team: TEAMS[(h + offset) % 8].into(),
                result: Some(Scoreline::new(hg, ag)),
                home_lineup: None,
                away_lineup: None,
            })
            .collect()
    })
}

fn brute_tau(pairs: &[(u32, u32)]) -> Option<f64> {
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let dx = i64::from(pairs[i].0) - i64::from(pairs[j].0);
            let dy = i64::from(pairs[i].1) - i64::from(pairs[j].1);
            match (dx == 0, dy == 0) {
                (true, true) => {}
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                _ if dx.signum() == dy.signum() => c += 1,
                _ => d += 1,
            }
        }
    }
    let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
    (denom > 0.0).then(|| (c - d) as f64 / denom)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rounding_is_monotone_and_never_negative(a in -5.0f64..20.0, b in -5.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(round_goals(lo).unwrap() <= round_goals(hi).unwrap());
        prop_assert!((f64::from(round_goals(hi).unwrap()) - hi.max(0.0)).abs() <= 0.5);
    }

    #[test]
    fn rmse_bounds_mae(pairs in prop::collection::vec((0.0f64..6.0, 0u32..6), 1..60)) {
        let (p, a): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(p, a)| (*p, f64::from(*a))).unzip();
        let r = fitness("m", Side::Home, &p, &a).unwrap();
        prop_assert!(r.rmse + 1e-12 >= r.mae);
        if let Some(r2) = r.r2 {
            prop_assert!(r2 <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn tau_b_agrees_with_pair_counting(pairs in prop::collection::vec((0u32..10, 0u32..10), 0..40)) {
        match (tau_b(&pairs), brute_tau(&pairs)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, b) => {
                let const_x = pairs.iter().all(|p| p.0 == pairs[0].0);
                let const_y = pairs.iter().all(|p| p.1 == pairs[0].1);
                prop_assert!(pairs.len() < 2 || const_x || const_y, "{b:?}");
            }
            (Some(a), None) => prop_assert!(false, "tau {a} on a degenerate table"),
        }
    }

    #[test]
    fn tau_is_one_on_itself_and_minus_one_reversed(points in Just((0..8u32).collect::<Vec<_>>()).prop_shuffle()) {
        let pts: Vec<u32> = points.iter().map(|p| p * 3).collect();
        let t = table_with_points(&pts);
        prop_assert_eq!(kendall_tau(&t, &t).unwrap(), Some(1.0));
        let reversed: Vec<u32> = pts.iter().map(|p| 21 - p).collect();
        let r = kendall_tau(&t, &table_with_points(&reversed)).unwrap().unwrap();
        prop_assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zone_accuracy_ignores_order_within_the_zone(
        actual in Just((0..8u32).collect::<Vec<_>>()).prop_shuffle(),
        predicted in Just((0..8u32).collect::<Vec<_>>()).prop_shuffle(),
        swap in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let a = table_with_points(&actual);
        let p = table_with_points(&predicted);
        // Reorder the predicted top four among themselves.
        let top: Vec<&str> = p.teams().take(4).collect();
        let mut shuffled = predicted.clone();
        for (k, team) in top.iter().enumerate() {
            let i = TEAMS.iter().position(|n| n == team).unwrap();
            let j = TEAMS.iter().position(|n| *n == top[swap[k]]).unwrap();
            shuffled[i] = predicted[j];
        }
        let q = table_with_points(&shuffled);
        for zone in [Zone::Top4, Zone::Bottom3] {
            let x = zone_accuracy(&p, &a, zone).unwrap();
            prop_assert_eq!(x, zone_accuracy(&q, &a, zone).unwrap());
            prop_assert!((0.0..=100.0).contains(&x));
        }
    }

    #[test]
    fn chi2_doubles_when_every_row_is_duplicated(
        rows in prop::collection::vec((prop::collection::vec(0.0f64..10.0, 3), 0u32..3), 2..20),
    ) {
        let cols: Vec<String> = (0..3).map(|i| format!("c{i}")).collect();
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
        let y: Vec<u32> = rows.iter().map(|r| r.1).collect();
        let once = chi2_importance(&cols, &x, &y).unwrap();
        let x2: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
        let y2: Vec<u32> = y.iter().chain(&y).copied().collect();
        let twice = chi2_importance(&cols, &x2, &y2).unwrap();
        let lookup = |r: &scoreline_core::evaluate::FeatureRanking, c: &str| {
            r.scores.iter().find(|(n, _)| n == c).unwrap().1
        };
        for c in &cols {
            let (a, b) = (lookup(&once, c), lookup(&twice, c));
            prop_assert!(a >= 0.0);
            prop_assert!((b - 2.0 * a).abs() <= 1e-9 * (1.0 + a), "{c}: {a} {b}");
        }
    }

    #[test]
    fn points_total_counts_results(fixtures in fixtures_strategy(40)) {
        let t = StandingsTable::from_fixtures(&fixtures);
        let draws = fixtures.iter().filter(|f| f.result.unwrap().home == f.result.unwrap().away).count() as u32;
        let decided = fixtures.len() as u32 - draws;
        prop_assert_eq!(t.total_points(), 3 * decided + 2 * draws);
        let gd: i64 = t.rows.iter().map(|r| r.goal_difference()).sum();
        prop_assert_eq!(gd, 0);
    }

    #[test]
    fn tradition_never_predicts_a_draw(fixtures in fixtures_strategy(30), probe in fixtures_strategy(10)) {
        let table = StandingsTable::from_fixtures(&fixtures);
        for f in &probe {
            let s = tradition_predict(f, &table);
            prop_assert_eq!(s.home + s.away, 1);
        }
    }

    #[test]
    fn recency_ignores_matches_at_or_after_kickoff(fixtures in fixtures_strategy(30), cut in 0usize..30) {
        let cut = cut.min(fixtures.len() - 1);
        let f = &fixtures[cut];
        let before = &fixtures[..cut];
        prop_assert_eq!(recency_predict(f, &fixtures), recency_predict(f, before));
    }

    #[test]
    fn betting_net_is_rederivable(
        bets in prop::collection::vec((0u32..3, 0u32..3, 0u32..3, 0u32..3, prop::option::of(1.5f64..30.0)), 1..30),
        stake in 0.5f64..5.0,
        lose in any::<bool>(),
    ) {
        let mut odds = OddsBook::new();
        let mut preds = Vec::new();
        for (i, (ph, pa, ah, aa, price)) in bets.iter().enumerate() {
            let id = format!("f{i}");
            if let Some(price) = price {
                odds.insert(id.clone(), OddsRecord {
                    fixture_id: id.clone(),
                    scoreline_odds: BTreeMap::from([(Scoreline::new(*ph, *pa), *price)]),
                });
            }
            preds.push(ScorelinePrediction {
                fixture_id: id,
                model: "m".into(),
                home_team: "Ayr".into(),
                away_team: "Bury".into(),
                raw_home: f64::from(*ph),
                raw_away: f64::from(*pa),
                pred_home: *ph,
                pred_away: *pa,
                actual_home: Some(*ah),
                actual_away: Some(*aa),
            });
        }
        let policy = if lose { MissingOddsPolicy::Lose } else { MissingOddsPolicy::Skip };
        let ledger = bet_run(&preds, &odds, stake, policy);
        let expected: f64 = bets.iter().map(|(ph, pa, ah, aa, price)| match (price, ph == ah && pa == aa) {
            (Some(o), true) => stake * o - stake,
            (Some(_), false) => -stake,
            (None, _) if lose => -stake,
            (None, _) => 0.0,
        }).sum();
        prop_assert!((ledger.net_earnings - expected).abs() < 1e-9);
        prop_assert!((ledger.net_earnings - ledger.recomputed_net()).abs() < 1e-9);
        prop_assert_eq!(ledger.bets_placed + ledger.bets_skipped, bets.len());
    }

    #[test]
    fn simulated_table_lists_every_team(fixtures in fixtures_strategy(20)) {
        let preds: Vec<ScorelinePrediction> = fixtures.iter().map(|f| ScorelinePrediction {
            fixture_id: f.fixture_id.clone(),
            model: "m".into(),
            home_team: f.home_team.clone(),
            away_team: f.away_team.clone(),
            raw_home: 1.0,
            raw_away: 0.0,
            pred_home: 1,
            pred_away: 0,
            actual_home: None,
            actual_away: None,
        }).collect();
        let t = simulate_standings(TEAMS, &preds).unwrap();
        prop_assert_eq!(t.rows.len(), 8);
        prop_assert_eq!(t.total_points(), 3 * preds.len() as u32);
    }

    #[test]
    fn scaled_training_columns_are_centred(rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 4), 2..30)) {
        let s = Scaler::fit(&rows);
        let z = s.transform(&rows);
        for j in 0..4 {
            let mean: f64 = z.iter().map(|r| r[j]).sum::<f64>() / z.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            if s.std[j] > 1e-9 {
                let var: f64 = z.iter().map(|r| r[j] * r[j]).sum::<f64>() / z.len() as f64;
                prop_assert!((var - 1.0).abs() < 1e-6);
            }
        }
    }
}
