//! Evaluation of scoreline predictions.
//!
//! Fitness metrics work on raw model outputs; standings, zones and betting work
//! on rounded scorelines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::heuristics::{StandingsTable, TableSource};
use crate::ingest::{Fixture, OddsBook, Scoreline, Side};
use crate::predict::ScorelinePrediction;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("{predicted} predictions for {actual} actual values")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("tables rank different teams")]
    TeamSetMismatch,
    #[error("zone of {zone} needs at least {zone} teams, got {teams}")]
    TooFewTeams { teams: usize, zone: usize },
    #[error("feature {column} is negative in row {row}")]
    NegativeFeature { column: String, row: usize },
    #[error("model {model} has no rank for scenario {scenario}")]
    MissingScenario { model: String, scenario: Scenario },
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub model: String,
    pub side: Side,
    pub mae: f64,
    pub rmse: f64,
    /// `None` when the actual values have no variance.
    pub r2: Option<f64>,
    pub n: usize,
}

pub fn fitness(model: &str, side: Side, predicted: &[f64], actual: &[f64]) -> Result<FitnessReport> {
    if predicted.len() != actual.len() {
        return Err(EvalError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = actual.len() as f64;
    let abs: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    let ss_res: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    let mean = actual.iter().sum::<f64>() / n;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    Ok(FitnessReport {
        model: model.to_string(),
        side,
        mae: abs / n,
        rmse: (ss_res / n).sqrt(),
        r2: (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot),
        n: actual.len(),
    })
}

/// Home and away fitness over the predictions whose result is known.
pub fn fitness_by_side(predictions: &[ScorelinePrediction]) -> Result<[FitnessReport; 2]> {
    let model = predictions.first().map(|p| p.model.clone()).unwrap_or_default();
    let side_report = |side: Side| {
        let (raw, actual): (Vec<f64>, Vec<f64>) = predictions
            .iter()
            .filter_map(|p| Some((p.raw(side), f64::from(p.actual_goals(side)?))))
            .unzip();
        fitness(&model, side, &raw, &actual)
    };
    Ok([side_report(Side::Home)?, side_report(Side::Away)?])
}

/// Table from predicted scorelines. Every team in `teams` gets a row, so a
/// team whose fixtures were all skipped still appears with zero points.
pub fn simulate_standings<'a>(
    teams: impl IntoIterator<Item = &'a str>,
    predictions: &'a [ScorelinePrediction],
) -> Result<StandingsTable> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(StandingsTable::from_results(
        TableSource::Predicted,
        teams,
        predictions
            .iter()
            .map(|p| (p.home_team.as_str(), p.away_team.as_str(), p.predicted())),
    ))
}

/// Table from the real results of `fixtures`.
pub fn actual_standings(fixtures: &[Fixture]) -> Result<StandingsTable> {
    if !fixtures.iter().any(|f| f.result.is_some()) {
        return Err(EvalError::EmptyInput);
    }
    Ok(StandingsTable::from_fixtures(fixtures))
}

fn same_teams(a: &StandingsTable, b: &StandingsTable) -> Result<()> {
    let ta: BTreeSet<&str> = a.teams().collect();
    let tb: BTreeSet<&str> = b.teams().collect();
    if ta != tb {
        return Err(EvalError::TeamSetMismatch);
    }
    Ok(())
}

/// Sorts `v` counting inversions; equal elements are not inversions.
fn merge_count(v: &mut [u32]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid]) + merge_count(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// Tied pairs among runs of equal values in a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * run.saturating_sub(1) / 2;
            run = 1;
        }
        prev = Some(v);
    }
    total + run * run.saturating_sub(1) / 2
}

/// Kendall tau-b between paired values in O(n log n).
/// `None` when either side is constant.
pub fn tau_b(pairs: &[(u32, u32)]) -> Option<f64> {
    let n = pairs.len() as u64;
    if n < 2 {
        return None;
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let n0 = n * (n - 1) / 2;
    let n1 = tied_pairs(sorted.iter().map(|p| p.0));
    let n3 = tied_pairs(sorted.iter().copied());
    let mut ys: Vec<u32> = sorted.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys);
    let n2 = tied_pairs(ys.iter().copied());
    if n1 == n0 || n2 == n0 {
        return None;
    }
    let numerator = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denominator = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Some((numerator / denominator).clamp(-1.0, 1.0))
}

/// Tau-b between two tables, ranking teams by points alone.
pub fn kendall_tau(a: &StandingsTable, b: &StandingsTable) -> Result<Option<f64>> {
    same_teams(a, b)?;
    let pairs: Vec<(u32, u32)> = a
        .rows
        .iter()
        .map(|r| (r.points, b.row(&r.team).expect("same team set").points))
        .collect();
    Ok(tau_b(&pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    Top4,
    Bottom3,
}

impl Zone {
    pub fn size(self) -> usize {
        match self {
            Zone::Top4 => 4,
            Zone::Bottom3 => 3,
        }
    }

    fn members(self, table: &StandingsTable) -> BTreeSet<&str> {
        let n = table.rows.len();
        let rows = match self {
            Zone::Top4 => &table.rows[..self.size()],
            Zone::Bottom3 => &table.rows[n - self.size()..],
        };
        rows.iter().map(|r| r.team.as_str()).collect()
    }
}

/// Share of the actual zone the predicted table got right, in percent.
pub fn zone_accuracy(predicted: &StandingsTable, actual: &StandingsTable, zone: Zone) -> Result<f64> {
    same_teams(predicted, actual)?;
    let teams = actual.rows.len();
    if teams < zone.size() {
        return Err(EvalError::TooFewTeams {
            teams,
            zone: zone.size(),
        });
    }
    let hits = zone
        .members(predicted)
        .intersection(&zone.members(actual))
        .count();
    Ok(hits as f64 / zone.size() as f64 * 100.0)
}

/// What to do when the predicted scoreline has no quoted price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingOddsPolicy {
    /// No bet is placed.
    #[default]
    Skip,
    /// The stake is placed and lost.
    Lose,
}

impl MissingOddsPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            MissingOddsPolicy::Skip => "skip",
            MissingOddsPolicy::Lose => "lose",
        }
    }
}

impl fmt::Display for MissingOddsPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MissingOddsPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "skip" => Ok(MissingOddsPolicy::Skip),
            "lose" => Ok(MissingOddsPolicy::Lose),
            _ => Err(format!("unknown missing-odds policy {s:?} (expected skip or lose)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetEntry {
    pub fixture_id: String,
    pub predicted: Scoreline,
    pub actual: Option<Scoreline>,
    pub odds: Option<f64>,
    pub placed: bool,
    pub correct: bool,
    pub payout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettingLedger {
    pub model: String,
    pub stake: f64,
    pub policy: MissingOddsPolicy,
    pub entries: Vec<BetEntry>,
    pub net_earnings: f64,
    pub bets_placed: usize,
    pub bets_skipped: usize,
}

impl BettingLedger {
    /// Net earnings recomputed from the entries.
    pub fn recomputed_net(&self) -> f64 {
        let payouts: f64 = self.entries.iter().map(|e| e.payout).sum();
        payouts - self.stake * self.bets_placed as f64
    }
}

/// Backs every predicted scoreline at its quoted price. Fixtures without a
/// result are never settled and count as skipped.
pub fn bet_run(
    predictions: &[ScorelinePrediction],
    odds: &OddsBook,
    stake: f64,
    policy: MissingOddsPolicy,
) -> BettingLedger {
    let mut entries = Vec::with_capacity(predictions.len());
    let (mut placed, mut skipped) = (0, 0);
    for p in predictions {
        let predicted = p.predicted();
        let actual = p.actual();
        let price = odds
            .get(&p.fixture_id)
            .and_then(|r| r.scoreline_odds.get(&predicted).copied());
        let bet = actual.is_some() && (price.is_some() || policy == MissingOddsPolicy::Lose);
        let correct = actual == Some(predicted);
        let payout = match (bet, correct, price) {
            (true, true, Some(o)) => stake * o,
            _ => 0.0,
        };
        if bet {
            placed += 1;
        } else {
            skipped += 1;
        }
        entries.push(BetEntry {
            fixture_id: p.fixture_id.clone(),
            predicted,
            actual,
            odds: price,
            placed: bet,
            correct,
            payout,
        });
    }
    let mut ledger = BettingLedger {
        model: predictions.first().map(|p| p.model.clone()).unwrap_or_default(),
        stake,
        policy,
        entries,
        net_earnings: 0.0,
        bets_placed: placed,
        bets_skipped: skipped,
    };
    ledger.net_earnings = ledger.recomputed_net();
    ledger
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    /// `(feature, score)` in descending score order.
    pub scores: Vec<(String, f64)>,
}

impl FeatureRanking {
    pub fn top(&self, k: usize) -> &[(String, f64)] {
        &self.scores[..k.min(self.scores.len())]
    }
}

/// Chi-squared score of one non-negative column against class labels.
fn chi2_column(values: &[f64], classes: &BTreeMap<u32, Vec<usize>>, n: usize) -> f64 {
    let total: f64 = values.iter().sum();
    classes
        .values()
        .map(|rows| {
            let observed: f64 = rows.iter().map(|&r| values[r]).sum();
            let expected = rows.len() as f64 / n as f64 * total;
            if expected > 0.0 {
                (observed - expected).powi(2) / expected
            } else {
                0.0
            }
        })
        .sum()
}

/// Ranks `columns` by chi-squared dependence on the goal classes in `targets`.
/// Each column is min-max scaled to [0, 1] first; constant columns score 0.
/// Equal scores keep column order.
pub fn chi2_importance(columns: &[String], x: &[Vec<f64>], targets: &[u32]) -> Result<FeatureRanking> {
    if x.len() != targets.len() {
        return Err(EvalError::LengthMismatch {
            predicted: x.len(),
            actual: targets.len(),
        });
    }
    if x.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &t) in targets.iter().enumerate() {
        classes.entry(t).or_default().push(i);
    }
    let mut scores = Vec::with_capacity(columns.len());
    for (j, name) in columns.iter().enumerate() {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        if let Some(row) = col.iter().position(|&v| v < 0.0) {
            return Err(EvalError::NegativeFeature {
                column: name.clone(),
                row,
            });
        }
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled: Vec<f64> = if hi > lo {
            col.iter().map(|v| (v - lo) / (hi - lo)).collect()
        } else {
            vec![0.0; col.len()]
        };
        scores.push((name.clone(), chi2_column(&scaled, &classes, x.len())));
    }
    scores.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(FeatureRanking { scores })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    Home,
    Away,
    Betting,
    Standings,
    Top4,
    Relegation,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Home,
        Scenario::Away,
        Scenario::Betting,
        Scenario::Standings,
        Scenario::Top4,
        Scenario::Relegation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Home => "home",
            Scenario::Away => "away",
            Scenario::Betting => "betting",
            Scenario::Standings => "standings",
            Scenario::Top4 => "top4",
            Scenario::Relegation => "relegation",
        }
    }

    /// Whether larger scores are better (MAE is the only lower-is-better one).
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Scenario::Home | Scenario::Away)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Competition ranks ("1224"): equal scores share the better rank.
/// `None` scores rank after every scored entry.
pub fn competition_ranks(scores: &[Option<f64>], higher_is_better: bool) -> Vec<u32> {
    let key = |s: Option<f64>| s.map(|v| if higher_is_better { -v } else { v });
    let better = |a: Option<f64>, b: Option<f64>| match (key(a), key(b)) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    };
    scores
        .iter()
        .map(|&s| 1 + scores.iter().filter(|&&o| better(o, s)).count() as u32)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverviewRow {
    pub model: String,
    /// Ranks in [`Scenario::ALL`] order.
    pub ranks: Vec<u32>,
    pub rank_sum: u32,
}

/// Rows ordered by ascending rank sum; equal sums keep the input order.
pub fn rank_sum_overview(
    models: &[String],
    ranks: &BTreeMap<(String, Scenario), u32>,
) -> Result<Vec<OverviewRow>> {
    let mut rows = models
        .iter()
        .map(|m| {
            let r = Scenario::ALL
                .iter()
                .map(|&s| {
                    ranks
                        .get(&(m.clone(), s))
                        .copied()
                        .ok_or_else(|| EvalError::MissingScenario {
                            model: m.clone(),
                            scenario: s,
                        })
                })
                .collect::<Result<Vec<u32>>>()?;
            Ok(OverviewRow {
                model: m.clone(),
                rank_sum: r.iter().sum(),
                ranks: r,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.rank_sum);
    Ok(rows)
}

/// Scenario scores for one model, ready for ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScores {
    pub model: String,
    pub home_mae: f64,
    pub away_mae: f64,
    pub net_earnings: f64,
    pub tau: Option<f64>,
    pub top4: f64,
    pub relegation: f64,
}

impl ScenarioScores {
    pub fn score(&self, scenario: Scenario) -> Option<f64> {
        match scenario {
            Scenario::Home => Some(self.home_mae),
            Scenario::Away => Some(self.away_mae),
            Scenario::Betting => Some(self.net_earnings),
            Scenario::Standings => self.tau,
            Scenario::Top4 => Some(self.top4),
            Scenario::Relegation => Some(self.relegation),
        }
    }
}

/// Ranks every model in every scenario and sums the ranks.
pub fn overview(scores: &[ScenarioScores]) -> Result<Vec<OverviewRow>> {
    let mut ranks = BTreeMap::new();
    for scenario in Scenario::ALL {
        let values: Vec<Option<f64>> = scores.iter().map(|s| s.score(scenario)).collect();
        for (s, r) in scores
            .iter()
            .zip(competition_ranks(&values, scenario.higher_is_better()))
        {
            ranks.insert((s.model.clone(), scenario), r);
        }
    }
    let models: Vec<String> = scores.iter().map(|s| s.model.clone()).collect();
    rank_sum_overview(&models, &ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::OddsRecord;

    fn pred(id: &str, home: &str, away: &str, p: (u32, u32), a: (u32, u32)) -> ScorelinePrediction {
        ScorelinePrediction {
            fixture_id: id.into(),
            model: "m".into(),
            home_team: home.into(),
            away_team: away.into(),
            raw_home: f64::from(p.0),
            raw_away: f64::from(p.1),
            pred_home: p.0,
            pred_away: p.1,
            actual_home: Some(a.0),
            actual_away: Some(a.1),
        }
    }

    fn table(points: &[(&str, u32)]) -> StandingsTable {
        let mut rows: Vec<_> = points
            .iter()
            .map(|(t, p)| crate::heuristics::StandingsRow {
                team: t.to_string(),
                played: 0,
                won: 0,
                drawn: 0,
                lost: 0,
                goals_for: 0,
                goals_against: 0,
                points: *p,
            })
            .collect();
        rows.sort_by(|a, b| b.points.cmp(&a.points).then(a.team.cmp(&b.team)));
        StandingsTable {
            source: TableSource::Actual,
            rows,
        }
    }

    #[test]
    fn perfect_fit() {
        let r = fitness("m", Side::Home, &[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0]).unwrap();
        assert_eq!((r.mae, r.rmse, r.r2), (0.0, 0.0, Some(1.0)));
    }

    #[test]
    fn mean_prediction_has_zero_r2() {
        let r = fitness("m", Side::Home, &[1.0; 3], &[0.0, 1.0, 2.0]).unwrap();
        assert!(r.r2.unwrap().abs() < 1e-15);
        assert!(r.rmse >= r.mae);
    }

    #[test]
    fn constant_actuals_have_no_r2() {
        let r = fitness("m", Side::Away, &[0.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.r2, None);
    }

    #[test]
    fn fitness_input_errors() {
        assert_eq!(
            fitness("m", Side::Home, &[1.0], &[]),
            Err(EvalError::LengthMismatch { predicted: 1, actual: 0 })
        );
        assert_eq!(fitness("m", Side::Home, &[], &[]), Err(EvalError::EmptyInput));
    }

    #[test]
    fn tau_identity_and_reversal() {
        let t = table(&[("A", 9), ("B", 6), ("C", 3), ("D", 0)]);
        let r = table(&[("A", 0), ("B", 3), ("C", 6), ("D", 9)]);
        assert_eq!(kendall_tau(&t, &t).unwrap(), Some(1.0));
        assert_eq!(kendall_tau(&t, &r).unwrap(), Some(-1.0));
    }

    #[test]
    fn tau_with_ties() {
        // x: 1 2 2 3, y: 1 3 2 4 -> concordant 5, discordant 0, one x tie.
        let pairs = [(1, 1), (2, 3), (2, 2), (3, 4)];
        let expected = 5.0 / (5.0f64 * 6.0).sqrt();
        assert!((tau_b(&pairs).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn tau_undefined_for_constant_table() {
        let t = table(&[("A", 3), ("B", 3), ("C", 3)]);
        let u = table(&[("A", 9), ("B", 3), ("C", 0)]);
        assert_eq!(kendall_tau(&t, &u).unwrap(), None);
    }

    #[test]
    fn tau_rejects_different_teams() {
        let t = table(&[("A", 3), ("B", 0)]);
        let u = table(&[("A", 3), ("C", 0)]);
        assert_eq!(kendall_tau(&t, &u), Err(EvalError::TeamSetMismatch));
    }

    #[test]
    fn zones() {
        let actual = table(&[("A", 20), ("B", 19), ("C", 18), ("D", 17), ("E", 5), ("F", 4), ("G", 3), ("H", 2)]);
        let pred = table(&[("A", 20), ("E", 19), ("C", 18), ("F", 17), ("B", 5), ("D", 4), ("G", 3), ("H", 2)]);
        assert_eq!(zone_accuracy(&pred, &actual, Zone::Top4).unwrap(), 50.0);
        let pred_bottom = table(&[("A", 20), ("B", 19), ("C", 18), ("D", 17), ("E", 6), ("F", 2), ("G", 4), ("H", 3)]);
        assert_eq!(zone_accuracy(&pred_bottom, &actual, Zone::Bottom3).unwrap(), 100.0);
        let small = table(&[("A", 1), ("B", 0)]);
        assert_eq!(
            zone_accuracy(&small, &small, Zone::Bottom3),
            Err(EvalError::TooFewTeams { teams: 2, zone: 3 })
        );
    }

    #[test]
    fn winning_bet_pays_stake_times_odds() {
        let mut odds = OddsBook::new();
        odds.insert(
            "f".into(),
            OddsRecord {
                fixture_id: "f".into(),
                scoreline_odds: [(Scoreline::new(2, 1), 9.5)].into_iter().collect(),
            },
        );
        let ledger = bet_run(&[pred("f", "A", "B", (2, 1), (2, 1))], &odds, 1.0, MissingOddsPolicy::Skip);
        assert_eq!(ledger.entries[0].payout, 9.5);
        assert_eq!(ledger.net_earnings, 8.5);
    }

    #[test]
    fn missing_odds_policies() {
        let odds = OddsBook::new();
        let preds = [pred("f", "A", "B", (7, 5), (7, 5))];
        let skip = bet_run(&preds, &odds, 1.0, MissingOddsPolicy::Skip);
        assert_eq!((skip.bets_placed, skip.bets_skipped, skip.net_earnings), (0, 1, 0.0));
        let lose = bet_run(&preds, &odds, 1.0, MissingOddsPolicy::Lose);
        assert_eq!((lose.bets_placed, lose.bets_skipped, lose.net_earnings), (1, 0, -1.0));
    }

    #[test]
    fn hundred_losing_bets() {
        let preds: Vec<_> = (0..100).map(|i| pred(&i.to_string(), "A", "B", (1, 0), (0, 0))).collect();
        let ledger = bet_run(&preds, &OddsBook::new(), 1.0, MissingOddsPolicy::Lose);
        assert_eq!(ledger.net_earnings, -100.0);
    }

    #[test]
    fn chi2_independent_and_dependent_columns() {
        let cols = vec!["flat".to_string(), "signal".to_string()];
        // "flat" is proportional to class size; "signal" is nonzero only in class 1.
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let ranking = chi2_importance(&cols, &x, &[0, 0, 1, 1]).unwrap();
        assert_eq!(ranking.scores[0].0, "signal");
        assert!(ranking.scores[0].1 > 0.0);
        assert_eq!(ranking.scores[1], ("flat".to_string(), 0.0));
    }

    #[test]
    fn chi2_rejects_negative_input() {
        let cols = vec!["a".to_string()];
        assert_eq!(
            chi2_importance(&cols, &[vec![1.0], vec![-1.0]], &[0, 1]),
            Err(EvalError::NegativeFeature { column: "a".into(), row: 1 })
        );
    }

    #[test]
    fn competition_ranking_shares_the_better_rank() {
        let ranks = competition_ranks(&[Some(50.0), Some(50.0), Some(25.0), None, Some(50.0)], true);
        assert_eq!(ranks, vec![1, 1, 4, 5, 1]);
        let lower = competition_ranks(&[Some(0.9), Some(0.8), Some(0.9)], false);
        assert_eq!(lower, vec![2, 1, 2]);
    }

    #[test]
    fn rank_sum_of_team_stats_row() {
        let mut ranks = BTreeMap::new();
        for (s, r) in Scenario::ALL.iter().zip([2, 1, 1, 2, 1, 1]) {
            ranks.insert(("Team Stats".to_string(), *s), r);
        }
        let rows = rank_sum_overview(&["Team Stats".to_string()], &ranks).unwrap();
        assert_eq!(rows[0].rank_sum, 8);
    }

    #[test]
    fn missing_scenario_rank() {
        let ranks = BTreeMap::new();
        assert!(matches!(
            rank_sum_overview(&["x".to_string()], &ranks),
            Err(EvalError::MissingScenario { .. })
        ));
    }

    #[test]
    fn simulated_home_wins_give_three_points_per_home_match() {
        let preds = [
            pred("1", "A", "B", (1, 0), (0, 0)),
            pred("2", "A", "C", (1, 0), (0, 0)),
            pred("3", "C", "B", (1, 0), (0, 0)),
        ];
        let t = simulate_standings(["A", "B", "C", "D"], &preds).unwrap();
        assert_eq!(t.row("A").unwrap().points, 6);
        assert_eq!(t.row("C").unwrap().points, 3);
        assert_eq!(t.row("B").unwrap().points, 0);
        assert_eq!(t.row("D").unwrap().played, 0);
    }
}
