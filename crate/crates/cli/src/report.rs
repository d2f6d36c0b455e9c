//! CSV and text outputs. Every file opens with a `# config_hash=... seed=...`
//! comment line and is written to a temporary name, then renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use scoreline_core::evaluate::{BettingLedger, FeatureRanking, FitnessReport, OverviewRow, Scenario};
use scoreline_core::heuristics::StandingsTable;
use scoreline_core::pipeline::ModelReport;
use scoreline_core::predict::{write_predictions, ScorelinePrediction};

/// Identifies the run that produced a file.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    pub fn line(&self) -> String {
        format!("# config_hash={} seed={}\n", self.config_hash, self.seed)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn csv_bytes(stamp: &Stamp, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<Vec<u8>> {
    let mut out = stamp.line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(out)
}

pub fn write_csv(path: &Path, stamp: &Stamp, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    write_atomic(path, &csv_bytes(stamp, header, rows)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into())
}

pub fn predictions(path: &Path, stamp: &Stamp, preds: &[ScorelinePrediction]) -> anyhow::Result<()> {
    let mut out = stamp.line().into_bytes();
    write_predictions(&mut out, preds)?;
    write_atomic(path, &out)
}

pub fn fitness_rows(reports: &[FitnessReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.model.clone(),
                r.side.to_string(),
                r.mae.to_string(),
                r.rmse.to_string(),
                opt(r.r2),
                r.n.to_string(),
            ]
        })
        .collect()
}

pub const FITNESS_HEADER: [&str; 6] = ["model", "side", "mae", "rmse", "r2", "n"];

pub fn standings_rows(model: &str, table: &StandingsTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                model.to_string(),
                (i + 1).to_string(),
                r.team.clone(),
                r.played.to_string(),
                r.won.to_string(),
                r.drawn.to_string(),
                r.lost.to_string(),
                r.goals_for.to_string(),
                r.goals_against.to_string(),
                r.goal_difference().to_string(),
                r.points.to_string(),
            ]
        })
        .collect()
}

pub const STANDINGS_HEADER: [&str; 11] = [
    "model",
    "position",
    "team",
    "played",
    "won",
    "drawn",
    "lost",
    "goals_for",
    "goals_against",
    "goal_difference",
    "points",
];

pub fn betting_row(ledger: &BettingLedger) -> Vec<String> {
    vec![
        ledger.model.clone(),
        ledger.stake.to_string(),
        ledger.policy.to_string(),
        ledger.bets_placed.to_string(),
        ledger.bets_skipped.to_string(),
        ledger.net_earnings.to_string(),
    ]
}

pub const BETTING_HEADER: [&str; 6] = ["model", "stake", "policy", "bets_placed", "bets_skipped", "net_earnings"];

pub fn ledger_rows(ledger: &BettingLedger) -> Vec<Vec<String>> {
    ledger
        .entries
        .iter()
        .map(|e| {
            vec![
                ledger.model.clone(),
                e.fixture_id.clone(),
                e.predicted.to_string(),
                e.actual.map(|s| s.to_string()).unwrap_or_default(),
                opt(e.odds),
                e.placed.to_string(),
                e.correct.to_string(),
                e.payout.to_string(),
            ]
        })
        .collect()
}

pub const LEDGER_HEADER: [&str; 8] = [
    "model",
    "fixture_id",
    "predicted",
    "actual",
    "odds",
    "placed",
    "correct",
    "payout",
];

pub fn importance_rows(side: &str, ranking: &FeatureRanking) -> Vec<Vec<String>> {
    ranking
        .scores
        .iter()
        .enumerate()
        .map(|(i, (f, s))| vec![side.to_string(), (i + 1).to_string(), f.clone(), s.to_string()])
        .collect()
}

pub const IMPORTANCE_HEADER: [&str; 4] = ["side", "rank", "feature", "chi2"];

pub fn overview_rows(rows: &[OverviewRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut v = vec![r.model.clone()];
            v.extend(r.ranks.iter().map(|x| x.to_string()));
            v.push(r.rank_sum.to_string());
            v
        })
        .collect()
}

pub fn overview_header() -> Vec<&'static str> {
    let mut h = vec!["model"];
    h.extend(Scenario::ALL.iter().map(|s| s.as_str()));
    h.push("rank_sum");
    h
}

/// Writes the per-model report files into `dir`.
pub fn write_bundle(
    dir: &Path,
    stamp: &Stamp,
    actual: &StandingsTable,
    reports: &[ModelReport],
) -> anyhow::Result<()> {
    let fitness: Vec<FitnessReport> = reports.iter().flat_map(|r| r.fitness.clone()).collect();
    write_csv(&dir.join("fitness.csv"), stamp, &FITNESS_HEADER, &fitness_rows(&fitness))?;

    let mut standings = standings_rows("Actual", actual);
    for r in reports {
        standings.extend(standings_rows(&r.model, &r.standings));
    }
    write_csv(&dir.join("standings.csv"), stamp, &STANDINGS_HEADER, &standings)?;

    let tau: Vec<Vec<String>> = reports.iter().map(|r| vec![r.model.clone(), opt(r.tau)]).collect();
    write_csv(&dir.join("tau.csv"), stamp, &["model", "tau"], &tau)?;

    let zones: Vec<Vec<String>> = reports
        .iter()
        .map(|r| vec![r.model.clone(), r.top4.to_string(), r.relegation.to_string()])
        .collect();
    write_csv(&dir.join("zones.csv"), stamp, &["model", "top4_pct", "relegation_pct"], &zones)?;

    let betting: Vec<Vec<String>> = reports.iter().map(|r| betting_row(&r.betting)).collect();
    write_csv(&dir.join("betting.csv"), stamp, &BETTING_HEADER, &betting)?;
    let ledger: Vec<Vec<String>> = reports.iter().flat_map(|r| ledger_rows(&r.betting)).collect();
    write_csv(&dir.join("betting_ledger.csv"), stamp, &LEDGER_HEADER, &ledger)?;

    let preds: Vec<ScorelinePrediction> = reports.iter().flat_map(|r| r.predictions.clone()).collect();
    predictions(&dir.join("predictions.csv"), stamp, &preds)?;

    let skipped: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| {
            r.skipped
                .iter()
                .map(|s| vec![r.model.clone(), s.fixture_id.clone(), s.reason.clone()])
        })
        .collect();
    write_csv(&dir.join("skipped.csv"), stamp, &["model", "fixture_id", "reason"], &skipped)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "n/a".into())
}

/// Plain-text overview of a report bundle.
pub fn summary(
    stamp: &Stamp,
    reports: &[ModelReport],
    overview: Option<&[OverviewRow]>,
    importance: &[(String, FeatureRanking)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_hash {}\nseed {}\n", stamp.config_hash, stamp.seed);
    let _ = writeln!(
        s,
        "{:<24} {:>8} {:>8} {:>8} {:>8} {:>7} {:>6} {:>6} {:>9} {:>5}",
        "model", "home_mae", "away_mae", "home_r2", "away_r2", "tau", "top4", "rel", "net", "skip"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<24} {:>8.3} {:>8.3} {:>8} {:>8} {:>7} {:>6.0} {:>6.0} {:>9.2} {:>5}",
            r.model,
            r.fitness[0].mae,
            r.fitness[1].mae,
            fmt_opt(r.fitness[0].r2, 3),
            fmt_opt(r.fitness[1].r2, 3),
            fmt_opt(r.tau, 3),
            r.top4,
            r.relegation,
            r.betting.net_earnings,
            r.skipped.len()
        );
    }
    if let Some(rows) = overview {
        let _ = writeln!(s, "\nrank sums");
        for r in rows {
            let ranks: Vec<String> = r.ranks.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{:<24} {:<20} {:>4}", r.model, ranks.join(" "), r.rank_sum);
        }
    }
    for (side, ranking) in importance {
        let _ = writeln!(s, "\ntop features ({side})");
        for (f, score) in ranking.top(5) {
            let _ = writeln!(s, "{f:<24} {score:>10.3}");
        }
    }
    s
}
