//! Baseline scoreline predictors and league tables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{Fixture, Scoreline};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HeuristicError {
    #[error("the training set has no completed fixtures")]
    EmptyTrainingSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableSource {
    Actual,
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandingsRow {
    pub team: String,
    pub played: u32,
    pub won: u32,
    pub drawn: u32,
    pub lost: u32,
    pub goals_for: u32,
    pub goals_against: u32,
    pub points: u32,
}

impl StandingsRow {
    fn new(team: &str) -> Self {
        StandingsRow {
            team: team.to_string(),
            played: 0,
            won: 0,
            drawn: 0,
            lost: 0,
            goals_for: 0,
            goals_against: 0,
            points: 0,
        }
    }

    pub fn goal_difference(&self) -> i64 {
        i64::from(self.goals_for) - i64::from(self.goals_against)
    }

    fn record(&mut self, scored: u32, conceded: u32) {
        self.played += 1;
        self.goals_for += scored;
        self.goals_against += conceded;
        match scored.cmp(&conceded) {
            Ordering::Greater => {
                self.won += 1;
                self.points += 3;
            }
            Ordering::Equal => {
                self.drawn += 1;
                self.points += 1;
            }
            Ordering::Less => self.lost += 1,
        }
    }
}

/// League table ordered by points, goal difference, goals scored, then name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandingsTable {
    pub source: TableSource,
    pub rows: Vec<StandingsRow>,
}

impl StandingsTable {
    /// Table over `results` given as `(home, away, score)`. Every team in
    /// `teams` gets a row even without a match.
    pub fn from_results<'a>(
        source: TableSource,
        teams: impl IntoIterator<Item = &'a str>,
        results: impl IntoIterator<Item = (&'a str, &'a str, Scoreline)>,
    ) -> Self {
        let mut rows: BTreeMap<&str, StandingsRow> =
            teams.into_iter().map(|t| (t, StandingsRow::new(t))).collect();
        for (home, away, s) in results {
            rows.entry(home)
                .or_insert_with(|| StandingsRow::new(home))
                .record(s.home, s.away);
            rows.entry(away)
                .or_insert_with(|| StandingsRow::new(away))
                .record(s.away, s.home);
        }
        let mut rows: Vec<StandingsRow> = rows.into_values().collect();
        rows.sort_by(|a, b| {
            b.points
                .cmp(&a.points)
                .then(b.goal_difference().cmp(&a.goal_difference()))
                .then(b.goals_for.cmp(&a.goals_for))
                .then(a.team.cmp(&b.team))
        });
        StandingsTable { source, rows }
    }

    /// Actual table over completed `fixtures`.
    pub fn from_fixtures(fixtures: &[Fixture]) -> Self {
        Self::from_results(
            TableSource::Actual,
            fixtures
                .iter()
                .flat_map(|f| [f.home_team.as_str(), f.away_team.as_str()]),
            fixtures.iter().filter_map(|f| {
                f.result
                    .map(|s| (f.home_team.as_str(), f.away_team.as_str(), s))
            }),
        )
    }

    /// 1-based position after tie-breaks.
    pub fn position(&self, team: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.team == team).map(|p| p + 1)
    }

    pub fn row(&self, team: &str) -> Option<&StandingsRow> {
        self.rows.iter().find(|r| r.team == team)
    }

    pub fn teams(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.team.as_str())
    }

    pub fn total_points(&self) -> u32 {
        self.rows.iter().map(|r| r.points).sum()
    }
}

/// Standings over the completed training fixtures.
pub fn build_training_table(train: &[Fixture]) -> Result<StandingsTable, HeuristicError> {
    if !train.iter().any(|f| f.result.is_some()) {
        return Err(HeuristicError::EmptyTrainingSet);
    }
    Ok(StandingsTable::from_fixtures(train))
}

/// Always 1:0 to the home side.
pub fn home_win_predict(_fixture: &Fixture) -> Scoreline {
    Scoreline::new(1, 0)
}

/// 1:0 to whichever team sits higher in `table`. Teams missing from the
/// table rank below every listed team, alphabetically among themselves.
pub fn tradition_predict(fixture: &Fixture, table: &StandingsTable) -> Scoreline {
    let rank = |team: &str| match table.position(team) {
        Some(p) => (0, p, String::new()),
        None => (1, 0, team.to_string()),
    };
    if rank(&fixture.home_team) < rank(&fixture.away_team) {
        Scoreline::new(1, 0)
    } else {
        Scoreline::new(0, 1)
    }
}

/// Goals the team scored in its latest completed match before `fixture`.
pub fn last_goals(team: &str, fixture: &Fixture, history: &[Fixture]) -> Option<u32> {
    history
        .iter()
        .filter(|f| f.kickoff < fixture.kickoff)
        .filter_map(|f| {
            let s = f.result?;
            if f.home_team == team {
                Some((f.kickoff, s.home))
            } else if f.away_team == team {
                Some((f.kickoff, s.away))
            } else {
                None
            }
        })
        .max_by_key(|(kickoff, _)| *kickoff)
        .map(|(_, goals)| goals)
}

/// Goals goal each side scored in its previous match; 1 for a debut.
pub fn recency_predict(fixture: &Fixture, history: &[Fixture]) -> Scoreline {
    Scoreline::new(
        last_goals(&fixture.home_team, fixture, history).unwrap_or(1),
        last_goals(&fixture.away_team, fixture, history).unwrap_or(1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicKind {
    HomeWin,
    Tradition,
    Recency,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [
        HeuristicKind::HomeWin,
        HeuristicKind::Tradition,
        HeuristicKind::Recency,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicKind::HomeWin => "home-win",
            HeuristicKind::Tradition => "tradition",
            HeuristicKind::Recency => "recency",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HeuristicKind::HomeWin => "Home Win",
            HeuristicKind::Tradition => "Tradition",
            HeuristicKind::Recency => "Recency",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeuristicKind::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| format!("unknown heuristic {s:?}"))
    }
}

/// A ready-to-use baseline with whatever state it needs.
#[derive(Debug, Clone)]
pub enum Heuristic {
    HomeWin,
    Tradition(StandingsTable),
    /// Observed results the predictor may look back on.
    Recency(Vec<Fixture>),
}

impl Heuristic {
    /// Builds `kind` from the training fixtures and every observed result.
    pub fn build(
        kind: HeuristicKind,
        train: &[Fixture],
        observed: &[Fixture],
    ) -> Result<Self, HeuristicError> {
        Ok(match kind {
            HeuristicKind::HomeWin => Heuristic::HomeWin,
            HeuristicKind::Tradition => Heuristic::Tradition(build_training_table(train)?),
            HeuristicKind::Recency => Heuristic::Recency(observed.to_vec()),
        })
    }

    pub fn kind(&self) -> HeuristicKind {
        match self {
            Heuristic::HomeWin => HeuristicKind::HomeWin,
            Heuristic::Tradition(_) => HeuristicKind::Tradition,
            Heuristic::Recency(_) => HeuristicKind::Recency,
        }
    }

    pub fn predict(&self, fixture: &Fixture) -> Scoreline {
        match self {
            Heuristic::HomeWin => home_win_predict(fixture),
            Heuristic::Tradition(table) => tradition_predict(fixture, table),
            Heuristic::Recency(history) => recency_predict(fixture, history),
        }
    }
}
