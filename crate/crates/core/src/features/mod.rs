//! Walk-forward feature rows for the three representations.
//!
//! Every row for a fixture only uses archive entries that kicked off strictly
//! before it, drawn from the fixture's season and the season before.

mod players;
mod schema;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::{ArchiveEntry, Fixture, PositionGroup, StatsArchive};
pub use crate::ingest::Side;
pub use players::{Coverage, PlayerUniverse};
pub use schema::{
    Block, DefensiveStats, FeatureSchema, OffensiveStats, Role, DEFENSIVE_DF, DEFENSIVE_GK,
    OFFENSIVE_DF, OFFENSIVE_FW, OFFENSIVE_MF, STATS_WIDTH,
};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("fixture {0} is missing a lineup")]
    MissingLineup(String),
    #[error("no {0} data and no league fallback before kickoff")]
    EmptyGroup(PositionGroup),
    #[error("team {0} has no archive records before kickoff")]
    UnknownTeam(String),
    #[error("the players approach needs a player universe")]
    MissingUniverse,
    #[error("invalid feature schema: {0}")]
    Schema(String),
    #[error("no feature rows could be built ({} fixtures skipped)", .0.len())]
    NoRows(Vec<SkippedFixture>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Which representation a feature row uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    Players,
    LineupStats,
    TeamStats,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Players, Approach::LineupStats, Approach::TeamStats];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::Players => "players",
            Approach::LineupStats => "lineup-stats",
            Approach::TeamStats => "team-stats",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Approach::Players => "Players",
            Approach::LineupStats => "Lineup Stats",
            Approach::TeamStats => "Team Stats",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown approach {s:?}"))
    }
}

/// Per-stat means keyed by stat name.
pub type StatVector = std::collections::BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub fixture_id: String,
    pub side: Side,
    pub values: Vec<f64>,
    /// Goals scored by `side`; `None` for unplayed fixtures.
    pub target: Option<u32>,
    /// Columns filled from the league-wide fallback.
    pub fallback_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFixture {
    pub fixture_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub approach: Approach,
    pub side: Side,
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
    pub skipped: Vec<SkippedFixture>,
    /// Lineup players found in the universe (players approach only).
    pub coverage: Option<Coverage>,
}

impl FeatureMatrix {
    pub fn fingerprint(&self) -> String {
        columns_fingerprint(self.approach, &self.columns)
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    /// Rows with a known target, as `(features, goals)`.
    pub fn labelled(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.rows
            .iter()
            .filter_map(|r| r.target.map(|t| (r.values.clone(), f64::from(t))))
            .unzip()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["fixture_id".to_string(), "side".into(), "target".into()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![
                row.fixture_id.clone(),
                row.side.to_string(),
                row.target.map(|t| t.to_string()).unwrap_or_default(),
            ];
            record.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|source| FeatureError::Io {
            path: PathBuf::new(),
            source,
        })?;
        Ok(())
    }
}

/// Identifies a column layout; models refuse rows with another fingerprint.
pub fn columns_fingerprint(approach: Approach, columns: &[String]) -> String {
    let mut text = String::from(approach.as_str());
    for c in columns {
        text.push('\n');
        text.push_str(c);
    }
    crate::sha256_hex(text.as_bytes())
}

/// The slice of the archive a fixture's features may look at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationWindow {
    pub as_of: DateTime<Utc>,
    /// Season ordinals: the fixture's season and the one before it.
    pub seasons: Range<usize>,
}

impl AggregationWindow {
    pub fn new(archive: &StatsArchive, as_of: DateTime<Utc>, season: &str) -> Self {
        let ord = archive.calendar().ordinal(season);
        AggregationWindow {
            as_of,
            seasons: ord.saturating_sub(1)..ord + 1,
        }
    }

    pub fn for_fixture(archive: &StatsArchive, fixture: &Fixture) -> Self {
        Self::new(archive, fixture.kickoff, &fixture.season)
    }

    pub fn contains(&self, entry: &ArchiveEntry) -> bool {
        entry.kickoff < self.as_of && self.seasons.contains(&entry.season_ordinal)
    }
}

/// Mean of each stat over the player's matches inside `window`, following the
/// player across clubs. `None` when the player has no such match.
pub fn player_form_average(
    archive: &StatsArchive,
    player_id: &str,
    window: &AggregationWindow,
) -> Option<StatVector> {
    let mut sums: HashMap<&str, (f64, u32)> = HashMap::new();
    let mut matches = 0;
    for entry in archive.player_entries(player_id).filter(|e| window.contains(e)) {
        matches += 1;
        for (stat, &v) in &entry.record.stats {
            let s = sums.entry(stat.as_str()).or_insert((0.0, 0));
            s.0 += v;
            s.1 += 1;
        }
    }
    (matches > 0).then(|| {
        sums.into_iter()
            .map(|(k, (sum, n))| (k.to_string(), sum / f64::from(n)))
            .collect()
    })
}

/// Position group of the player's latest match before `as_of`, at any club.
pub fn current_group(
    archive: &StatsArchive,
    player_id: &str,
    as_of: DateTime<Utc>,
) -> Option<PositionGroup> {
    archive
        .player_entries(player_id)
        .take_while(|e| e.kickoff < as_of)
        .last()
        .map(|e| e.record.position_group)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupAggregate {
    pub values: Vec<f64>,
    /// True where the league-wide fallback replaced an all-cold group.
    pub fallback: Vec<bool>,
}

/// Cumulative (sum, count) per (group, stat) over archive entries in kickoff
/// order, giving league means over any window in constant time.
#[derive(Debug, Clone, Default)]
struct LeagueMeans {
    prefix: HashMap<(PositionGroup, String), Vec<(f64, u32)>>,
}

impl LeagueMeans {
    fn new(archive: &StatsArchive, schema: &FeatureSchema) -> Self {
        let mut prefix = HashMap::new();
        for block in schema.blocks() {
            for stat in block.stats {
                let key = (block.group, stat.clone());
                if prefix.contains_key(&key) {
                    continue;
                }
                let mut acc = Vec::with_capacity(archive.len() + 1);
                let (mut sum, mut n) = (0.0, 0u32);
                acc.push((sum, n));
                for e in archive.entries() {
                    if e.record.position_group == block.group {
                        if let Some(v) = e.record.stats.get(stat) {
                            sum += v;
                            n += 1;
                        }
                    }
                    acc.push((sum, n));
                }
                prefix.insert(key, acc);
            }
        }
        LeagueMeans { prefix }
    }

    fn mean(&self, group: PositionGroup, stat: &str, range: &Range<usize>) -> Option<f64> {
        let acc = self.prefix.get(&(group, stat.to_string()))?;
        let (hi_sum, hi_n) = acc[range.end];
        let (lo_sum, lo_n) = acc[range.start];
        let n = hi_n - lo_n;
        (n > 0).then(|| (hi_sum - lo_sum) / f64::from(n))
    }
}

/// Builds feature rows from an immutable archive. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct FeatureBuilder<'a> {
    archive: &'a StatsArchive,
    schema: &'a FeatureSchema,
    league: LeagueMeans,
    universe: Option<PlayerUniverse>,
}

impl<'a> FeatureBuilder<'a> {
    pub fn new(archive: &'a StatsArchive, schema: &'a FeatureSchema) -> Self {
        FeatureBuilder {
            archive,
            schema,
            league: LeagueMeans::new(archive, schema),
            universe: None,
        }
    }

    /// Enables the players approach with a universe built from training fixtures.
    pub fn with_universe(mut self, universe: PlayerUniverse) -> Self {
        self.universe = Some(universe);
        self
    }

    pub fn archive(&self) -> &StatsArchive {
        self.archive
    }

    pub fn schema(&self) -> &FeatureSchema {
        self.schema
    }

    pub fn universe(&self) -> Option<&PlayerUniverse> {
        self.universe.as_ref()
    }

    pub fn columns(&self, approach: Approach, side: Side) -> Result<Vec<String>, FeatureError> {
        match approach {
            Approach::Players => self
                .universe
                .as_ref()
                .map(|u| u.players().to_vec())
                .ok_or(FeatureError::MissingUniverse),
            Approach::LineupStats | Approach::TeamStats => Ok(self.schema.columns(side)),
        }
    }

    pub fn fingerprint(&self, approach: Approach, side: Side) -> Result<String, FeatureError> {
        Ok(columns_fingerprint(approach, &self.columns(approach, side)?))
    }

    pub fn window(&self, fixture: &Fixture) -> AggregationWindow {
        AggregationWindow::for_fixture(self.archive, fixture)
    }

    /// Mean over the form averages of `players` assigned to `group`, one value
    /// per entry of `stats`. Stats no warm player reports fall back to the
    /// league mean of that group over the window.
    pub fn group_aggregate(
        &self,
        players: &[&str],
        group: PositionGroup,
        stats: &[String],
        window: &AggregationWindow,
    ) -> Result<GroupAggregate, FeatureError> {
        let forms: Vec<StatVector> = players
            .iter()
            .filter(|p| current_group(self.archive, p, window.as_of) == Some(group))
            .filter_map(|p| player_form_average(self.archive, p, window))
            .collect();
        let range = self.archive.window_range(window.as_of, window.seasons.clone());

        let mut values = Vec::with_capacity(stats.len());
        let mut fallback = Vec::with_capacity(stats.len());
        for stat in stats {
            let (sum, n) = forms
                .iter()
                .filter_map(|f| f.get(stat))
                .fold((0.0, 0u32), |(s, n), v| (s + v, n + 1));
            if n > 0 {
                values.push(sum / f64::from(n));
                fallback.push(false);
            } else {
                let league = self
                    .league
                    .mean(group, stat, &range)
                    .ok_or(FeatureError::EmptyGroup(group))?;
                values.push(league);
                fallback.push(true);
            }
        }
        Ok(GroupAggregate { values, fallback })
    }

    fn assemble(
        &self,
        fixture: &Fixture,
        side: Side,
        own: &[&str],
        opponent: &[&str],
    ) -> Result<FeatureRow, FeatureError> {
        let window = self.window(fixture);
        let mut values = Vec::with_capacity(self.schema.width());
        let mut fallback_columns = Vec::new();
        for block in self.schema.blocks() {
            let players = match block.role {
                Role::Offensive => own,
                Role::Defensive => opponent,
            };
            let agg = self.group_aggregate(players, block.group, block.stats, &window)?;
            let offset = values.len();
            fallback_columns.extend(
                agg.fallback
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(i, _)| offset + i),
            );
            values.extend(agg.values);
        }
        Ok(FeatureRow {
            fixture_id: fixture.fixture_id.clone(),
            side,
            values,
            target: fixture.goals(side),
            fallback_columns,
        })
    }

    /// Lineup Stats row: group averages of the side's starting eleven
    /// (offensive blocks) and of the opponent's eleven (defensive blocks).
    pub fn lineup_features(&self, fixture: &Fixture, side: Side) -> Result<FeatureRow, FeatureError> {
        let missing = || FeatureError::MissingLineup(fixture.fixture_id.clone());
        let own = fixture.lineup(side).ok_or_else(missing)?;
        let opp = fixture.lineup(side.opponent()).ok_or_else(missing)?;
        let own: Vec<&str> = own.iter().map(String::as_str).collect();
        let opp: Vec<&str> = opp.iter().map(String::as_str).collect();
        self.assemble(fixture, side, &own, &opp)
    }

    /// Every player with at least one record for `team` inside the window.
    pub fn squad(&self, team: &str, window: &AggregationWindow) -> Vec<&'a str> {
        let archive = self.archive;
        let squad: BTreeSet<&'a str> = archive
            .team_entries(team)
            .filter(|e| window.contains(e))
            .map(|e| e.record.player_id.as_str())
            .collect();
        squad.into_iter().collect()
    }

    /// Team Stats row: same layout as the lineup row, averaged over whole squads.
    pub fn team_features(&self, fixture: &Fixture, side: Side) -> Result<FeatureRow, FeatureError> {
        for team in [fixture.home_team.as_str(), fixture.away_team.as_str()] {
            let known = self
                .archive
                .team_entries(team)
                .next()
                .is_some_and(|e| e.kickoff < fixture.kickoff);
            if !known {
                return Err(FeatureError::UnknownTeam(team.to_string()));
            }
        }
        let window = self.window(fixture);
        let own = self.squad(fixture.team(side), &window);
        let opp = self.squad(fixture.team(side.opponent()), &window);
        self.assemble(fixture, side, &own, &opp)
    }

    /// Players row: +1 for home starters, -1 for away starters, 0 otherwise.
    pub fn encode_players(
        &self,
        fixture: &Fixture,
        side: Side,
    ) -> Result<(FeatureRow, Coverage), FeatureError> {
        let universe = self.universe.as_ref().ok_or(FeatureError::MissingUniverse)?;
        let (values, coverage) = universe.encode(fixture)?;
        let row = FeatureRow {
            fixture_id: fixture.fixture_id.clone(),
            side,
            values,
            target: fixture.goals(side),
            fallback_columns: Vec::new(),
        };
        Ok((row, coverage))
    }

    pub fn build_row(
        &self,
        fixture: &Fixture,
        approach: Approach,
        side: Side,
    ) -> Result<FeatureRow, FeatureError> {
        match approach {
            Approach::Players => self.encode_players(fixture, side).map(|(row, _)| row),
            Approach::LineupStats => self.lineup_features(fixture, side),
            Approach::TeamStats => self.team_features(fixture, side),
        }
    }

    /// One row per eligible fixture, in input order. Fixtures whose row cannot
    /// be built are listed in `skipped`; only an empty result is an error.
    pub fn build_matrix(
        &self,
        fixtures: &[Fixture],
        approach: Approach,
        side: Side,
    ) -> Result<FeatureMatrix, FeatureError> {
        let columns = self.columns(approach, side)?;
        let built: Vec<Result<(FeatureRow, Option<Coverage>), FeatureError>> = fixtures
            .par_iter()
            .map(|f| match approach {
                Approach::Players => self.encode_players(f, side).map(|(r, c)| (r, Some(c))),
                _ => self.build_row(f, approach, side).map(|r| (r, None)),
            })
            .collect();

        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        let mut coverage: Option<Coverage> = None;
        for (fixture, result) in fixtures.iter().zip(built) {
            match result {
                Ok((row, cov)) => {
                    if let Some(c) = cov {
                        coverage.get_or_insert_with(Coverage::default).add(c);
                    }
                    rows.push(row);
                }
                Err(e) => skipped.push(SkippedFixture {
                    fixture_id: fixture.fixture_id.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        if rows.is_empty() {
            return Err(FeatureError::NoRows(skipped));
        }
        Ok(FeatureMatrix {
            approach,
            side,
            columns,
            rows,
            skipped,
            coverage,
        })
    }
}
