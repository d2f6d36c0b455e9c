//! Loading, validation and chronological partitioning of the three input files.
//!
//! All files are UTF-8 CSV with a header row:
//!
//! - `fixtures.csv`: `fixture_id,season,kickoff,home_team,away_team,home_goals,away_goals,home_lineup,away_lineup`
//!   with RFC 3339 kickoffs and lineups as `;`-separated player ids (empty when unknown).
//! - `player_stats.csv`: `player_id,fixture_id,team,position_group,stat_name,value`, one stat per row.
//! - `odds.csv`: `fixture_id,home_goals,away_goals,odds` with decimal correct-score odds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// Number of players in a starting lineup.
pub const LINEUP_SIZE: usize = 11;

pub const FIXTURES_FILE: &str = "fixtures.csv";
pub const PLAYER_STATS_FILE: &str = "player_stats.csv";
pub const ODDS_FILE: &str = "odds.csv";

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {reason}")]
    Parse { row: u64, reason: String },
    #[error("duplicate fixture {0}")]
    DuplicateFixture(String),
    #[error("fixture {0}: a lineup must list exactly 11 distinct players")]
    MalformedLineup(String),
    #[error("unknown fixture {0}")]
    UnknownFixture(String),
    #[error("player {player_id}: negative value for stat {stat}")]
    NegativeStat { player_id: String, stat: String },
    #[error("fixture {fixture_id}: odds for {scoreline} must exceed 1.0")]
    OddsNotPositive {
        fixture_id: String,
        scoreline: Scoreline,
    },
    #[error("test size {test_size} leaves no training fixtures out of {total}")]
    TestTooLarge { test_size: usize, total: usize },
    #[error("season {0} is split by fixtures of another season in kickoff order")]
    InterleavedSeasons(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Home or away, the two independent goal models of a fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Home,
    Away,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Home, Side::Away];

    pub fn opponent(self) -> Side {
        match self {
            Side::Home => Side::Away,
            Side::Away => Side::Home,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Home => "home",
            Side::Away => "away",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An exact final score, home goals first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scoreline {
    pub home: u32,
    pub away: u32,
}

impl Scoreline {
    pub fn new(home: u32, away: u32) -> Self {
        Scoreline { home, away }
    }

    pub fn goals(&self, side: Side) -> u32 {
        match side {
            Side::Home => self.home,
            Side::Away => self.away,
        }
    }
}

impl fmt::Display for Scoreline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.home, self.away)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PositionGroup {
    GK,
    DF,
    MF,
    FW,
}

impl PositionGroup {
    pub const ALL: [PositionGroup; 4] = [
        PositionGroup::GK,
        PositionGroup::DF,
        PositionGroup::MF,
        PositionGroup::FW,
    ];

    /// Single-letter prefix used in feature names (`g_CS`, `m_GCA`, ...).
    pub fn prefix(self) -> char {
        match self {
            PositionGroup::GK => 'g',
            PositionGroup::DF => 'd',
            PositionGroup::MF => 'm',
            PositionGroup::FW => 'a',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PositionGroup::GK => "GK",
            PositionGroup::DF => "DF",
            PositionGroup::MF => "MF",
            PositionGroup::FW => "FW",
        }
    }
}

impl fmt::Display for PositionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PositionGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GK" => Ok(PositionGroup::GK),
            "DF" => Ok(PositionGroup::DF),
            "MF" => Ok(PositionGroup::MF),
            "FW" => Ok(PositionGroup::FW),
            other => Err(format!("unknown position group {other:?}")),
        }
    }
}

/// One match. `result` is `None` only for fixtures that have not been played.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub fixture_id: String,
    pub season: String,
    pub kickoff: DateTime<Utc>,
    pub home_team: String,
    pub away_team: String,
    pub result: Option<Scoreline>,
    pub home_lineup: Option<Vec<String>>,
    pub away_lineup: Option<Vec<String>>,
}

impl Fixture {
    pub fn team(&self, side: Side) -> &str {
        match side {
            Side::Home => &self.home_team,
            Side::Away => &self.away_team,
        }
    }

    pub fn lineup(&self, side: Side) -> Option<&[String]> {
        match side {
            Side::Home => self.home_lineup.as_deref(),
            Side::Away => self.away_lineup.as_deref(),
        }
    }

    pub fn goals(&self, side: Side) -> Option<u32> {
        self.result.map(|s| s.goals(side))
    }

    /// The same match with home and away labels exchanged.
    pub fn swapped(&self) -> Fixture {
        Fixture {
            fixture_id: self.fixture_id.clone(),
            season: self.season.clone(),
            kickoff: self.kickoff,
            home_team: self.away_team.clone(),
            away_team: self.home_team.clone(),
            result: self.result.map(|s| Scoreline::new(s.away, s.home)),
            home_lineup: self.away_lineup.clone(),
            away_lineup: self.home_lineup.clone(),
        }
    }
}

/// One player's statistics for one match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerMatchStats {
    pub player_id: String,
    pub fixture_id: String,
    /// Team the player appeared for in this fixture.
    pub team: String,
    pub position_group: PositionGroup,
    pub stats: BTreeMap<String, f64>,
}

/// Correct-score odds for one fixture. Unquoted scorelines are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct OddsRecord {
    pub fixture_id: String,
    pub scoreline_odds: BTreeMap<Scoreline, f64>,
}

pub type OddsBook = BTreeMap<String, OddsRecord>;

/// Season labels in the order they are first played.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeasonCalendar {
    seasons: Vec<String>,
}

impl SeasonCalendar {
    /// Builds the calendar from chronologically sorted fixtures. Each season
    /// must occupy one contiguous block of kickoffs.
    pub fn from_fixtures(fixtures: &[Fixture]) -> Result<Self> {
        let mut seasons: Vec<String> = Vec::new();
        for f in fixtures {
            if seasons.last() == Some(&f.season) {
                continue;
            }
            if seasons.contains(&f.season) {
                return Err(IngestError::InterleavedSeasons(f.season.clone()));
            }
            seasons.push(f.season.clone());
        }
        Ok(SeasonCalendar { seasons })
    }

    pub fn seasons(&self) -> &[String] {
        &self.seasons
    }

    /// Position of `season` in the calendar. Labels never seen are treated as
    /// the season following the last known one.
    pub fn ordinal(&self, season: &str) -> usize {
        self.seasons
            .iter()
            .position(|s| s == season)
            .unwrap_or(self.seasons.len())
    }

    pub fn previous(&self, season: &str) -> Option<&str> {
        let ord = self.ordinal(season);
        ord.checked_sub(1).map(|i| self.seasons[i].as_str())
    }
}

/// A stats record placed on the timeline of its fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub record: PlayerMatchStats,
    pub kickoff: DateTime<Utc>,
    pub season_ordinal: usize,
}

/// Player statistics ordered by kickoff, indexed by player, team and
/// `(player_id, fixture_id)`.
#[derive(Debug, Clone, Default)]
pub struct StatsArchive {
    calendar: SeasonCalendar,
    entries: Vec<ArchiveEntry>,
    by_key: HashMap<(String, String), usize>,
    by_player: HashMap<String, Vec<usize>>,
    by_team: HashMap<String, Vec<usize>>,
}

impl StatsArchive {
    /// Validates `records` against chronologically sorted `fixtures`.
    pub fn new(records: Vec<PlayerMatchStats>, fixtures: &[Fixture]) -> Result<Self> {
        let calendar = SeasonCalendar::from_fixtures(fixtures)?;
        let by_id: HashMap<&str, &Fixture> =
            fixtures.iter().map(|f| (f.fixture_id.as_str(), f)).collect();

        let mut entries = Vec::with_capacity(records.len());
        let mut seen = HashSet::new();
        for record in records {
            let fixture = by_id
                .get(record.fixture_id.as_str())
                .ok_or_else(|| IngestError::UnknownFixture(record.fixture_id.clone()))?;
            if record.team != fixture.home_team && record.team != fixture.away_team {
                return Err(IngestError::Parse {
                    row: 0,
                    reason: format!(
                        "player {} listed for {} which did not play in fixture {}",
                        record.player_id, record.team, record.fixture_id
                    ),
                });
            }
            for (stat, &value) in &record.stats {
                if !value.is_finite() {
                    return Err(IngestError::Parse {
                        row: 0,
                        reason: format!("player {}: non-finite {stat}", record.player_id),
                    });
                }
                if value < 0.0 {
                    return Err(IngestError::NegativeStat {
                        player_id: record.player_id.clone(),
                        stat: stat.clone(),
                    });
                }
            }
            if !seen.insert((record.player_id.clone(), record.fixture_id.clone())) {
                return Err(IngestError::Parse {
                    row: 0,
                    reason: format!(
                        "duplicate record for player {} in fixture {}",
                        record.player_id, record.fixture_id
                    ),
                });
            }
            entries.push(ArchiveEntry {
                season_ordinal: calendar.ordinal(&fixture.season),
                kickoff: fixture.kickoff,
                record,
            });
        }
        Ok(Self::from_entries(calendar, entries))
    }

    fn from_entries(calendar: SeasonCalendar, mut entries: Vec<ArchiveEntry>) -> Self {
        entries.sort_by(|a, b| {
            a.kickoff
                .cmp(&b.kickoff)
                .then_with(|| a.record.fixture_id.cmp(&b.record.fixture_id))
                .then_with(|| a.record.player_id.cmp(&b.record.player_id))
        });
        let mut by_key = HashMap::with_capacity(entries.len());
        let mut by_player: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_team: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            let r = &e.record;
            by_key.insert((r.player_id.clone(), r.fixture_id.clone()), i);
            by_player.entry(r.player_id.clone()).or_default().push(i);
            by_team.entry(r.team.clone()).or_default().push(i);
        }
        StatsArchive {
            calendar,
            entries,
            by_key,
            by_player,
            by_team,
        }
    }

    pub fn calendar(&self) -> &SeasonCalendar {
        &self.calendar
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries in kickoff order.
    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn get(&self, player_id: &str, fixture_id: &str) -> Option<&PlayerMatchStats> {
        self.by_key
            .get(&(player_id.to_string(), fixture_id.to_string()))
            .map(|&i| &self.entries[i].record)
    }

    /// The player's entries in kickoff order.
    pub fn player_entries<'a>(&'a self, player_id: &str) -> impl Iterator<Item = &'a ArchiveEntry> + 'a {
        self.by_player
            .get(player_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.entries[i])
    }

    /// Entries recorded for `team`, in kickoff order.
    pub fn team_entries<'a>(&'a self, team: &str) -> impl Iterator<Item = &'a ArchiveEntry> + 'a {
        self.by_team
            .get(team)
            .into_iter()
            .flatten()
            .map(move |&i| &self.entries[i])
    }

    /// Index range of entries kicked off strictly before `as_of` whose season
    /// ordinal lies in `seasons`.
    pub fn window_range(&self, as_of: DateTime<Utc>, seasons: Range<usize>) -> Range<usize> {
        let lo = self
            .entries
            .partition_point(|e| e.season_ordinal < seasons.start);
        let hi = self
            .entries
            .partition_point(|e| e.kickoff < as_of)
            .min(self.entries.partition_point(|e| e.season_ordinal < seasons.end));
        lo..hi.max(lo)
    }

    /// A copy holding only entries that kicked off strictly before `kickoff`.
    pub fn retain_before(&self, kickoff: DateTime<Utc>) -> StatsArchive {
        let entries = self
            .entries
            .iter()
            .filter(|e| e.kickoff < kickoff)
            .cloned()
            .collect();
        Self::from_entries(self.calendar.clone(), entries)
    }

    /// Number of match records per player.
    pub fn records_per_player(&self) -> BTreeMap<String, usize> {
        self.by_player
            .iter()
            .map(|(p, idx)| (p.clone(), idx.len()))
            .collect()
    }

    pub fn records(&self) -> impl Iterator<Item = &PlayerMatchStats> {
        self.entries.iter().map(|e| &e.record)
    }
}

/// Fixtures, statistics and odds with a fixed train/test boundary.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub fixtures: Vec<Fixture>,
    pub stats: StatsArchive,
    pub odds: OddsBook,
    pub split_index: usize,
}

impl Dataset {
    pub fn new(
        fixtures: Vec<Fixture>,
        stats: StatsArchive,
        odds: OddsBook,
        test_size: usize,
    ) -> Result<Self> {
        let (train, _) = chronological_split(&fixtures, test_size)?;
        let split_index = train.len();
        Ok(Dataset {
            fixtures,
            stats,
            odds,
            split_index,
        })
    }

    /// Loads `fixtures.csv`, `player_stats.csv` and `odds.csv` from `dir`.
    pub fn load(dir: impl AsRef<Path>, test_size: usize) -> Result<Self> {
        let dir = dir.as_ref();
        let fixtures = load_fixtures(dir.join(FIXTURES_FILE))?;
        let stats = load_player_stats(dir.join(PLAYER_STATS_FILE), &fixtures)?;
        let odds = load_odds(dir.join(ODDS_FILE), &fixtures)?;
        Dataset::new(fixtures, stats, odds, test_size)
    }

    pub fn train(&self) -> &[Fixture] {
        &self.fixtures[..self.split_index]
    }

    pub fn test(&self) -> &[Fixture] {
        &self.fixtures[self.split_index..]
    }

    pub fn test_size(&self) -> usize {
        self.fixtures.len() - self.split_index
    }
}

/// Splits chronologically sorted fixtures so the last `test_size` form the test set.
pub fn chronological_split(
    fixtures: &[Fixture],
    test_size: usize,
) -> Result<(&[Fixture], &[Fixture])> {
    if test_size >= fixtures.len() {
        return Err(IngestError::TestTooLarge {
            test_size,
            total: fixtures.len(),
        });
    }
    Ok(fixtures.split_at(fixtures.len() - test_size))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn parse_error(err: csv::Error) -> IngestError {
    let row = err.position().map(|p| p.line()).unwrap_or(0);
    IngestError::Parse {
        row,
        reason: err.to_string(),
    }
}

#[derive(Debug, Deserialize)]
struct FixtureRow {
    fixture_id: String,
    season: String,
    kickoff: String,
    home_team: String,
    away_team: String,
    home_goals: String,
    away_goals: String,
    home_lineup: String,
    away_lineup: String,
}

/// Loads completed fixtures; every row must carry a final score.
pub fn load_fixtures(path: impl AsRef<Path>) -> Result<Vec<Fixture>> {
    read_fixtures(open(path.as_ref())?, true)
}

/// Loads fixtures whose scores may be blank, e.g. upcoming matches.
pub fn load_upcoming_fixtures(path: impl AsRef<Path>) -> Result<Vec<Fixture>> {
    read_fixtures(open(path.as_ref())?, false)
}

pub fn read_fixtures<R: Read>(reader: R, require_results: bool) -> Result<Vec<Fixture>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(parse_error)?.clone();
    let mut fixtures = Vec::new();
    let mut ids = HashSet::new();
    for record in rdr.records() {
        let record = record.map_err(parse_error)?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let raw: FixtureRow = record.deserialize(Some(&headers)).map_err(parse_error)?;
        let fixture = parse_fixture_row(raw, require_results)
            .map_err(|e| e.at_row(row))?;
        if !ids.insert(fixture.fixture_id.clone()) {
            return Err(IngestError::DuplicateFixture(fixture.fixture_id));
        }
        fixtures.push(fixture);
    }
    sort_fixtures(&mut fixtures);
    Ok(fixtures)
}

/// Kickoff order, fixture id breaking ties.
pub fn sort_fixtures(fixtures: &mut [Fixture]) {
    fixtures.sort_by(|a, b| {
        a.kickoff
            .cmp(&b.kickoff)
            .then_with(|| a.fixture_id.cmp(&b.fixture_id))
    });
}

impl IngestError {
    fn at_row(self, row: u64) -> IngestError {
        match self {
            IngestError::Parse { row: 0, reason } => IngestError::Parse { row, reason },
            other => other,
        }
    }
}

fn invalid(reason: impl Into<String>) -> IngestError {
    IngestError::Parse {
        row: 0,
        reason: reason.into(),
    }
}

fn required<'a>(value: &'a str, column: &str) -> Result<&'a str> {
    if value.is_empty() {
        Err(invalid(format!("missing {column}")))
    } else {
        Ok(value)
    }
}

fn parse_goals(value: &str, column: &str) -> Result<u32> {
    value
        .parse::<u32>()
        .map_err(|_| invalid(format!("{column} must be a non-negative integer, got {value:?}")))
}

fn parse_fixture_row(raw: FixtureRow, require_results: bool) -> Result<Fixture> {
    let fixture_id = required(&raw.fixture_id, "fixture_id")?.to_string();
    let season = required(&raw.season, "season")?.to_string();
    let kickoff = DateTime::parse_from_rfc3339(required(&raw.kickoff, "kickoff")?)
        .map_err(|e| invalid(format!("kickoff {:?}: {e}", raw.kickoff)))?
        .with_timezone(&Utc);
    let home_team = required(&raw.home_team, "home_team")?.to_string();
    let away_team = required(&raw.away_team, "away_team")?.to_string();
    if home_team == away_team {
        return Err(invalid(format!("{home_team} cannot play itself")));
    }
    let result = match (raw.home_goals.is_empty(), raw.away_goals.is_empty()) {
        (true, true) if !require_results => None,
        (true, _) => return Err(invalid("missing home_goals")),
        (_, true) => return Err(invalid("missing away_goals")),
        (false, false) => Some(Scoreline::new(
            parse_goals(&raw.home_goals, "home_goals")?,
            parse_goals(&raw.away_goals, "away_goals")?,
        )),
    };
    let home_lineup = parse_lineup(&raw.home_lineup, &fixture_id)?;
    let away_lineup = parse_lineup(&raw.away_lineup, &fixture_id)?;
    if let (Some(h), Some(a)) = (&home_lineup, &away_lineup) {
        if h.iter().any(|p| a.contains(p)) {
            return Err(IngestError::MalformedLineup(fixture_id));
        }
    }
    Ok(Fixture {
        fixture_id,
        season,
        kickoff,
        home_team,
        away_team,
        result,
        home_lineup,
        away_lineup,
    })
}

fn parse_lineup(value: &str, fixture_id: &str) -> Result<Option<Vec<String>>> {
    if value.is_empty() {
        return Ok(None);
    }
    let players: Vec<String> = value.split(';').map(|p| p.trim().to_string()).collect();
    let distinct: HashSet<&String> = players.iter().collect();
    if players.len() != LINEUP_SIZE
        || distinct.len() != LINEUP_SIZE
        || players.iter().any(|p| p.is_empty())
    {
        return Err(IngestError::MalformedLineup(fixture_id.to_string()));
    }
    Ok(Some(players))
}

pub fn write_fixtures<W: Write>(writer: W, fixtures: &[Fixture]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "fixture_id",
        "season",
        "kickoff",
        "home_team",
        "away_team",
        "home_goals",
        "away_goals",
        "home_lineup",
        "away_lineup",
    ])?;
    for f in fixtures {
        let (hg, ag) = match f.result {
            Some(s) => (s.home.to_string(), s.away.to_string()),
            None => (String::new(), String::new()),
        };
        let kickoff = f.kickoff.to_rfc3339_opts(SecondsFormat::Secs, true);
        let home_lineup = f.home_lineup.as_ref().map(|l| l.join(";")).unwrap_or_default();
        let away_lineup = f.away_lineup.as_ref().map(|l| l.join(";")).unwrap_or_default();
        w.write_record([
            f.fixture_id.as_str(),
            f.season.as_str(),
            kickoff.as_str(),
            f.home_team.as_str(),
            f.away_team.as_str(),
            hg.as_str(),
            ag.as_str(),
            home_lineup.as_str(),
            away_lineup.as_str(),
        ])?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: PathBuf::new(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct StatRow {
    player_id: String,
    fixture_id: String,
    team: String,
    position_group: String,
    stat_name: String,
    value: String,
}

pub fn load_player_stats(path: impl AsRef<Path>, fixtures: &[Fixture]) -> Result<StatsArchive> {
    read_player_stats(open(path.as_ref())?, fixtures)
}

/// Reads the long-format stats file. Stat names are kept verbatim.
pub fn read_player_stats<R: Read>(reader: R, fixtures: &[Fixture]) -> Result<StatsArchive> {
    let known: HashSet<&str> = fixtures.iter().map(|f| f.fixture_id.as_str()).collect();
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(parse_error)?.clone();
    let mut grouped: BTreeMap<(String, String), PlayerMatchStats> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(parse_error)?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let raw: StatRow = record.deserialize(Some(&headers)).map_err(parse_error)?;
        let at = |reason: String| IngestError::Parse { row, reason };

        for (value, column) in [
            (&raw.player_id, "player_id"),
            (&raw.fixture_id, "fixture_id"),
            (&raw.team, "team"),
            (&raw.stat_name, "stat_name"),
        ] {
            if value.is_empty() {
                return Err(at(format!("missing {column}")));
            }
        }
        if !known.contains(raw.fixture_id.as_str()) {
            return Err(IngestError::UnknownFixture(raw.fixture_id));
        }
        let group: PositionGroup = raw.position_group.parse().map_err(at)?;
        let value: f64 = raw
            .value
            .parse()
            .map_err(|_| at(format!("value {:?} is not a number", raw.value)))?;
        if !value.is_finite() {
            return Err(at(format!("value {:?} is not finite", raw.value)));
        }
        if value < 0.0 {
            return Err(IngestError::NegativeStat {
                player_id: raw.player_id,
                stat: raw.stat_name,
            });
        }

        let key = (raw.player_id.clone(), raw.fixture_id.clone());
        let entry = grouped.entry(key).or_insert_with(|| PlayerMatchStats {
            player_id: raw.player_id.clone(),
            fixture_id: raw.fixture_id.clone(),
            team: raw.team.clone(),
            position_group: group,
            stats: BTreeMap::new(),
        });
        if entry.team != raw.team || entry.position_group != group {
            return Err(at(format!(
                "player {} has conflicting team or position in fixture {}",
                raw.player_id, raw.fixture_id
            )));
        }
        if entry.stats.insert(raw.stat_name.clone(), value).is_some() {
            return Err(at(format!(
                "duplicate stat {} for player {} in fixture {}",
                raw.stat_name, raw.player_id, raw.fixture_id
            )));
        }
    }
    StatsArchive::new(grouped.into_values().collect(), fixtures)
}

pub fn write_player_stats<W: Write>(writer: W, archive: &StatsArchive) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "player_id",
        "fixture_id",
        "team",
        "position_group",
        "stat_name",
        "value",
    ])?;
    for r in archive.records() {
        for (stat, value) in &r.stats {
            w.write_record([
                r.player_id.as_str(),
                r.fixture_id.as_str(),
                r.team.as_str(),
                r.position_group.as_str(),
                stat.as_str(),
                value.to_string().as_str(),
            ])?;
        }
    }
    w.flush().map_err(|source| IngestError::Io {
        path: PathBuf::new(),
        source,
    })?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct OddsRow {
    fixture_id: String,
    home_goals: String,
    away_goals: String,
    odds: String,
}

pub fn load_odds(path: impl AsRef<Path>, fixtures: &[Fixture]) -> Result<OddsBook> {
    read_odds(open(path.as_ref())?, fixtures)
}

pub fn read_odds<R: Read>(reader: R, fixtures: &[Fixture]) -> Result<OddsBook> {
    let known: HashSet<&str> = fixtures.iter().map(|f| f.fixture_id.as_str()).collect();
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(parse_error)?.clone();
    let mut book = OddsBook::new();
    for record in rdr.records() {
        let record = record.map_err(parse_error)?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let raw: OddsRow = record.deserialize(Some(&headers)).map_err(parse_error)?;
        let at = |reason: String| IngestError::Parse { row, reason };
        if !known.contains(raw.fixture_id.as_str()) {
            return Err(IngestError::UnknownFixture(raw.fixture_id));
        }
        let scoreline = Scoreline::new(
            parse_goals(&raw.home_goals, "home_goals").map_err(|e| e.at_row(row))?,
            parse_goals(&raw.away_goals, "away_goals").map_err(|e| e.at_row(row))?,
        );
        let odds: f64 = raw
            .odds
            .parse()
            .map_err(|_| at(format!("odds {:?} is not a number", raw.odds)))?;
        // NaN fails this comparison too.
        if !(odds > 1.0 && odds.is_finite()) {
            return Err(IngestError::OddsNotPositive {
                fixture_id: raw.fixture_id,
                scoreline,
            });
        }
        let entry = book
            .entry(raw.fixture_id.clone())
            .or_insert_with(|| OddsRecord {
                fixture_id: raw.fixture_id.clone(),
                scoreline_odds: BTreeMap::new(),
            });
        if entry.scoreline_odds.insert(scoreline, odds).is_some() {
            return Err(at(format!(
                "duplicate quote for {scoreline} in fixture {}",
                raw.fixture_id
            )));
        }
    }
    Ok(book)
}

pub fn write_odds<W: Write>(writer: W, odds: &OddsBook) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fixture_id", "home_goals", "away_goals", "odds"])?;
    for record in odds.values() {
        for (s, o) in &record.scoreline_odds {
            w.write_record([
                record.fixture_id.clone(),
                s.home.to_string(),
                s.away.to_string(),
                o.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|source| IngestError::Io {
        path: PathBuf::new(),
        source,
    })?;
    Ok(())
}
