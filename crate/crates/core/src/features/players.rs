use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::ingest::{Fixture, Side};

/// How many listed starters had a column in the universe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub listed: usize,
    pub known: usize,
}

impl Coverage {
    pub fn add(&mut self, other: Coverage) {
        self.listed += other.listed;
        self.known += other.known;
    }

    pub fn ratio(&self) -> f64 {
        if self.listed == 0 {
            1.0
        } else {
            self.known as f64 / self.listed as f64
        }
    }
}

/// Sorted player ids, one feature column each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerUniverse {
    players: Vec<String>,
    index: HashMap<String, usize>,
}

impl PlayerUniverse {
    /// Every starter named in `fixtures`; pass training fixtures only.
    pub fn from_fixtures(fixtures: &[Fixture]) -> Self {
        let players: BTreeSet<&String> = fixtures
            .iter()
            .flat_map(|f| Side::BOTH.into_iter().filter_map(|s| f.lineup(s)))
            .flatten()
            .collect();
        Self::from_columns(players.into_iter().cloned().collect())
    }

    /// Rebuilds a universe from a trained model's column list.
    pub fn from_columns(players: Vec<String>) -> Self {
        let index = players
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        PlayerUniverse { players, index }
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    /// Starters outside the universe are dropped and only show up in the coverage.
    pub fn encode(&self, fixture: &Fixture) -> Result<(Vec<f64>, Coverage), FeatureError> {
        let missing = || FeatureError::MissingLineup(fixture.fixture_id.clone());
        let home = fixture.lineup(Side::Home).ok_or_else(missing)?;
        let away = fixture.lineup(Side::Away).ok_or_else(missing)?;
        let mut values = vec![0.0; self.players.len()];
        let mut coverage = Coverage::default();
        for (lineup, sign) in [(home, 1.0), (away, -1.0)] {
            for p in lineup {
                coverage.listed += 1;
                if let Some(&i) = self.index.get(p) {
                    values[i] = sign;
                    coverage.known += 1;
                }
            }
        }
        Ok((values, coverage))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn lineup(prefix: &str) -> Vec<String> {
        (1..=11).map(|i| format!("{prefix}{i:02}")).collect()
    }

    fn fixture(home: Vec<String>, away: Vec<String>) -> Fixture {
        Fixture {
            fixture_id: "f".into(),
            season: "2021".into(),
            kickoff: Utc.with_ymd_and_hms(2021, 8, 1, 15, 0, 0).unwrap(),
            home_team: "A".into(),
            away_team: "B".into(),
            result: None,
            home_lineup: Some(home),
            away_lineup: Some(away),
        }
    }

    #[test]
    fn home_players_are_plus_one_and_away_minus_one() {
        let f = fixture(lineup("h"), lineup("a"));
        let mut extra = lineup("x");
        extra.truncate(8);
        let mut cols: Vec<String> = lineup("h").into_iter().chain(lineup("a")).chain(extra).collect();
        cols.sort();
        let universe = PlayerUniverse::from_columns(cols);
        assert_eq!(universe.len(), 30);
        let (values, coverage) = universe.encode(&f).unwrap();
        let home_col = universe.players().iter().position(|p| p == "h01").unwrap();
        let away_col = universe.players().iter().position(|p| p == "a01").unwrap();
        let idle_col = universe.players().iter().position(|p| p == "x01").unwrap();
        assert_eq!(values[home_col], 1.0);
        assert_eq!(values[away_col], -1.0);
        assert_eq!(values[idle_col], 0.0);
        assert_eq!(values.iter().filter(|v| **v != 0.0).count(), 22);
        assert_eq!(coverage, Coverage { listed: 22, known: 22 });
    }

    #[test]
    fn unseen_players_are_dropped_but_counted() {
        let universe = PlayerUniverse::from_fixtures(&[fixture(lineup("h"), lineup("a"))]);
        let (values, coverage) = universe.encode(&fixture(lineup("n"), lineup("a"))).unwrap();
        assert_eq!(values.iter().filter(|v| **v != 0.0).count(), 11);
        assert_eq!(coverage, Coverage { listed: 22, known: 11 });
        assert_eq!(coverage.ratio(), 0.5);
    }
}
