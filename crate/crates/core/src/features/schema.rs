use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::ingest::{PositionGroup, Side};

const DEFAULT_SCHEMA: &str = include_str!("../../config/feature_schema.toml");

pub const OFFENSIVE_DF: usize = 13;
pub const OFFENSIVE_MF: usize = 14;
pub const OFFENSIVE_FW: usize = 13;
pub const DEFENSIVE_GK: usize = 5;
pub const DEFENSIVE_DF: usize = 7;
/// Width of every Lineup Stats and Team Stats row.
pub const STATS_WIDTH: usize =
    OFFENSIVE_DF + OFFENSIVE_MF + OFFENSIVE_FW + DEFENSIVE_GK + DEFENSIVE_DF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Describes the side whose goals are being modelled.
    Offensive,
    /// Describes the opponent.
    Defensive,
}

/// One contiguous run of columns: a position group's stats for one role.
#[derive(Debug, Clone, Copy)]
pub struct Block<'a> {
    pub role: Role,
    pub group: PositionGroup,
    pub stats: &'a [String],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffensiveStats {
    #[serde(rename = "DF")]
    pub defenders: Vec<String>,
    #[serde(rename = "MF")]
    pub midfielders: Vec<String>,
    #[serde(rename = "FW")]
    pub attackers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefensiveStats {
    #[serde(rename = "GK")]
    pub goalkeepers: Vec<String>,
    #[serde(rename = "DF")]
    pub defenders: Vec<String>,
}

/// Stat names per group feeding the 52-column stats representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub offensive: OffensiveStats,
    pub defensive: DefensiveStats,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema::from_toml_str(DEFAULT_SCHEMA).expect("bundled schema is valid")
    }
}

impl FeatureSchema {
    pub fn from_toml_str(text: &str) -> Result<Self, FeatureError> {
        let schema: FeatureSchema =
            toml::from_str(text).map_err(|e| FeatureError::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let expected = [
            (Role::Offensive, PositionGroup::DF, OFFENSIVE_DF),
            (Role::Offensive, PositionGroup::MF, OFFENSIVE_MF),
            (Role::Offensive, PositionGroup::FW, OFFENSIVE_FW),
            (Role::Defensive, PositionGroup::GK, DEFENSIVE_GK),
            (Role::Defensive, PositionGroup::DF, DEFENSIVE_DF),
        ];
        for (block, (role, group, count)) in self.blocks().iter().zip(expected) {
            debug_assert_eq!((block.role, block.group), (role, group));
            if block.stats.len() != count {
                return Err(FeatureError::Schema(format!(
                    "{role:?} {group} needs {count} stats, found {}",
                    block.stats.len()
                )));
            }
        }
        // Column labels are group-prefixed, so names only clash within a group.
        for group in PositionGroup::ALL {
            let mut seen = HashSet::new();
            for block in self.blocks().iter().filter(|b| b.group == group) {
                for stat in block.stats {
                    if stat.is_empty() || !seen.insert(stat.as_str()) {
                        return Err(FeatureError::Schema(format!(
                            "stat {stat:?} repeated or empty for {group}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Blocks in column order: offensive DF, MF, FW then defensive GK, DF.
    pub fn blocks(&self) -> [Block<'_>; 5] {
        [
            Block {
                role: Role::Offensive,
                group: PositionGroup::DF,
                stats: &self.offensive.defenders,
            },
            Block {
                role: Role::Offensive,
                group: PositionGroup::MF,
                stats: &self.offensive.midfielders,
            },
            Block {
                role: Role::Offensive,
                group: PositionGroup::FW,
                stats: &self.offensive.attackers,
            },
            Block {
                role: Role::Defensive,
                group: PositionGroup::GK,
                stats: &self.defensive.goalkeepers,
            },
            Block {
                role: Role::Defensive,
                group: PositionGroup::DF,
                stats: &self.defensive.defenders,
            },
        ]
    }

    pub fn width(&self) -> usize {
        self.blocks().iter().map(|b| b.stats.len()).sum()
    }

    /// Column labels for the goals model of `side`. Stats of the away team
    /// carry an `away ` prefix, so the home model's opponent keeper clean
    /// sheets read `away g_CS` and the away model's read `g_CS`.
    pub fn columns(&self, side: Side) -> Vec<String> {
        let mut cols = Vec::with_capacity(self.width());
        for block in self.blocks() {
            let team = match block.role {
                Role::Offensive => side,
                Role::Defensive => side.opponent(),
            };
            let prefix = if team == Side::Away { "away " } else { "" };
            for stat in block.stats {
                cols.push(format!("{prefix}{}_{stat}", block.group.prefix()));
            }
        }
        cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schema_has_52_columns_in_13_14_13_5_7() {
        let schema = FeatureSchema::default();
        let sizes: Vec<usize> = schema.blocks().iter().map(|b| b.stats.len()).collect();
        assert_eq!(sizes, [13, 14, 13, 5, 7]);
        assert_eq!(schema.width(), 52);
        assert_eq!(STATS_WIDTH, 52);
    }

    #[test]
    fn default_schema_includes_the_headline_stats() {
        let home = FeatureSchema::default().columns(Side::Home);
        for name in ["away g_CS", "away g_GA", "away g_PSxG", "a_GCA", "m_GCA", "m_Gls"] {
            assert!(home.contains(&name.to_string()), "{name} missing");
        }
        let away = FeatureSchema::default().columns(Side::Away);
        for name in ["g_CS", "g_GA", "g_PSxG", "away a_GCA", "away m_Gls"] {
            assert!(away.contains(&name.to_string()), "{name} missing");
        }
    }

    #[test]
    fn columns_are_unique() {
        for side in Side::BOTH {
            let cols = FeatureSchema::default().columns(side);
            let set: HashSet<_> = cols.iter().collect();
            assert_eq!(set.len(), cols.len());
        }
    }

    #[test]
    fn wrong_counts_rejected() {
        let mut schema = FeatureSchema::default();
        schema.offensive.midfielders.pop();
        assert!(matches!(schema.validate(), Err(FeatureError::Schema(_))));
    }

    #[test]
    fn repeated_stat_within_group_rejected() {
        let mut schema = FeatureSchema::default();
        schema.defensive.defenders[0] = schema.offensive.defenders[0].clone();
        assert!(matches!(schema.validate(), Err(FeatureError::Schema(_))));
    }
}
