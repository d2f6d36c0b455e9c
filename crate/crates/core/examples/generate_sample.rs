//! Writes the bundled synthetic dataset.
//!
//! ```text
//! cargo run -p scoreline-core --example generate_sample -- data/sample
//! ```
//!
//! Eight clubs play ten rounds over two seasons. Goals are Poisson draws from
//! club attack and defence ratings, player statistics are sampled around the
//! result, and correct-score odds come from the same Poisson model plus a
//! bookmaker margin.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use scoreline_core::features::{FeatureSchema, Role};
use scoreline_core::ingest::{
    write_fixtures, write_odds, write_player_stats, Fixture, OddsBook, OddsRecord,
    PlayerMatchStats, StatsArchive,
};
use scoreline_core::{PositionGroup, Scoreline};

const SEED: u64 = 2022;
const TEAMS: [&str; 8] = [
    "Ashford", "Bramley", "Carrow", "Dunmore", "Eastleigh", "Farnham", "Greyhill", "Holloway",
];
const ROUNDS_PER_SEASON: usize = 5;
const SQUAD: [(PositionGroup, usize, usize); 4] = [
    (PositionGroup::GK, 2, 1),
    (PositionGroup::DF, 5, 4),
    (PositionGroup::MF, 5, 4),
    (PositionGroup::FW, 3, 2),
];
const MARGIN: f64 = 0.12;
const MAX_ODDS: f64 = 501.0;
const MAX_QUOTED_GOALS: u32 = 6;

struct Player {
    id: String,
    group: PositionGroup,
    quality: f64,
}

struct Club {
    name: &'static str,
    attack: f64,
    defence: f64,
    squad: Vec<Player>,
}

fn clubs(rng: &mut ChaCha8Rng) -> Vec<Club> {
    let rating = Normal::new(0.0, 0.25).unwrap();
    let quality = Normal::new(1.0f64, 0.2).unwrap();
    TEAMS
        .iter()
        .map(|&name| {
            let mut squad = Vec::new();
            for (group, size, _) in SQUAD {
                for i in 0..size {
                    squad.push(Player {
                        id: format!("{}-{}{}", name[..3].to_lowercase(), group.as_str().to_lowercase(), i + 1),
                        group,
                        quality: quality.sample(rng).max(0.3),
                    });
                }
            }
            Club {
                name,
                attack: rating.sample(rng),
                defence: rating.sample(rng),
                squad,
            }
        })
        .collect()
}

/// Round-robin pairings by the circle method.
fn rounds(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut ring: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for r in 0..n - 1 {
        let pairs = (0..n / 2)
            .map(|i| {
                let (a, b) = (ring[i], ring[n - 1 - i]);
                if (r + i) % 2 == 0 { (a, b) } else { (b, a) }
            })
            .collect();
        out.push(pairs);
        ring[1..].rotate_right(1);
    }
    out
}

fn lineup(club: &Club, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut picks = Vec::new();
    let mut start = 0;
    for (_, size, starters) in SQUAD {
        let mut idx: Vec<usize> = (start..start + size).collect();
        // Better players start more often.
        idx.sort_by(|&a, &b| {
            let ka = club.squad[a].quality + rng.random_range(0.0..0.5);
            let kb = club.squad[b].quality + rng.random_range(0.0..0.5);
            kb.total_cmp(&ka)
        });
        picks.extend_from_slice(&idx[..starters]);
        start += size;
    }
    picks
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).unwrap().sample(rng)
}

fn share_goals(goals: u32, weights: &[f64], rng: &mut ChaCha8Rng) -> Vec<u32> {
    let total: f64 = weights.iter().sum();
    let mut out = vec![0; weights.len()];
    for _ in 0..goals {
        let mut pick = rng.random_range(0.0..total);
        let mut i = 0;
        while pick >= weights[i] && i + 1 < weights.len() {
            pick -= weights[i];
            i += 1;
        }
        out[i] += 1;
    }
    out
}

struct MatchContext {
    scored: u32,
    conceded: u32,
    shots_against: f64,
}

fn player_stats(
    player: &Player,
    goals: u32,
    assists: u32,
    ctx: &MatchContext,
    schema: &FeatureSchema,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, f64> {
    let q = player.quality;
    let creative = match player.group {
        PositionGroup::FW => 1.4,
        PositionGroup::MF => 1.0,
        PositionGroup::DF => 0.35,
        PositionGroup::GK => 0.0,
    } * q;
    let mut stats = BTreeMap::new();
    for block in schema.blocks() {
        if block.group != player.group {
            continue;
        }
        for name in block.stats {
            let value = match (block.role, name.as_str()) {
                (Role::Offensive, "Gls") => f64::from(goals),
                (Role::Offensive, "Ast") => f64::from(assists),
                (Role::Offensive, "xG" | "npxG") => {
                    (0.6 * f64::from(goals) + poisson(2.0 * creative, rng) * 0.1).max(0.0)
                }
                (Role::Offensive, "xA") => 0.5 * f64::from(assists) + poisson(creative, rng) * 0.08,
                (Role::Offensive, "GCA") => f64::from(goals + assists) + poisson(0.3 * creative, rng),
                (Role::Offensive, "Sh") => f64::from(goals) + poisson(1.5 * creative, rng),
                (Role::Offensive, "SoT") => f64::from(goals) + poisson(0.5 * creative, rng),
                (Role::Defensive, "CS") => f64::from(u8::from(ctx.conceded == 0)),
                (Role::Defensive, "GA") => f64::from(ctx.conceded),
                (Role::Defensive, "PSxG") => (f64::from(ctx.conceded) + poisson(1.0, rng) * 0.3) * (1.1 - 0.2 * q),
                (Role::Defensive, "Saves") => (ctx.shots_against - f64::from(ctx.conceded)).max(0.0),
                (Role::Defensive, "SavePct") => {
                    if ctx.shots_against > 0.0 {
                        100.0 * (ctx.shots_against - f64::from(ctx.conceded)).max(0.0) / ctx.shots_against
                    } else {
                        100.0
                    }
                }
                (Role::Defensive, _) => poisson(2.0 * q + 0.3 * f64::from(ctx.scored == 0), rng),
                (Role::Offensive, _) => poisson(2.0 * creative, rng),
            };
            stats.insert(name.clone(), (value * 100.0).round() / 100.0);
        }
    }
    stats
}

fn scoreline_odds(home_mean: f64, away_mean: f64) -> BTreeMap<Scoreline, f64> {
    let pmf = |mean: f64, k: u32| {
        let mut p = (-mean).exp();
        for i in 1..=k {
            p *= mean / f64::from(i);
        }
        p
    };
    let mut odds = BTreeMap::new();
    for h in 0..=MAX_QUOTED_GOALS {
        for a in 0..=MAX_QUOTED_GOALS {
            let p = pmf(home_mean, h) * pmf(away_mean, a);
            let price = (1.0 / (p * (1.0 + MARGIN))).min(MAX_ODDS);
            odds.insert(Scoreline::new(h, a), (price * 100.0).round() / 100.0);
        }
    }
    odds
}

fn kickoff(round: usize, slot: usize) -> DateTime<Utc> {
    let (season_start, r) = if round < ROUNDS_PER_SEASON {
        (Utc.with_ymd_and_hms(2021, 8, 14, 12, 30, 0).unwrap(), round)
    } else {
        (Utc.with_ymd_and_hms(2022, 8, 6, 12, 30, 0).unwrap(), round - ROUNDS_PER_SEASON)
    };
    season_start + Duration::weeks(r as i64 * 2) + Duration::minutes(150 * slot as i64)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/sample".into()));
    std::fs::create_dir_all(&out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let schema = FeatureSchema::default();
    let clubs = clubs(&mut rng);
    let schedule = rounds(TEAMS.len());

    let mut fixtures = Vec::new();
    let mut records = Vec::new();
    let mut odds = OddsBook::new();
    let total_rounds = 2 * ROUNDS_PER_SEASON;
    for round in 0..total_rounds + 1 {
        let upcoming = round == total_rounds;
        let pairs = &schedule[round % schedule.len()];
        for (slot, &(h, a)) in pairs.iter().enumerate() {
            let (home, away) = if round >= ROUNDS_PER_SEASON { (&clubs[a], &clubs[h]) } else { (&clubs[h], &clubs[a]) };
            let home_xi = lineup(home, &mut rng);
            let away_xi = lineup(away, &mut rng);
            let strength = |club: &Club, xi: &[usize]| {
                xi.iter().map(|&i| club.squad[i].quality).sum::<f64>() / xi.len() as f64
            };
            let home_mean = (0.3 + home.attack - away.defence + 0.5 * (strength(home, &home_xi) - 1.0)).exp();
            let away_mean = (0.05 + away.attack - home.defence + 0.5 * (strength(away, &away_xi) - 1.0)).exp();
            let season = if round < ROUNDS_PER_SEASON { "2021" } else { "2022" };
            let season_round = if round < ROUNDS_PER_SEASON { round } else { round - ROUNDS_PER_SEASON };
            let id = format!("{season}-R{:02}-{}", season_round + 1, slot + 1);
            let mut fixture = Fixture {
                fixture_id: id.clone(),
                season: season.into(),
                kickoff: kickoff(round, slot),
                home_team: home.name.into(),
                away_team: away.name.into(),
                result: None,
                home_lineup: Some(home_xi.iter().map(|&i| home.squad[i].id.clone()).collect()),
                away_lineup: Some(away_xi.iter().map(|&i| away.squad[i].id.clone()).collect()),
            };
            if upcoming {
                fixtures.push(fixture);
                continue;
            }
            let score = Scoreline::new(poisson(home_mean, &mut rng) as u32, poisson(away_mean, &mut rng) as u32);
            fixture.result = Some(score);
            odds.insert(
                id.clone(),
                OddsRecord {
                    fixture_id: id.clone(),
                    scoreline_odds: scoreline_odds(home_mean, away_mean),
                },
            );
            for (club, xi, scored, conceded, opp_mean) in [
                (home, &home_xi, score.home, score.away, away_mean),
                (away, &away_xi, score.away, score.home, home_mean),
            ] {
                let weights: Vec<f64> = xi
                    .iter()
                    .map(|&i| {
                        let p = &club.squad[i];
                        p.quality
                            * match p.group {
                                PositionGroup::FW => 3.0,
                                PositionGroup::MF => 1.5,
                                PositionGroup::DF => 0.4,
                                PositionGroup::GK => 0.0,
                            }
                    })
                    .collect();
                let goals = share_goals(scored, &weights, &mut rng);
                let assists = share_goals(scored.saturating_sub(rng.random_range(0..2)), &weights, &mut rng);
                let ctx = MatchContext {
                    scored,
                    conceded,
                    shots_against: f64::from(conceded) + poisson(2.5 * opp_mean, &mut rng),
                };
                for (k, &i) in xi.iter().enumerate() {
                    let player = &club.squad[i];
                    records.push(PlayerMatchStats {
                        player_id: player.id.clone(),
                        fixture_id: id.clone(),
                        team: club.name.into(),
                        position_group: player.group,
                        stats: player_stats(player, goals[k], assists[k], &ctx, &schema, &mut rng),
                    });
                }
            }
            fixtures.push(fixture);
        }
    }

    let (played, upcoming): (Vec<Fixture>, Vec<Fixture>) =
        fixtures.into_iter().partition(|f| f.result.is_some());
    let mut shuffled = played.clone();
    // Rows are written out of order on purpose; loading sorts them by kickoff.
    shuffled.shuffle(&mut rng);
    write_fixtures(File::create(out.join("fixtures.csv"))?, &shuffled)?;
    write_fixtures(File::create(out.join("upcoming.csv"))?, &upcoming)?;
    let archive = StatsArchive::new(records, &played)?;
    write_player_stats(File::create(out.join("player_stats.csv"))?, &archive)?;
    write_odds(File::create(out.join("odds.csv"))?, &odds)?;
    println!(
        "wrote {} fixtures, {} upcoming, {} player-match records to {}",
        played.len(),
        upcoming.len(),
        archive.len(),
        out.display()
    );
    Ok(())
}
