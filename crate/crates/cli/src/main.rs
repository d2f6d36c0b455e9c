//! `scoreline`: train, predict and evaluate scoreline models from the command line.
//!
//! Exit codes: 0 on success, 1 for data or model errors, 2 for usage errors.

mod commands;
mod config;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scoreline_core::evaluate::MissingOddsPolicy;
use scoreline_core::features::Approach;
use scoreline_core::pipeline::ModelId;
use scoreline_core::regress::Technique;

use config::RunConfig;

/// Invalid arguments or settings; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "scoreline", version, about = "Football scoreline prediction from lineups")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Number of most recent fixtures held out for evaluation.
    #[arg(long, global = true)]
    test_size: Option<usize>,
    /// Feature schema TOML replacing the built-in 52-column layout.
    #[arg(long, global = true)]
    schema: Option<PathBuf>,
    /// players, lineup-stats or team-stats.
    #[arg(long, global = true, value_parser = parse_approach)]
    approach: Option<Approach>,
    /// lr, knn, dtr, rfr or svr.
    #[arg(long, global = true, value_parser = parse_technique)]
    technique: Option<Technique>,
    /// A heuristic (home-win, tradition, recency) or approach:technique.
    #[arg(long, global = true, value_parser = parse_model)]
    model: Option<ModelId>,
    #[arg(long, global = true)]
    knn_k: Option<usize>,
    #[arg(long, global = true)]
    svr_c: Option<f64>,
    #[arg(long, global = true)]
    forest_trees: Option<usize>,
    /// Stake per bet.
    #[arg(long, global = true)]
    stake: Option<f64>,
    /// skip or lose.
    #[arg(long, global = true, value_parser = parse_policy)]
    missing_odds: Option<MissingOddsPolicy>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the home and away goal models and write them to <out-dir>/models.
    Train,
    /// Predict scorelines for a fixtures file.
    Predict {
        /// Fixtures CSV; results may be blank.
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Evaluate one model, or the full grid with --all.
    Evaluate {
        #[arg(long)]
        all: bool,
    },
    /// Rank features by chi-squared dependence on goals scored.
    Importance,
    /// Back the predicted scorelines of one model at the quoted odds.
    Bet,
}

fn parse_approach(s: &str) -> Result<Approach, String> {
    s.parse()
}

fn parse_technique(s: &str) -> Result<Technique, String> {
    s.parse()
}

fn parse_model(s: &str) -> Result<ModelId, String> {
    s.parse()
}

fn parse_policy(s: &str) -> Result<MissingOddsPolicy, String> {
    s.parse()
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.data_dir {
            c.data_dir = v.clone();
        }
        if let Some(v) = &self.out_dir {
            c.out_dir = v.clone();
        }
        if let Some(v) = self.test_size {
            c.test_size = v;
        }
        if let Some(v) = &self.schema {
            c.schema = Some(v.clone());
        }
        if let Some(id) = self.model {
            c.set_model(id);
        }
        if let Some(a) = self.approach {
            c.approach = Some(a);
            c.heuristic = None;
        }
        if let Some(t) = self.technique {
            c.technique = Some(t);
            c.heuristic = None;
        }
        let h = &mut c.hyperparameters;
        if let Some(k) = self.knn_k {
            h.knn.k = k;
        }
        if let Some(v) = self.svr_c {
            h.svr.c = v;
        }
        if let Some(n) = self.forest_trees {
            h.rfr.n_trees = n;
        }
        if let Some(v) = self.stake {
            c.stake = v;
        }
        if let Some(p) = self.missing_odds {
            c.missing_odds = p;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = cli.run.resolve()?;
    match cli.command {
        Command::Train => commands::train(&config),
        Command::Predict { fixtures } => commands::predict(&config, &fixtures),
        Command::Evaluate { all: true } => commands::evaluate_all(&config),
        Command::Evaluate { all: false } => commands::evaluate_one(&config),
        Command::Importance => commands::importance(&config, cli.run.approach),
        Command::Bet => commands::bet(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
