use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use scoreline_core::evaluate::MissingOddsPolicy;
use scoreline_core::features::Approach;
use scoreline_core::heuristics::HeuristicKind;
use scoreline_core::pipeline::{EvalSettings, ModelId};
use scoreline_core::regress::{Hyperparameters, Technique};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::UsageError;

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_test_size() -> usize {
    100
}

fn default_seed() -> u64 {
    42
}

fn default_stake() -> f64 {
    1.0
}

fn default_importance_approach() -> Approach {
    Approach::LineupStats
}

/// Settings for a run, read from TOML and overridden by flags.
///
/// Relative paths in a config file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub approach: Option<Approach>,
    #[serde(default)]
    pub technique: Option<Technique>,
    /// A heuristic name; takes the place of approach and technique.
    #[serde(default)]
    pub heuristic: Option<HeuristicKind>,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default = "default_stake")]
    pub stake: f64,
    #[serde(default)]
    pub missing_odds: MissingOddsPolicy,
    /// Feature representation ranked by the importance report.
    #[serde(default = "default_importance_approach")]
    pub importance_approach: Approach,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: default_data_dir(),
            out_dir: default_out_dir(),
            test_size: default_test_size(),
            seed: default_seed(),
            approach: None,
            technique: None,
            heuristic: None,
            hyperparameters: Hyperparameters::default(),
            schema: None,
            stake: default_stake(),
            missing_odds: MissingOddsPolicy::Skip,
            importance_approach: default_importance_approach(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.data_dir);
        resolve(&mut config.out_dir);
        if let Some(s) = config.schema.as_mut() {
            resolve(s);
        }
        Ok(config)
    }

    /// Selects a model, replacing whatever the config named.
    pub fn set_model(&mut self, id: ModelId) {
        match id {
            ModelId::Ml(a, t) => {
                self.approach = Some(a);
                self.technique = Some(t);
                self.heuristic = None;
            }
            ModelId::Heuristic(h) => {
                self.heuristic = Some(h);
                self.approach = None;
                self.technique = None;
            }
        }
    }

    /// The selected model, if the settings name exactly one.
    pub fn model(&self) -> anyhow::Result<ModelId> {
        match (self.heuristic, self.approach, self.technique) {
            (Some(h), None, None) => Ok(ModelId::Heuristic(h)),
            (None, Some(a), Some(t)) => Ok(ModelId::Ml(a, t)),
            (Some(_), _, _) => bail!(UsageError(
                "choose either a heuristic or an approach and technique".into()
            )),
            _ => bail!(UsageError(
                "no model selected: pass --model, or --approach with --technique".into()
            )),
        }
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            stake: self.stake,
            missing_odds: self.missing_odds,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !self.data_dir.is_dir() {
            bail!("data directory {} does not exist", self.data_dir.display());
        }
        if let Some(s) = &self.schema {
            if !s.is_file() {
                bail!("schema file {} does not exist", s.display());
            }
        }
        if !(self.stake.is_finite() && self.stake > 0.0) {
            bail!(UsageError(format!("stake must be positive, got {}", self.stake)));
        }
        Ok(())
    }

    /// SHA-256 of the effective settings. The output directory is left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
