use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use scoreline_core::features::{Approach, FeatureBuilder, FeatureSchema, PlayerUniverse, SkippedFixture};
use scoreline_core::heuristics::Heuristic;
use scoreline_core::ingest::{
    load_fixtures, load_player_stats, load_upcoming_fixtures, Dataset, FIXTURES_FILE, ODDS_FILE,
    PLAYER_STATS_FILE,
};
use scoreline_core::pipeline::{ModelId, ModelReport, Workbench};
use scoreline_core::predict::{predict_scorelines, ModelPair, PredictionBatch, ScorelinePredictor};
use scoreline_core::regress::{RegressorSpec, SvrStatus, Technique, TrainedModel};
use scoreline_core::Side;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::report::{self, Stamp};

fn stamp(config: &RunConfig) -> Stamp {
    Stamp {
        config_hash: config.hash(),
        seed: config.seed,
    }
}

fn schema(config: &RunConfig) -> anyhow::Result<FeatureSchema> {
    Ok(match &config.schema {
        Some(path) => FeatureSchema::load(path)?,
        None => FeatureSchema::default(),
    })
}

fn load_dataset(config: &RunConfig) -> anyhow::Result<Dataset> {
    Dataset::load(&config.data_dir, config.test_size)
        .with_context(|| format!("loading {}", config.data_dir.display()))
}

/// SHA-256 over the three input files.
fn data_fingerprint(dir: &Path) -> anyhow::Result<String> {
    let mut h = Sha256::new();
    for name in [FIXTURES_FILE, PLAYER_STATS_FILE, ODDS_FILE] {
        let path = dir.join(name);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

fn model_dir(config: &RunConfig, approach: Approach, technique: Technique) -> PathBuf {
    config
        .out_dir
        .join("models")
        .join(format!("{}-{}", approach.as_str(), technique.as_str()))
}

fn report_dir(config: &RunConfig) -> PathBuf {
    config.out_dir.join("report")
}

/// A trained goal model with the run that produced it.
#[derive(Debug, Serialize, Deserialize)]
struct ModelArtifact {
    config_hash: String,
    seed: u64,
    approach: Approach,
    side: Side,
    model: TrainedModel,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArtifactEntry {
    file: String,
    sha256: String,
    training_rows: usize,
    ridge_lambda: Option<f64>,
    svr: Option<SvrStatus>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainManifest {
    config_hash: String,
    seed: u64,
    data_fingerprint: String,
    approach: Approach,
    technique: Technique,
    test_size: usize,
    training_fixtures: usize,
    home: ArtifactEntry,
    away: ArtifactEntry,
    skipped: Vec<SkippedFixture>,
}

fn pretty<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn train(config: &RunConfig) -> anyhow::Result<()> {
    let (approach, technique) = match config.model()? {
        ModelId::Ml(a, t) => (a, t),
        ModelId::Heuristic(h) => bail!(crate::UsageError(format!(
            "{h} is a heuristic and needs no training"
        ))),
    };
    let dataset = load_dataset(config)?;
    let schema = schema(config)?;
    let bench = Workbench::new(&dataset, &schema)?;
    let spec = RegressorSpec {
        technique,
        hyperparameters: config.hyperparameters.clone(),
        seed: config.seed,
    };
    let (pair, skipped) = bench.train_pair(approach, &spec)?;
    for s in &skipped {
        log::warn!("training fixture {} skipped: {}", s.fixture_id, s.reason);
    }

    let dir = model_dir(config, approach, technique);
    let stamp = stamp(config);
    let entry = |side: Side| -> anyhow::Result<ArtifactEntry> {
        let model = pair.model(side).clone();
        let file = format!("{side}.json");
        let artifact = ModelArtifact {
            config_hash: stamp.config_hash.clone(),
            seed: stamp.seed,
            approach,
            side,
            model,
        };
        let bytes = pretty(&artifact)?;
        report::write_atomic(&dir.join(&file), &bytes)?;
        if let Some(s) = artifact.model.svr_status() {
            if !s.converged {
                log::warn!("{side} SVR stopped after {} iterations without converging", s.iterations);
            }
        }
        Ok(ArtifactEntry {
            file,
            sha256: hex::encode(Sha256::digest(&bytes)),
            training_rows: artifact.model.training_rows,
            ridge_lambda: artifact.model.ridge_lambda(),
            svr: artifact.model.svr_status().cloned(),
        })
    };
    let home = entry(Side::Home)?;
    let away = entry(Side::Away)?;
    let manifest = TrainManifest {
        config_hash: stamp.config_hash.clone(),
        seed: stamp.seed,
        data_fingerprint: data_fingerprint(&config.data_dir)?,
        approach,
        technique,
        test_size: config.test_size,
        training_fixtures: dataset.train().len(),
        home,
        away,
        skipped,
    };
    report::write_atomic(&dir.join("manifest.json"), &pretty(&manifest)?)?;
    println!(
        "trained {} on {} home / {} away rows -> {}",
        pair.label(),
        manifest.home.training_rows,
        manifest.away.training_rows,
        dir.display()
    );
    Ok(())
}

fn load_pair(config: &RunConfig, approach: Approach, technique: Technique) -> anyhow::Result<ModelPair> {
    let dir = model_dir(config, approach, technique);
    let read = |side: Side| -> anyhow::Result<TrainedModel> {
        let path = dir.join(format!("{side}.json"));
        if !path.is_file() {
            bail!(
                "missing model artifact {}; run `scoreline train --approach {} --technique {}` first",
                path.display(),
                approach,
                technique
            );
        }
        let text = fs::read_to_string(&path)?;
        let artifact: ModelArtifact =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if artifact.approach != approach || artifact.side != side {
            bail!("{} holds a different model", path.display());
        }
        Ok(artifact.model)
    };
    let pair = ModelPair {
        approach,
        home: read(Side::Home)?,
        away: read(Side::Away)?,
    };
    let manifest_path = dir.join("manifest.json");
    if let Ok(text) = fs::read_to_string(&manifest_path) {
        if let Ok(m) = serde_json::from_str::<TrainManifest>(&text) {
            let current = data_fingerprint(&config.data_dir)?;
            if m.data_fingerprint != current || m.test_size != config.test_size {
                log::warn!(
                    "models in {} were trained on different data or a different split",
                    dir.display()
                );
            }
        }
    }
    Ok(pair)
}

pub fn predict(config: &RunConfig, fixtures_path: &Path) -> anyhow::Result<()> {
    let history = load_fixtures(config.data_dir.join(FIXTURES_FILE))?;
    let archive = load_player_stats(config.data_dir.join(PLAYER_STATS_FILE), &history)?;
    let fixtures = load_upcoming_fixtures(fixtures_path)?;
    let schema = schema(config)?;
    let batch: PredictionBatch = match config.model()? {
        ModelId::Heuristic(kind) => Heuristic::build(kind, &history, &history)?.predict_batch(&fixtures)?,
        ModelId::Ml(approach, technique) => {
            let pair = load_pair(config, approach, technique)?;
            let mut builder = FeatureBuilder::new(&archive, &schema);
            if approach == Approach::Players {
                builder = builder.with_universe(PlayerUniverse::from_columns(pair.home.columns.clone()));
            }
            predict_scorelines(&pair, &fixtures, &builder)?
        }
    };
    for s in &batch.skipped {
        eprintln!("skipped {}: {}", s.fixture_id, s.reason);
    }
    let path = config.out_dir.join("predictions.csv");
    report::predictions(&path, &stamp(config), &batch.predictions)?;
    println!(
        "{} predictions, {} skipped -> {}",
        batch.predictions.len(),
        batch.skipped.len(),
        path.display()
    );
    Ok(())
}

/// Predicts and evaluates the selected model on the test window.
fn evaluate_selected(config: &RunConfig, bench: &Workbench<'_>) -> anyhow::Result<ModelReport> {
    let settings = config.eval_settings();
    match config.model()? {
        id @ ModelId::Heuristic(_) => Ok(bench.run_model(id, &config.hyperparameters, config.seed, &settings)?),
        id @ ModelId::Ml(approach, technique) => {
            let pair = load_pair(config, approach, technique)?;
            let batch = bench.predict_pair(&pair)?;
            Ok(bench.evaluate(&id.label(), batch, &settings)?)
        }
    }
}

pub fn evaluate_one(config: &RunConfig) -> anyhow::Result<()> {
    let dataset = load_dataset(config)?;
    let schema = schema(config)?;
    let bench = Workbench::new(&dataset, &schema)?;
    let model_report = evaluate_selected(config, &bench)?;
    let stamp = stamp(config);
    let dir = report_dir(config);
    let reports = [model_report];
    report::write_bundle(&dir, &stamp, &bench.actual, &reports)?;
    let text = report::summary(&stamp, &reports, None, &[]);
    report::write_atomic(&dir.join("summary.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn importance_both(bench: &Workbench<'_>, approach: Approach) -> anyhow::Result<Vec<(String, scoreline_core::evaluate::FeatureRanking)>> {
    Side::BOTH
        .iter()
        .map(|&side| Ok((side.to_string(), bench.importance(approach, side)?)))
        .collect()
}

fn write_importance(
    path: &Path,
    stamp: &Stamp,
    rankings: &[(String, scoreline_core::evaluate::FeatureRanking)],
) -> anyhow::Result<()> {
    let rows: Vec<Vec<String>> = rankings
        .iter()
        .flat_map(|(side, r)| report::importance_rows(side, r))
        .collect();
    report::write_csv(path, stamp, &report::IMPORTANCE_HEADER, &rows)
}

pub fn evaluate_all(config: &RunConfig) -> anyhow::Result<()> {
    let dataset = load_dataset(config)?;
    let schema = schema(config)?;
    let bench = Workbench::new(&dataset, &schema)?;
    let grid = bench.run_grid(
        &ModelId::grid(),
        &config.hyperparameters,
        config.seed,
        &config.eval_settings(),
    )?;
    let importance = importance_both(&bench, config.importance_approach)?;

    let stamp = stamp(config);
    let dir = report_dir(config);
    report::write_bundle(&dir, &stamp, &grid.actual, &grid.reports)?;
    report::write_csv(
        &dir.join("overview.csv"),
        &stamp,
        &report::overview_header(),
        &report::overview_rows(&grid.overview),
    )?;
    write_importance(&dir.join("importance.csv"), &stamp, &importance)?;
    let text = report::summary(&stamp, &grid.reports, Some(&grid.overview), &importance);
    report::write_atomic(&dir.join("summary.txt"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

pub fn importance(config: &RunConfig, approach: Option<Approach>) -> anyhow::Result<()> {
    let approach = approach.unwrap_or(config.importance_approach);
    if approach == Approach::Players {
        log::warn!("players columns are +1/-1/0 indicators; chi-squared needs non-negative input");
    }
    let dataset = load_dataset(config)?;
    let schema = schema(config)?;
    let bench = Workbench::new(&dataset, &schema)?;
    let rankings = importance_both(&bench, approach)?;
    let stamp = stamp(config);
    let path = report_dir(config).join("importance.csv");
    write_importance(&path, &stamp, &rankings)?;
    for (side, r) in &rankings {
        println!("{side}");
        for (feature, score) in r.top(5) {
            println!("  {feature:<24} {score:.3}");
        }
    }
    println!("-> {}", path.display());
    Ok(())
}

pub fn bet(config: &RunConfig) -> anyhow::Result<()> {
    let dataset = load_dataset(config)?;
    let schema = schema(config)?;
    let bench = Workbench::new(&dataset, &schema)?;
    let r = evaluate_selected(config, &bench)?;
    let stamp = stamp(config);
    let dir = report_dir(config);
    report::write_csv(
        &dir.join("betting.csv"),
        &stamp,
        &report::BETTING_HEADER,
        &[report::betting_row(&r.betting)],
    )?;
    report::write_csv(
        &dir.join("betting_ledger.csv"),
        &stamp,
        &report::LEDGER_HEADER,
        &report::ledger_rows(&r.betting),
    )?;
    println!(
        "{}: {} bets placed, {} skipped, net {:.2}",
        r.model, r.betting.bets_placed, r.betting.bets_skipped, r.betting.net_earnings
    );
    Ok(())
}
