use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;
use discordlab::dataset::{read_csv, split_file_name, ClassTag};
use discordlab::mlp::{evaluate, samples, train, write_history, Checkpoint, Network, Sample, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, FileConfig};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::{CmdResult, UsageExt};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory written by `discordlab dataset`.
    #[arg(long = "data-dir")]
    data_dir: Option<PathBuf>,
    /// `THETA0` or `THETAQ`.
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory for the checkpoint, history and metrics.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "learning-rate")]
    learning_rate: Option<f64>,
    #[arg(long = "dropout-rate")]
    dropout_rate: Option<f64>,
    /// Comma-separated epochs at which the learning rate is scaled by `--lr-decay`.
    #[arg(long = "lr-decay-epochs", value_delimiter = ',')]
    lr_decay_epochs: Option<Vec<usize>>,
    #[arg(long = "lr-decay")]
    lr_decay: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFileConfig {
    data_dir: Option<PathBuf>,
    class: Option<String>,
    epochs: Option<usize>,
    out: Option<PathBuf>,
    learning_rate: Option<f64>,
    dropout_rate: Option<f64>,
    lr_decay_epochs: Option<Vec<usize>>,
    lr_decay: Option<f64>,
    seed: Option<u64>,
}

/// Final errors of a training run, written as `metrics.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    pub class: String,
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub final_val_mse: f64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub train_rows: usize,
    pub val_rows: usize,
    pub test_rows: usize,
}

fn load_part(dir: &Path, tag: ClassTag, part: &str) -> anyhow::Result<Vec<Sample>> {
    let path = dir.join(split_file_name(tag, part));
    let rows = read_csv(&path).with_context(|| format!("loading {}", path.display()))?;
    Ok(samples(&rows))
}

pub fn run(args: TrainArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref()).usage()?;
    file.reject_model_keys("train").usage()?;
    let cfg: TrainFileConfig = file.command_options("train").usage()?;
    let data_dir = require(args.data_dir, cfg.data_dir, "data-dir").usage()?;
    let class = require(args.class, cfg.class, "class").usage()?;
    let tag = ClassTag::parse(&class)
        .ok_or_else(|| anyhow!("unknown class {class:?} (THETA0, THETAQ)"))
        .usage()?;
    let out = require(args.out, cfg.out, "out").usage()?;
    let d = TrainConfig::default();
    let train_cfg = TrainConfig {
        epochs: pick(args.epochs, cfg.epochs, d.epochs),
        learning_rate: pick(args.learning_rate, cfg.learning_rate, d.learning_rate),
        lr_decay_epochs: pick(args.lr_decay_epochs, cfg.lr_decay_epochs, d.lr_decay_epochs),
        lr_decay: pick(args.lr_decay, cfg.lr_decay, d.lr_decay),
        dropout_rate: pick(args.dropout_rate, cfg.dropout_rate, d.dropout_rate),
        seed: pick(args.seed, cfg.seed, d.seed),
    };
    train_cfg.validate().usage()?;

    let train_rows = load_part(&data_dir, tag, "train").usage()?;
    let val_rows = load_part(&data_dir, tag, "val").usage()?;
    let test_rows = load_part(&data_dir, tag, "test").usage()?;

    let outcome = train(&Network::init(train_cfg.seed), &train_rows, &val_rows, &train_cfg)?;
    let metrics = Metrics {
        class: tag.to_string(),
        epochs: train_cfg.epochs,
        best_epoch: outcome.best_epoch,
        best_val_mse: outcome.best_val_mse,
        final_val_mse: outcome.history.last().map_or(f64::NAN, |r| r.val_mse),
        train_mse: evaluate(&outcome.best, &train_rows)?,
        test_mse: if test_rows.is_empty() { f64::NAN } else { evaluate(&outcome.best, &test_rows)? },
        train_rows: train_rows.len(),
        val_rows: val_rows.len(),
        test_rows: test_rows.len(),
    };

    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let (ck_path, hist_path, metrics_path) = (out.join(CHECKPOINT_FILE), out.join(HISTORY_FILE), out.join(METRICS_FILE));
    Checkpoint {
        network: outcome.best,
        config: train_cfg.clone(),
        best_epoch: outcome.best_epoch,
        best_val_mse: outcome.best_val_mse,
    }
    .save(&ck_path)?;
    write_history(&outcome.history, &hist_path)?;
    std::fs::write(&metrics_path, serde_json::to_string_pretty(&metrics)? + "\n")?;
    println!(
        "{tag}: best epoch {} val {:.6} train {:.6} test {:.6}",
        metrics.best_epoch, metrics.best_val_mse, metrics.train_mse, metrics.test_mse
    );

    let snapshot = serde_json::json!({
        "data_dir": data_dir,
        "class": tag,
        "out": out,
        "train": train_cfg,
    });
    RunManifest::start("train", snapshot)
        .seed("train", train_cfg.seed)
        .finish(&out.join(MANIFEST_FILE), &[ck_path, hist_path, metrics_path])?;
    Ok(())
}
