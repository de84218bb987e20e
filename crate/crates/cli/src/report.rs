use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use discordlab::mlp::read_history;
use serde::{Deserialize, Serialize};

use crate::config::{require, FileConfig};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::measure::DIFFERENCES;
use crate::table::Table;
use crate::train::{Metrics, HISTORY_FILE, METRICS_FILE};
use crate::{CmdResult, UsageExt};

/// Slack for the Bures ordering.
pub const ORDER_TOL: f64 = 1e-4;
/// Minimum gap for counting a sign of `dhl - dhs` or `red2 - concurrence`.
pub const SIGN_MARGIN: f64 = 1e-3;
/// Upper edge of the freezing band.
pub const FREEZE_MAX: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Ordering,
    Freezing,
    Mse,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    which: Option<Which>,
    /// Measured CSV (ordering, freezing) or training output directory (mse).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output directory for `<which>.csv` and `<which>.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    which: Option<Which>,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn count(v: &[f64], pred: impl Fn(f64) -> bool) -> usize {
    v.iter().filter(|&&x| pred(x)).count()
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn ordering(input: &Path) -> anyhow::Result<(Table, String)> {
    let table = Table::read(input)?;
    let keep: Vec<&str> = ["t", "q_used", "concurrence", "dhs", "dhl", "dbr", "ip", "red2"]
        .into_iter()
        .chain(DIFFERENCES.iter().map(|d| d.0))
        .filter(|c| table.has(c))
        .collect();
    let mut plot = Table::new(&keep);
    let cols = keep.iter().map(|c| table.column(c)).collect::<anyhow::Result<Vec<_>>>()?;
    for i in 0..table.rows.len() {
        plot.push_row(&cols.iter().map(|c| c[i]).collect::<Vec<_>>());
    }

    let mut s = String::new();
    writeln!(s, "rows: {}", table.rows.len())?;
    let mut any = false;
    for (name, a, b) in DIFFERENCES {
        let Ok(d) = table.column(name) else { continue };
        any = true;
        if a == "dbr" {
            writeln!(s, "{name} < -{ORDER_TOL:e} (violations): {}", count(&d, |x| x < -ORDER_TOL))?;
            writeln!(s, "{name} minimum: {:.6e}", min(&d))?;
        } else {
            writeln!(s, "{a} > {b} + {SIGN_MARGIN:e}: {}", count(&d, |x| x > SIGN_MARGIN))?;
            writeln!(s, "{a} < {b} - {SIGN_MARGIN:e}: {}", count(&d, |x| x < -SIGN_MARGIN))?;
        }
    }
    if !any {
        return Err(anyhow!("{} has no difference columns; run `discordlab measure` first", input.display()));
    }
    Ok((plot, s))
}

fn freezing(input: &Path) -> anyhow::Result<(Table, String)> {
    let table = Table::read(input)?;
    let t = table.column("t")?;
    let measures: Vec<&str> = ["concurrence", "dhs", "dhl", "dbr", "ip", "red2"]
        .into_iter()
        .filter(|c| table.has(c))
        .collect();
    if measures.is_empty() {
        return Err(anyhow!("{} has no measure columns; run `discordlab measure` first", input.display()));
    }
    let mut header = vec!["t"];
    header.extend(&measures);
    let mut plot = Table::new(&header);
    let cols = measures.iter().map(|c| table.column(c)).collect::<anyhow::Result<Vec<_>>>()?;
    for (i, ti) in t.iter().enumerate() {
        let mut row = vec![*ti];
        row.extend(cols.iter().map(|c| c[i]));
        plot.push_row(&row);
    }
    let mut s = format!("points: {}\nwindow: [{}, {}]\n", t.len(), min(&t), max(&t));
    for (name, c) in measures.iter().zip(&cols) {
        let amp = max(c) - min(c);
        let frozen = if amp <= FREEZE_MAX { "frozen" } else { "not frozen" };
        writeln!(s, "{name} amplitude: {amp:.6e} ({frozen}, band <= {FREEZE_MAX:e})")?;
    }
    Ok((plot, s))
}

fn mse(input: &Path) -> anyhow::Result<(Table, String)> {
    let history = read_history(&input.join(HISTORY_FILE))?;
    let mpath = input.join(METRICS_FILE);
    let metrics: Metrics = serde_json::from_str(&std::fs::read_to_string(&mpath).with_context(|| format!("reading {}", mpath.display()))?)?;
    let mut plot = Table::new(&["epoch", "train_mse", "val_mse", "best_val_mse"]);
    let mut best = f64::INFINITY;
    for r in &history {
        best = best.min(r.val_mse);
        plot.push_row(&[r.epoch as f64, r.train_mse, r.val_mse, best]);
    }
    let mut s = String::new();
    writeln!(s, "class: {}", metrics.class)?;
    writeln!(s, "epochs: {}", history.len())?;
    writeln!(s, "best epoch: {}", metrics.best_epoch)?;
    writeln!(s, "best val mse: {:.6e}", metrics.best_val_mse)?;
    writeln!(s, "final val mse: {:.6e}", metrics.final_val_mse)?;
    writeln!(s, "train mse at best: {:.6e}", metrics.train_mse)?;
    writeln!(s, "test mse at best: {:.6e}", metrics.test_mse)?;
    writeln!(s, "train/test gap: {:.6e}", (metrics.test_mse - metrics.train_mse).abs())?;
    Ok((plot, s))
}

pub fn run(args: ReportArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref()).usage()?;
    file.reject_model_keys("report").usage()?;
    let cfg: ReportConfig = file.command_options("report").usage()?;
    let which = require(args.which, cfg.which, "which").usage()?;
    let input = require(args.input, cfg.input, "in").usage()?;
    let out = require(args.out, cfg.out, "out").usage()?;
    let (plot, summary) = match which {
        Which::Ordering => ordering(&input),
        Which::Freezing => freezing(&input),
        Which::Mse => mse(&input),
    }
    .usage()?;

    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let name = format!("{which:?}").to_lowercase();
    let (csv_path, txt_path) = (out.join(format!("{name}.csv")), out.join(format!("{name}.txt")));
    plot.write(&csv_path)?;
    std::fs::write(&txt_path, &summary)?;
    print!("{summary}");

    let snapshot = serde_json::json!({ "which": which, "in": input, "out": out });
    let manifest = out.join(format!("{name}.{MANIFEST_FILE}"));
    RunManifest::start("report", snapshot).finish(&manifest, &[csv_path, txt_path])?;
    Ok(())
}
