use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use discordlab::dataset::{run_pipeline, Recipe, MANIFEST_FILE};
use discordlab::dynamics::{Evolver, ModelParams};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, FileConfig, ModelArgs};
use crate::manifest::{RunManifest, MANIFEST_FILE as RUN_MANIFEST};
use crate::simulate::{state_row, TRAJECTORY_HEADER};
use crate::table::Table;
use crate::{CmdResult, UsageExt};

/// Evolved states of every generated row, in generation order.
pub const STATES_FILE: &str = "states.csv";

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `reference` or `tiny`.
    #[arg(long)]
    recipe: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetConfig {
    recipe: Option<String>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

/// Trajectory columns plus `q_used`, one row per (state, q, t).
fn write_states(params: &ModelParams, recipe: &Recipe, path: &Path) -> anyhow::Result<()> {
    let mut header = vec!["q_used"];
    header.extend(TRAJECTORY_HEADER);
    let mut table = Table::new(&header);
    for state in &recipe.states {
        for &q in &recipe.q_values {
            let evolver = Evolver::new(&ModelParams { q, ..params.clone() })?;
            for (t, rho) in evolver.trajectory(state, &recipe.t_grid)? {
                let mut row = vec![q, t];
                row.extend(state_row(&rho)?);
                table.push_row(&row);
            }
        }
    }
    table.write(path)
}

pub fn run(args: DatasetArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref()).usage()?;
    let cfg: DatasetConfig = file.command_options("dataset").usage()?;
    let params = args.model.resolve(&file).usage()?;
    let recipe_name = pick(args.recipe, cfg.recipe, "reference".into());
    let recipe = Recipe::by_name(&recipe_name)
        .ok_or_else(|| anyhow!("unknown recipe {recipe_name:?} (reference, tiny)"))
        .usage()?;
    let seed = pick(args.seed, cfg.seed, 0);
    let out_dir = require(args.out_dir, cfg.out_dir, "out-dir").usage()?;

    let out = run_pipeline(&params, &recipe, seed, &out_dir)?;
    write_states(&params, &recipe, &out_dir.join(STATES_FILE))?;

    let g = &out.manifest;
    println!("rows generated: {}", g.rows_generated);
    println!("duplicates removed: {} ({:.3}%)", g.dedup.removed, 100.0 * g.dedup.repetition_rate);
    for (tag, n) in &g.class_counts {
        println!("{tag}: {n} rows");
    }
    println!("quarantined: {}", g.quarantined);
    println!("ordering audit: {} rows, {} violations", g.audit.audited, g.audit.violations);

    let mut files: Vec<PathBuf> = g.files.iter().map(|f| out_dir.join(f)).collect();
    files.push(out_dir.join(MANIFEST_FILE));
    files.push(out_dir.join(STATES_FILE));
    let snapshot = serde_json::json!({
        "params": params,
        "recipe": recipe_name,
        "seed": seed,
        "out_dir": out_dir,
    });
    RunManifest::start("dataset", snapshot)
        .seed("dataset", seed)
        .finish(&out_dir.join(RUN_MANIFEST), &files)?;
    Ok(())
}
