use std::path::PathBuf;

use anyhow::{anyhow, bail};
use clap::Args;
use discordlab::dynamics::{uniform_grid, Evolver, XState};
use discordlab::qmath::{DensityMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, FileConfig, ModelArgs};
use crate::manifest::{manifest_for, RunManifest};
use crate::table::Table;
use crate::{CmdResult, UsageExt};

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "a", "b", "c", "d", "re_delta", "im_delta", "re_beta", "im_beta", "eig1", "eig2", "eig3", "eig4",
];

/// Column names of an X state inside a table.
pub const STATE_COLUMNS: [&str; 8] = ["a", "b", "c", "d", "re_delta", "im_delta", "re_beta", "im_beta"];

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `freezing`, or `a,b,c,d,delta,beta_c` (real coherences), or
    /// `a,b,c,d,re_delta,im_delta,re_beta,im_beta`.
    #[arg(long)]
    state: Option<String>,
    /// End of the time window in ps; `0` writes the initial state only.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of grid points on `(0, t-max]`.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    state: Option<String>,
    t_max: Option<f64>,
    steps: Option<usize>,
    out: Option<PathBuf>,
}

pub fn parse_state(s: &str) -> anyhow::Result<XState> {
    if s == "freezing" {
        return Ok(XState::freezing_example());
    }
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("state component {x:?}: {e}")))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    let (delta, beta) = match v.len() {
        6 => (C64::new(v[4], 0.0), C64::new(v[5], 0.0)),
        8 => (C64::new(v[4], v[5]), C64::new(v[6], v[7])),
        n => bail!("state needs 6 or 8 components, got {n}"),
    };
    Ok(XState::new(v[0], v[1], v[2], v[3], delta, beta)?)
}

/// `[a, b, c, d, re_delta, im_delta, re_beta, im_beta, eig1..eig4]`, eigenvalues descending.
pub fn state_row(rho: &DensityMatrix) -> anyhow::Result<Vec<f64>> {
    let x = XState::from_matrix(rho.matrix(), 1e-10)?;
    let mut row = vec![x.a, x.b, x.c, x.d, x.delta.re, x.delta.im, x.beta_c.re, x.beta_c.im];
    let mut eig = rho.eigenvalues();
    eig.reverse();
    row.extend(eig.iter().map(|e| e.clamp(0.0, 1.0)));
    Ok(row)
}

pub fn run(args: SimulateArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref()).usage()?;
    let cfg: SimulateConfig = file.command_options("simulate").usage()?;
    let params = args.model.resolve(&file).usage()?;
    let state_text = pick(args.state, cfg.state, "freezing".into());
    let state = parse_state(&state_text).usage()?;
    let t_max = pick(args.t_max, cfg.t_max, 6.0);
    let steps = pick(args.steps, cfg.steps, 60);
    let out = require(args.out, cfg.out, "out").usage()?;
    let grid = match (t_max, steps) {
        (t, _) if !(t >= 0.0 && t.is_finite()) => return Err(anyhow!("--t-max must be finite and >= 0")).usage(),
        (_, 0) => return Err(anyhow!("--steps must be at least 1")).usage(),
        (t, 1) if t == 0.0 => vec![0.0],
        (t, _) if t == 0.0 => return Err(anyhow!("--t-max 0 needs --steps 1")).usage(),
        (t, n) => uniform_grid(t, n),
    };

    let evolver = Evolver::new(&params)?;
    let mut table = Table::new(&TRAJECTORY_HEADER);
    for (t, rho) in evolver.trajectory(&state, &grid)? {
        let mut row = vec![t];
        row.extend(state_row(&rho)?);
        table.push_row(&row);
    }
    table.write(&out)?;

    let snapshot = serde_json::json!({
        "params": params,
        "state": state,
        "t_max": t_max,
        "steps": steps,
        "out": out,
    });
    RunManifest::start("simulate", snapshot).finish(&manifest_for(&out), &[out.clone()])?;
    Ok(())
}
