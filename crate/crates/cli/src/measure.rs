use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use discordlab::dynamics::XState;
use discordlab::measures::{evaluate_batch, MeasureKind};
use discordlab::qmath::C64;
use serde::{Deserialize, Serialize};

use crate::config::{pick, require, FileConfig};
use crate::manifest::{manifest_for, RunManifest};
use crate::simulate::STATE_COLUMNS;
use crate::table::Table;
use crate::{CmdResult, UsageExt};

/// `(name, minuend, subtrahend)` for the pairwise difference columns.
pub const DIFFERENCES: [(&str, &str, &str); 4] = [
    ("dbr_minus_dhl", "dbr", "dhl"),
    ("dbr_minus_dhs", "dbr", "dhs"),
    ("dhl_minus_dhs", "dhl", "dhs"),
    ("red2_minus_concurrence", "red2", "concurrence"),
];

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV with columns a,b,c,d,re_delta,im_delta,re_beta,im_beta.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Comma-separated subset of concurrence,dhs,dhl,dbr,ip,red2.
    #[arg(long)]
    measures: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureConfig {
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    measures: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

pub fn parse_measures(s: &str) -> anyhow::Result<Vec<MeasureKind>> {
    let mut kinds = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let k = MeasureKind::from_column(name).ok_or_else(|| anyhow!("unknown measure {name:?}"))?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(anyhow!("no measures requested"));
    }
    Ok(kinds)
}

pub fn run(args: MeasureArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref()).usage()?;
    file.reject_model_keys("measure").usage()?;
    let cfg: MeasureConfig = file.command_options("measure").usage()?;
    let input = require(args.input, cfg.input, "in").usage()?;
    let out = require(args.out, cfg.out, "out").usage()?;
    let all = MeasureKind::ALL.map(|k| k.column()).join(",");
    let kinds = parse_measures(&pick(args.measures, cfg.measures, all)).usage()?;
    let seed = pick(args.seed, cfg.seed, 0);

    let mut table = Table::read(&input).usage()?;
    if let Some(k) = kinds.iter().find(|k| table.has(k.column())) {
        return Err(anyhow!("input already has a {:?} column", k.column())).usage();
    }
    let cols = STATE_COLUMNS
        .iter()
        .map(|c| table.column(c))
        .collect::<anyhow::Result<Vec<_>>>()
        .usage()?;
    let states = (0..table.rows.len())
        .map(|i| {
            let v = |k: usize| cols[k][i];
            XState::new(v(0), v(1), v(2), v(3), C64::new(v(4), v(5)), C64::new(v(6), v(7)))
                .and_then(|x| x.to_density())
                .map_err(|e| anyhow!("row {i}: {e}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()
        .usage()?;

    let results = evaluate_batch(&states, &kinds, seed)?;
    for (j, k) in kinds.iter().enumerate() {
        let values: Vec<f64> = results.iter().map(|r| r[j].value).collect();
        table.push_column(k.column(), &values);
    }
    for (name, a, b) in DIFFERENCES {
        if let (Ok(x), Ok(y)) = (table.column(a), table.column(b)) {
            let d: Vec<f64> = x.iter().zip(&y).map(|(x, y)| x - y).collect();
            table.push_column(name, &d);
        }
    }
    table.write(&out)?;

    let snapshot = serde_json::json!({
        "in": input,
        "measures": kinds.iter().map(|k| k.column()).collect::<Vec<_>>(),
        "out": out,
        "seed": seed,
    });
    RunManifest::start("measure", snapshot)
        .seed("measure", seed)
        .finish(&manifest_for(&out), &[out.clone()])?;
    Ok(())
}
