use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use discordlab::dynamics::ModelParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Keys of the model parameters inside a flat config object.
pub const MODEL_KEYS: [&str; 12] = [
    "J1", "J2", "omega1", "omega2", "alpha1", "alpha2", "gamma1", "gamma2", "q", "beta_T", "N1", "N2",
];

/// Flat JSON object read from `--config`, split into model keys and command keys.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub model: Map<String, Value>,
    pub command: Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let Value::Object(map) = value else {
            bail!("config {} is not a JSON object", path.display());
        };
        let mut cfg = Self::default();
        for (k, v) in map {
            if v.is_object() || v.is_array() && k != "lr_decay_epochs" {
                bail!("config key {k:?} must be a scalar (flat config)");
            }
            if MODEL_KEYS.contains(&k.as_str()) {
                cfg.model.insert(k, v);
            } else {
                cfg.command.insert(k, v);
            }
        }
        Ok(cfg)
    }

    /// Command keys as `T`; unknown keys are rejected.
    pub fn command_options<T: DeserializeOwned>(&self, command: &str) -> anyhow::Result<T> {
        serde_json::from_value(Value::Object(self.command.clone())).map_err(|e| anyhow!("config for `{command}`: {e}"))
    }

    pub fn reject_model_keys(&self, command: &str) -> anyhow::Result<()> {
        match self.model.keys().next() {
            Some(k) => bail!("config key {k:?} is not used by `{command}`"),
            None => Ok(()),
        }
    }
}

/// Model parameter overrides; names match the config keys.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long = "J1")]
    #[serde(rename = "J1", skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    #[arg(long = "J2")]
    #[serde(rename = "J2", skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long = "beta-T")]
    #[serde(rename = "beta_T", skip_serializing_if = "Option::is_none")]
    pub beta_t: Option<f64>,
    #[arg(long = "N1")]
    #[serde(rename = "N1", skip_serializing_if = "Option::is_none")]
    pub n1: Option<u32>,
    #[arg(long = "N2")]
    #[serde(rename = "N2", skip_serializing_if = "Option::is_none")]
    pub n2: Option<u32>,
}

impl ModelArgs {
    /// Defaults, then config keys, then flags.
    pub fn resolve(&self, file: &FileConfig) -> anyhow::Result<ModelParams> {
        let Value::Object(mut merged) = serde_json::to_value(ModelParams::default())? else {
            unreachable!("params serialise to an object")
        };
        merged.extend(file.model.clone());
        let Value::Object(flags) = serde_json::to_value(self)? else {
            unreachable!("flags serialise to an object")
        };
        merged.extend(flags);
        let params: ModelParams = serde_json::from_value(Value::Object(merged)).context("model parameters")?;
        params.validate().map_err(|e| anyhow!("model parameters: {e}"))?;
        Ok(params)
    }
}

/// First of flag, config value, default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

pub fn require<T>(flag: Option<T>, config: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(config).ok_or_else(|| anyhow!("missing required option --{name}"))
}
