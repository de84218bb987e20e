use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "run_manifest.json";

/// Manifest location for a single-file output: `traj.csv` -> `traj.manifest.json`.
pub fn manifest_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.manifest.json"))
}

/// Deviations from the printed model that affect every command's outputs.
pub const DEVIATIONS: [&str; 4] = [
    "evolution uses rho(t) = U(t) rho0 U(t)^dagger",
    "QFI numerator uses (lambda_i - lambda_k)^2",
    "Hilbert-Schmidt and Hellinger discords are half the minimal squared distance",
    "network output layer is linear; equatorial measurement class sits at theta = pi/2",
];

/// Record of one CLI invocation. Outputs are listed with their sha256, so the
/// manifest pins the exact bytes of every file it describes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seeds: BTreeMap<String, u64>,
    pub versions: BTreeMap<String, String>,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub deviations: Vec<String>,
    pub outputs: BTreeMap<String, String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl RunManifest {
    pub fn start(command: &str, config: Value) -> Self {
        let mut versions = BTreeMap::new();
        versions.insert("discordlab".to_owned(), env!("CARGO_PKG_VERSION").to_owned());
        Self {
            command: command.to_owned(),
            config,
            seeds: BTreeMap::new(),
            versions,
            threads: discordlab::parallel::configured_threads(),
            started_unix: now(),
            finished_unix: 0.0,
            deviations: DEVIATIONS.iter().map(|s| s.to_string()).collect(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.to_owned(), value);
        self
    }

    /// Hashes `files` and writes the manifest to `path`; output keys are
    /// relative to the manifest's directory where possible.
    pub fn finish(mut self, path: &Path, files: &[PathBuf]) -> anyhow::Result<PathBuf> {
        let dir = path.parent().unwrap_or(Path::new(""));
        for f in files {
            let key = f.strip_prefix(dir).unwrap_or(f).display().to_string();
            self.outputs.insert(key, sha256_file(f)?);
        }
        self.finished_unix = now();
        let path = path.to_path_buf();
        let text = serde_json::to_string_pretty(&self)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
