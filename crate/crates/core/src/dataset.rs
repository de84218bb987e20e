//! Feature corpus linking the Renyi discord (alpha = 2) and its optimal
//! measurement to the Bures discord.
//!
//! Pipeline: [`generate`] -> [`dedup`] -> [`classify_theta`] -> [`split`],
//! persisted with [`write_csv`]. [`run_pipeline`] chains all of it.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{uniform_grid, DynamicsError, Evolver, ModelParams, XState};
use crate::measures::{
    discord_bures, discord_hellinger, discord_hs, item_seed, renyi_discord, MeasuresError, OptimizerConfig,
};
use crate::parallel::par_map;
use crate::qmath::C64;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid row {index}: {reason}")]
    InvalidRow { index: usize, reason: String },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Measures(#[from] MeasuresError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Optimal polar angle of the equatorial class. With
/// `|0'> = cos(theta/2)|0> + ...` the Bloch equator sits at `theta = pi/2`.
pub const THETA_EQUATOR: f64 = PI / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "THETA0")]
    Theta0,
    #[serde(rename = "THETAQ")]
    ThetaQ,
}

impl ClassTag {
    pub const ALL: [ClassTag; 2] = [ClassTag::Theta0, ClassTag::ThetaQ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Theta0 => "THETA0",
            Self::ThetaQ => "THETAQ",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "THETA0" => Some(Self::Theta0),
            "THETAQ" => Some(Self::ThetaQ),
            _ => None,
        }
    }

    /// Polar angle the class is centred on.
    pub fn angle(self) -> f64 {
        match self {
            Self::Theta0 => 0.0,
            Self::ThetaQ => THETA_EQUATOR,
        }
    }
}

impl std::fmt::Display for ClassTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sample: seven network inputs, the label and provenance columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRow {
    /// Eigenvalues of the evolved state, descending.
    pub eig: [f64; 4],
    pub theta_star: f64,
    pub phi_star: f64,
    pub red2: f64,
    pub dbr: f64,
    pub t: f64,
    pub q_used: f64,
    pub class_tag: Option<ClassTag>,
}

pub const CSV_HEADER: [&str; 11] = [
    "eig1", "eig2", "eig3", "eig4", "theta_star", "phi_star", "red2", "dbr", "t", "q_used", "class_tag",
];

impl FeatureRow {
    /// Network inputs `[eig1..eig4, theta*, phi*, red2]`.
    pub fn features(&self) -> [f64; 7] {
        [
            self.eig[0],
            self.eig[1],
            self.eig[2],
            self.eig[3],
            self.theta_star,
            self.phi_star,
            self.red2,
        ]
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.eig.windows(2).any(|w| w[0] < w[1]) {
            return Err("eigenvalues not descending".into());
        }
        if self.eig.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return Err("eigenvalue outside [0, 1]".into());
        }
        if (self.eig.iter().sum::<f64>() - 1.0).abs() > 1e-8 {
            return Err("eigenvalues do not sum to 1".into());
        }
        if !(self.red2 >= 0.0 && self.red2.is_finite()) {
            return Err("red2 negative or non-finite".into());
        }
        if !(0.0..=2.0).contains(&self.dbr) {
            return Err("dbr outside [0, 2]".into());
        }
        if ![self.theta_star, self.phi_star, self.t, self.q_used].iter().all(|v| v.is_finite()) {
            return Err("non-finite column".into());
        }
        Ok(())
    }

    fn to_record(&self) -> Vec<String> {
        let mut rec: Vec<String> = self
            .eig
            .iter()
            .chain(&[self.theta_star, self.phi_star, self.red2, self.dbr, self.t, self.q_used])
            .map(|v| format_float(*v))
            .collect();
        rec.push(self.class_tag.map_or(String::new(), |c| c.as_str().to_owned()));
        rec
    }

    fn from_record(rec: &csv::StringRecord, index: usize) -> Result<Self, DatasetError> {
        let num = |k: usize| -> Result<f64, DatasetError> {
            rec.get(k)
                .ok_or_else(|| DatasetError::SchemaMismatch(format!("row {index} has {} fields", rec.len())))?
                .parse::<f64>()
                .map_err(|e| DatasetError::InvalidRow {
                    index,
                    reason: format!("column {}: {e}", CSV_HEADER[k]),
                })
        };
        let tag = rec.get(10).unwrap_or("");
        let class_tag = if tag.is_empty() {
            None
        } else {
            Some(ClassTag::parse(tag).ok_or_else(|| DatasetError::InvalidRow {
                index,
                reason: format!("unknown class tag {tag:?}"),
            })?)
        };
        Ok(Self {
            eig: [num(0)?, num(1)?, num(2)?, num(3)?],
            theta_star: num(4)?,
            phi_star: num(5)?,
            red2: num(6)?,
            dbr: num(7)?,
            t: num(8)?,
            q_used: num(9)?,
            class_tag,
        })
    }
}

/// Decimal scientific notation with 17 significant digits; parses back exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Initial states, bath couplings and time grid of a generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub states: Vec<XState>,
    pub q_values: Vec<f64>,
    pub t_grid: Vec<f64>,
}

impl Recipe {
    /// X-state lattice `(b, c) in {0.1, ..., 0.5}^2`, real `beta_c` in steps of
    /// 0.1 up to `sqrt(bc)`, `a = d = (1 - b - c)/2`, `delta = 0`; couplings
    /// `q in {30, 15}`; 60 points on `(0, 6]` ps.
    pub fn reference() -> Self {
        let mut states = Vec::new();
        for bi in 1..=5 {
            for ci in 1..=5 {
                let (b, c) = (bi as f64 / 10.0, ci as f64 / 10.0);
                let ad = (1.0 - b - c) / 2.0;
                let bound = (b * c).sqrt() + 1e-12;
                for k in (1..).take_while(|&k| k as f64 / 10.0 <= bound) {
                    let beta_c = C64::new(k as f64 / 10.0, 0.0);
                    states.push(XState::new(ad, b, c, ad, C64::new(0.0, 0.0), beta_c).expect("lattice state is valid"));
                }
            }
        }
        Self {
            name: "reference".into(),
            states,
            q_values: vec![30.0, 15.0],
            t_grid: uniform_grid(6.0, 60),
        }
    }

    /// Two states, one coupling, ten times.
    pub fn tiny() -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            name: "tiny".into(),
            states: vec![
                XState::freezing_example(),
                XState::new(0.15, 0.3, 0.4, 0.15, z, C64::new(0.3, 0.0)).expect("valid"),
            ],
            q_values: vec![30.0],
            t_grid: uniform_grid(6.0, 10),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "reference" => Some(Self::reference()),
            "tiny" => Some(Self::tiny()),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len() * self.q_values.len() * self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Result of recomputing the Hellinger and Hilbert-Schmidt discords on a sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub audited: usize,
    /// Rows with `dbr < dhl - 1e-4` or `dbr < dhs - 1e-4`.
    pub violations: usize,
    pub min_margin_hl: Option<f64>,
    pub min_margin_hs: Option<f64>,
}

const AUDIT_TOL: f64 = 1e-4;

/// One row per (state, q, t), in that nesting order.
pub fn generate(
    params: &ModelParams,
    states: &[XState],
    t_grid: &[f64],
    q_values: &[f64],
    seed: u64,
) -> Result<Vec<FeatureRow>, DatasetError> {
    Ok(generate_audited(params, states, t_grid, q_values, seed, 0.0)?.0)
}

/// [`generate`] plus an ordering audit on a seeded `audit_fraction` of rows.
pub fn generate_audited(
    params: &ModelParams,
    states: &[XState],
    t_grid: &[f64],
    q_values: &[f64],
    seed: u64,
    audit_fraction: f64,
) -> Result<(Vec<FeatureRow>, AuditReport), DatasetError> {
    if states.is_empty() {
        return Err(DatasetError::EmptyInput("initial states"));
    }
    if t_grid.is_empty() {
        return Err(DatasetError::EmptyInput("time grid"));
    }
    if q_values.is_empty() {
        return Err(DatasetError::EmptyInput("q values"));
    }
    for s in states {
        s.validate()?;
    }
    let evolvers = q_values
        .iter()
        .map(|&q| Evolver::new(&ModelParams { q, ..params.clone() }))
        .collect::<Result<Vec<_>, _>>()?;

    let (nq, nt) = (q_values.len(), t_grid.len());
    let jobs: Vec<(usize, usize, usize)> = (0..states.len())
        .flat_map(|s| (0..nq).flat_map(move |q| (0..nt).map(move |t| (s, q, t))))
        .collect();
    let mut audit_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA0D1_7000);
    let audit: Vec<bool> = jobs.iter().map(|_| audit_rng.gen::<f64>() < audit_fraction).collect();

    type Job = Result<(FeatureRow, Option<(f64, f64)>), DatasetError>;
    let results: Vec<Job> = par_map(&jobs, |i, &(s, q, t)| {
        let time = t_grid[t];
        let rho = evolvers[q].evolve(&states[s], time)?;
        let row_seed = item_seed(seed, i);
        let red = renyi_discord(&rho, 2.0, &OptimizerConfig::renyi().with_seed(row_seed))?;
        let geo = OptimizerConfig::geometric().with_seed(row_seed);
        let dbr = discord_bures(&rho, &geo)?.value;
        let mut eig = rho.eigenvalues();
        eig.reverse();
        let row = FeatureRow {
            eig: [0, 1, 2, 3].map(|k| eig[k].clamp(0.0, 1.0)),
            theta_star: red.argmin[0],
            phi_star: red.argmin[1],
            red2: red.value.max(0.0),
            dbr,
            t: time,
            q_used: q_values[q],
            class_tag: None,
        };
        let margins = if audit[i] {
            let hl = discord_hellinger(&rho, &geo)?.value;
            let hs = discord_hs(&rho, &geo)?.value;
            Some((dbr - hl, dbr - hs))
        } else {
            None
        };
        Ok((row, margins))
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut report = AuditReport::default();
    for r in results {
        let (row, margins) = r?;
        if let Some((hl, hs)) = margins {
            report.audited += 1;
            if hl < -AUDIT_TOL || hs < -AUDIT_TOL {
                report.violations += 1;
            }
            report.min_margin_hl = Some(report.min_margin_hl.map_or(hl, |m: f64| m.min(hl)));
            report.min_margin_hs = Some(report.min_margin_hs.map_or(hs, |m: f64| m.min(hs)));
        }
        rows.push(row);
    }
    Ok((rows, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub total: usize,
    pub removed: usize,
    pub repetition_rate: f64,
}

/// Collapses rows whose seven features agree after rounding to `quantum`;
/// the first occurrence survives.
pub fn dedup(rows: &[FeatureRow], quantum: f64) -> (Vec<FeatureRow>, DedupReport) {
    let mut seen = HashSet::new();
    let kept: Vec<FeatureRow> = rows
        .iter()
        .filter(|r| seen.insert(r.features().map(|v| (v / quantum).round() as i64)))
        .copied()
        .collect();
    let removed = rows.len() - kept.len();
    let report = DedupReport {
        total: rows.len(),
        removed,
        repetition_rate: if rows.is_empty() { 0.0 } else { removed as f64 / rows.len() as f64 },
    };
    (kept, report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub rows: Vec<FeatureRow>,
    pub quarantined: Vec<FeatureRow>,
}

impl Classified {
    pub fn count(&self, tag: ClassTag) -> usize {
        self.rows.iter().filter(|r| r.class_tag == Some(tag)).count()
    }

    pub fn class_rows(&self, tag: ClassTag) -> Vec<FeatureRow> {
        self.rows.iter().filter(|r| r.class_tag == Some(tag)).copied().collect()
    }

    pub fn quarantine_fraction(&self) -> f64 {
        let total = self.rows.len() + self.quarantined.len();
        if total == 0 {
            0.0
        } else {
            self.quarantined.len() as f64 / total as f64
        }
    }
}

/// Tags rows by optimal polar angle: within `tol` of 0 gives `THETA0`,
/// within `tol` of [`THETA_EQUATOR`] gives `THETAQ`, anything else is quarantined.
pub fn classify_theta(rows: &[FeatureRow], tol: f64) -> Classified {
    let mut out = Classified {
        rows: Vec::new(),
        quarantined: Vec::new(),
    };
    for r in rows {
        match ClassTag::ALL.into_iter().find(|c| (r.theta_star - c.angle()).abs() <= tol) {
            Some(tag) => out.rows.push(FeatureRow {
                class_tag: Some(tag),
                ..*r
            }),
            None => out.quarantined.push(FeatureRow { class_tag: None, ..*r }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<FeatureRow>,
    pub val: Vec<FeatureRow>,
    pub test: Vec<FeatureRow>,
}

/// Seeded shuffle, then `round(n f_train)` train rows, `round(n f_val)`
/// validation rows and the remainder as test rows.
pub fn split(rows: &[FeatureRow], fractions: [f64; 3], seed: u64) -> Split {
    let n = rows.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let total: f64 = fractions.iter().sum();
    let n_train = ((n as f64) * fractions[0] / total).round() as usize;
    let n_val = (((n as f64) * fractions[1] / total).round() as usize).min(n - n_train);
    let pick = |r: &[usize]| r.iter().map(|&i| rows[i]).collect::<Vec<_>>();
    Split {
        train: pick(&idx[..n_train]),
        val: pick(&idx[n_train..n_train + n_val]),
        test: pick(&idx[n_train + n_val..]),
    }
}

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.6, 0.2, 0.2];

pub fn write_csv(rows: &[FeatureRow], path: &Path) -> Result<(), DatasetError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<FeatureRow>, DatasetError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(DatasetError::SchemaMismatch(format!(
            "expected header {:?}, found {:?}",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (index, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(DatasetError::SchemaMismatch(format!("row {index} has {} fields", rec.len())));
        }
        let row = FeatureRow::from_record(&rec, index)?;
        row.validate().map_err(|reason| DatasetError::InvalidRow { index, reason })?;
        rows.push(row);
    }
    Ok(rows)
}

pub const DEDUP_QUANTUM: f64 = 1e-6;
pub const THETA_TOL: f64 = 1e-2;
pub const AUDIT_FRACTION: f64 = 0.01;

/// Everything needed to regenerate a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationManifest {
    pub version: String,
    pub params: ModelParams,
    pub recipe: Recipe,
    pub seed: u64,
    pub evolution_convention: String,
    pub theta_classes: Vec<(String, f64)>,
    pub dedup_quantum: f64,
    pub theta_tol: f64,
    pub rows_generated: usize,
    pub dedup: DedupReport,
    pub class_counts: Vec<(String, usize)>,
    pub quarantined: usize,
    pub audit: AuditReport,
    pub split_sizes: Vec<(String, [usize; 3])>,
    pub files: Vec<String>,
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// Output of [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub manifest: GenerationManifest,
    pub classified: Classified,
    pub splits: Vec<(ClassTag, Split)>,
}

/// File name for one class and partition, e.g. `THETA0_train.csv`.
pub fn split_file_name(tag: ClassTag, part: &str) -> String {
    format!("{}_{part}.csv", tag.as_str())
}

pub const CORPUS_FILE: &str = "corpus.csv";
pub const QUARANTINE_FILE: &str = "quarantine.csv";
pub const MANIFEST_FILE: &str = "generation_manifest.json";

/// generate -> dedup -> classify -> split per class, then writes the corpus,
/// the quarantine side-file, `{CLASS}_{train,val,test}.csv` and the manifest.
pub fn run_pipeline(params: &ModelParams, recipe: &Recipe, seed: u64, out_dir: &Path) -> Result<PipelineOutput, DatasetError> {
    let (rows, audit) = generate_audited(params, &recipe.states, &recipe.t_grid, &recipe.q_values, seed, AUDIT_FRACTION)?;
    let (unique, dedup_report) = dedup(&rows, DEDUP_QUANTUM);
    let classified = classify_theta(&unique, THETA_TOL);

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut files = vec![CORPUS_FILE.to_owned(), QUARANTINE_FILE.to_owned()];
    write_csv(&classified.rows, &out_dir.join(CORPUS_FILE))?;
    write_csv(&classified.quarantined, &out_dir.join(QUARANTINE_FILE))?;

    let mut splits = Vec::new();
    let mut split_sizes = Vec::new();
    for (k, tag) in ClassTag::ALL.into_iter().enumerate() {
        let s = split(&classified.class_rows(tag), DEFAULT_FRACTIONS, item_seed(seed, k));
        for (part, data) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
            let name = split_file_name(tag, part);
            write_csv(data, &out_dir.join(&name))?;
            files.push(name);
        }
        split_sizes.push((tag.as_str().to_owned(), [s.train.len(), s.val.len(), s.test.len()]));
        splits.push((tag, s));
    }

    let manifest = GenerationManifest {
        version: version_string(),
        params: params.clone(),
        recipe: recipe.clone(),
        seed,
        evolution_convention: "rho(t) = U(t) rho0 U(t)^dagger".into(),
        theta_classes: ClassTag::ALL.iter().map(|c| (c.as_str().to_owned(), c.angle())).collect(),
        dedup_quantum: DEDUP_QUANTUM,
        theta_tol: THETA_TOL,
        rows_generated: rows.len(),
        dedup: dedup_report,
        class_counts: ClassTag::ALL.iter().map(|&c| (c.as_str().to_owned(), classified.count(c))).collect(),
        quarantined: classified.quarantined.len(),
        audit,
        split_sizes,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(PipelineOutput {
        manifest,
        classified,
        splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(theta: f64, v: f64) -> FeatureRow {
        FeatureRow {
            eig: [0.4, 0.3, 0.2, 0.1],
            theta_star: theta,
            phi_star: 0.0,
            red2: v,
            dbr: v,
            t: 1.0,
            q_used: 30.0,
            class_tag: None,
        }
    }

    #[test]
    fn generate_row_count_and_order() {
        let p = ModelParams::default();
        let grid = uniform_grid(6.0, 60);
        let rows = generate(&p, &[XState::freezing_example()], &grid, &[30.0], 1).unwrap();
        assert_eq!(rows.len(), 60);
        assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
        for r in &rows {
            r.validate().unwrap();
        }
    }

    #[test]
    fn product_initial_state_gives_zero_rows() {
        let z = C64::new(0.0, 0.0);
        let ground = XState::new(1.0, 0.0, 0.0, 0.0, z, z).unwrap();
        let rows = generate(&ModelParams::default(), &[ground], &uniform_grid(6.0, 6), &[30.0], 1).unwrap();
        for r in rows {
            assert!(r.red2.abs() < 1e-8 && r.dbr.abs() < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn generate_is_deterministic_and_validates_inputs() {
        let p = ModelParams::default();
        let r = Recipe::tiny();
        let a = generate(&p, &r.states, &r.t_grid, &r.q_values, 5).unwrap();
        let b = generate(&p, &r.states, &r.t_grid, &r.q_values, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(matches!(generate(&p, &[], &r.t_grid, &r.q_values, 5), Err(DatasetError::EmptyInput(_))));
    }

    #[test]
    fn reference_recipe_size() {
        let r = Recipe::reference();
        assert_eq!(r.states.len(), 61);
        assert!(r.len() >= 5000);
        assert!(r.states.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn dedup_collapses_copies() {
        let rows = vec![row(0.0, 0.1), row(0.0, 0.2)];
        let (kept, rep) = dedup(&rows, DEDUP_QUANTUM);
        assert_eq!(kept, rows);
        assert_eq!(rep.removed, 0);
        let doubled = vec![row(0.0, 0.1), row(0.0, 0.1 + 1e-9)];
        let (kept, rep) = dedup(&doubled, DEDUP_QUANTUM);
        assert_eq!(kept.len(), 1);
        assert_eq!(rep.repetition_rate, 0.5);
    }

    #[test]
    fn classify_examples() {
        let c = classify_theta(&[row(0.001, 0.1), row(THETA_EQUATOR - 0.005, 0.1), row(0.5, 0.1)], THETA_TOL);
        assert_eq!(c.rows[0].class_tag, Some(ClassTag::Theta0));
        assert_eq!(c.rows[1].class_tag, Some(ClassTag::ThetaQ));
        assert_eq!(c.quarantined.len(), 1);
        assert!((c.quarantine_fraction() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let rows: Vec<_> = (0..10).map(|k| row(0.0, k as f64 / 10.0)).collect();
        let s = split(&rows, DEFAULT_FRACTIONS, 3);
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (6, 2, 2));
        assert_eq!(s, split(&rows, DEFAULT_FRACTIONS, 3));
        assert_ne!(s, split(&rows, DEFAULT_FRACTIONS, 4));
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 0usize..200, seed in any::<u64>()) {
            let rows: Vec<_> = (0..n).map(|k| row(0.0, k as f64 / 1000.0)).collect();
            let s = split(&rows, DEFAULT_FRACTIONS, seed);
            let mut all: Vec<f64> = s.train.iter().chain(&s.val).chain(&s.test).map(|r| r.red2).collect();
            all.sort_by(f64::total_cmp);
            let expected: Vec<f64> = rows.iter().map(|r| r.red2).collect();
            prop_assert_eq!(all, expected);
            prop_assert!((s.train.len() as f64 - 0.6 * n as f64).abs() <= 1.0);
            prop_assert!((s.val.len() as f64 - 0.2 * n as f64).abs() <= 1.0);
            prop_assert!((s.test.len() as f64 - 0.2 * n as f64).abs() <= 1.0);
        }

        #[test]
        fn float_format_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            prop_assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_round_trip_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let mut rows = vec![row(0.0, 0.1), row(THETA_EQUATOR, 1.0 / 3.0)];
        rows[1].class_tag = Some(ClassTag::ThetaQ);
        rows[0].eig = [0.7, 0.2, 0.1, 0.0];
        write_csv(&rows, &path).unwrap();
        assert_eq!(read_csv(&path).unwrap(), rows);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));

        let broken = path.with_file_name("broken.csv");
        let mut lines: Vec<&str> = text.lines().collect();
        let short_header = CSV_HEADER[..10].join(",");
        lines[0] = &short_header;
        fs::write(&broken, lines.join("\n")).unwrap();
        assert!(matches!(read_csv(&broken), Err(DatasetError::SchemaMismatch(_))));
        assert!(matches!(read_csv(&dir.path().join("missing.csv")), Err(DatasetError::Io { .. })));
    }

    #[test]
    fn pipeline_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_pipeline(&ModelParams::default(), &Recipe::tiny(), 9, dir.path()).unwrap();
        assert_eq!(out.manifest.rows_generated, 20);
        for f in &out.manifest.files {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(dir.path().join(MANIFEST_FILE).exists());
        let total: usize = out.splits.iter().map(|(_, s)| s.train.len() + s.val.len() + s.test.len()).sum();
        assert_eq!(total, out.classified.rows.len());
    }
}
