//! Fully connected regression network trained by full-batch gradient descent.
//!
//! Default topology `7 -> 13 -> 1 -> 1`: tanh on both hidden layers, linear
//! output, dropout on the 13-unit layer.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::FeatureRow;
use crate::measures::item_seed;

#[derive(Debug, thiserror::Error)]
pub enum MlpError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty {0} set")]
    EmptyData(&'static str),
    #[error("training diverged at epoch {epoch}")]
    DivergenceDetected { epoch: usize, history: Vec<EpochRecord> },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("checkpoint checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Tanh => z.tanh(),
            Self::Linear => z,
        }
    }

    /// Derivative expressed through the activation value.
    fn slope(self, a: f64) -> f64 {
        match self {
            Self::Tanh => 1.0 - a * a,
            Self::Linear => 1.0,
        }
    }
}

/// Weights are row-major `(outputs, inputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            activation,
        }
    }

    fn w(&self, o: usize, i: usize) -> f64 {
        self.weights[o * self.inputs + i]
    }
}

pub const LAYER_SIZES: [usize; 4] = [7, 13, 1, 1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Multiplicative factors on the first hidden layer: `0` for dropped units,
/// `1/(1-rate)` for survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask(pub Vec<f64>);

impl DropoutMask {
    pub fn sample<R: Rng>(rng: &mut R, units: usize, rate: f64) -> Self {
        let keep = 1.0 / (1.0 - rate);
        Self((0..units).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect())
    }
}

/// Same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Per-layer activations of one forward pass; `values[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub values: Vec<Vec<f64>>,
    /// `d a / d z`, including any dropout factor.
    slopes: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn for_network(net: &Network) -> Self {
        let sizes = net.layer_sizes();
        Self {
            values: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            slopes: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl From<&FeatureRow> for Sample {
    fn from(r: &FeatureRow) -> Self {
        Self {
            x: r.features().to_vec(),
            y: r.dbr,
        }
    }
}

pub fn samples(rows: &[FeatureRow]) -> Vec<Sample> {
    rows.iter().map(Sample::from).collect()
}

impl Network {
    /// Default 7-13-1-1 topology with seeded initialisation.
    pub fn init(seed: u64) -> Self {
        let acts = [Activation::Tanh, Activation::Tanh, Activation::Linear];
        Self::with_layout(&LAYER_SIZES, &acts, seed)
    }

    /// Weights uniform on `+-sqrt(3/fan_in)` (variance `1/fan_in`), biases zero.
    pub fn with_layout(sizes: &[usize], activations: &[Activation], seed: u64) -> Self {
        assert_eq!(sizes.len(), activations.len() + 1, "one activation per layer");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .zip(activations)
            .map(|(w, &act)| {
                let mut layer = Layer::zeros(w[0], w[1], act);
                let bound = (3.0 / w[0] as f64).sqrt();
                for v in &mut layer.weights {
                    *v = rng.gen_range(-bound..=bound);
                }
                layer
            })
            .collect();
        Self { layers }
    }

    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Self {
        Self {
            layers: sizes.windows(2).zip(activations).map(|(w, &a)| Layer::zeros(w[0], w[1], a)).collect(),
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    /// Width of the layer the dropout mask applies to.
    pub fn dropout_width(&self) -> usize {
        self.layers[0].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    pub fn forward(&self, x: &[f64], mask: Option<&DropoutMask>) -> Result<(f64, ForwardCache), MlpError> {
        let mut cache = ForwardCache::for_network(self);
        let y = self.forward_into(x, mask, &mut cache)?;
        Ok((y, cache))
    }

    /// [`Network::forward`] into preallocated buffers.
    pub fn forward_into(&self, x: &[f64], mask: Option<&DropoutMask>, cache: &mut ForwardCache) -> Result<f64, MlpError> {
        if x.len() != self.input_size() {
            return Err(MlpError::ShapeMismatch {
                expected: self.input_size(),
                found: x.len(),
            });
        }
        if let Some(m) = mask {
            if m.0.len() != self.dropout_width() {
                return Err(MlpError::ShapeMismatch {
                    expected: self.dropout_width(),
                    found: m.0.len(),
                });
            }
        }
        let last = self.layers.len() - 1;
        cache.values[0].copy_from_slice(x);
        for (k, layer) in self.layers.iter().enumerate() {
            let (head, tail) = cache.values.split_at_mut(k + 1);
            let (input, out) = (&head[k], &mut tail[0]);
            let slopes = &mut cache.slopes[k];
            for o in 0..layer.outputs {
                let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                let z = layer.biases[o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                let v = layer.activation.apply(z);
                let factor = match mask {
                    Some(m) if k == 0 && k != last => m.0[o],
                    _ => 1.0,
                };
                out[o] = v * factor;
                slopes[o] = layer.activation.slope(v) * factor;
            }
        }
        Ok(cache.values[self.layers.len()][0])
    }

    /// Eval-mode output.
    pub fn predict(&self, x: &[f64]) -> Result<f64, MlpError> {
        Ok(self.forward(x, None)?.0)
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Sum of squared errors and its exact gradient under a fixed mask.
    pub fn backprop(&self, rows: &[Sample], mask: Option<&DropoutMask>) -> Result<(f64, Gradients), MlpError> {
        let mut g = self.zero_gradients();
        let mut cache = ForwardCache::for_network(self);
        let width = self.layer_sizes().into_iter().max().unwrap_or(1);
        let (mut delta, mut next) = (vec![0.0; width], vec![0.0; width]);
        let mut loss = 0.0;
        for row in rows {
            let y = self.forward_into(&row.x, mask, &mut cache)?;
            let err = y - row.y;
            loss += err * err;
            delta[0] = 2.0 * err * cache.slopes[self.layers.len() - 1][0];
            for (k, layer) in self.layers.iter().enumerate().rev() {
                let input = &cache.values[k];
                for o in 0..layer.outputs {
                    g.biases[k][o] += delta[o];
                    let row_w = &mut g.weights[k][o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, xi) in row_w.iter_mut().zip(input) {
                        *gw += delta[o] * xi;
                    }
                }
                if k > 0 {
                    for i in 0..layer.inputs {
                        next[i] = (0..layer.outputs).map(|o| layer.w(o, i) * delta[o]).sum::<f64>() * cache.slopes[k - 1][i];
                    }
                    std::mem::swap(&mut delta, &mut next);
                }
            }
        }
        Ok((loss, g))
    }

    /// `params -= step * grad`.
    pub fn apply(&mut self, g: &Gradients, step: f64) {
        for (k, layer) in self.layers.iter_mut().enumerate() {
            for (w, d) in layer.weights.iter_mut().zip(&g.weights[k]) {
                *w -= step * d;
            }
            for (b, d) in layer.biases.iter_mut().zip(&g.biases[k]) {
                *b -= step * d;
            }
        }
    }
}

/// Sum of squared errors in eval mode.
pub fn loss(net: &Network, rows: &[Sample]) -> Result<f64, MlpError> {
    let mut cache = ForwardCache::for_network(net);
    rows.iter()
        .try_fold(0.0, |acc, r| Ok(acc + (net.forward_into(&r.x, None, &mut cache)? - r.y).powi(2)))
}

/// Mean squared error in eval mode.
pub fn evaluate(net: &Network, rows: &[Sample]) -> Result<f64, MlpError> {
    if rows.is_empty() {
        return Err(MlpError::EmptyData("evaluation"));
    }
    Ok(loss(net, rows)? / rows.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Epoch indices (0-based) at which the rate is multiplied by `lr_decay`.
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay: f64,
    pub dropout_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100_000,
            learning_rate: 0.005,
            lr_decay_epochs: vec![30_000, 60_000],
            lr_decay: 0.5,
            dropout_rate: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let bad = |m: &str| Err(MlpError::InvalidConfig(m.into()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay.is_finite()) {
            return bad("lr_decay must be positive");
        }
        Ok(())
    }

    pub fn rate_at(&self, epoch: usize) -> f64 {
        let n = self.lr_decay_epochs.iter().filter(|&&e| epoch >= e).count();
        self.learning_rate * self.lr_decay.powi(n as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub best: Network,
    /// 0-based epoch whose parameters are in `best`.
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub history: Vec<EpochRecord>,
}

/// Full-batch descent. Each epoch draws a fresh mask, records the masked
/// training MSE and the eval-mode validation MSE of the current parameters,
/// then steps by `rate * grad / n`. Returns the parameters with the lowest
/// validation MSE.
pub fn train(net: &Network, train_rows: &[Sample], val_rows: &[Sample], cfg: &TrainConfig) -> Result<TrainOutcome, MlpError> {
    cfg.validate()?;
    if train_rows.is_empty() {
        return Err(MlpError::EmptyData("training"));
    }
    if val_rows.is_empty() {
        return Err(MlpError::EmptyData("validation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed(cfg.seed, 1));
    let mut current = net.clone();
    let mut best = (net.clone(), 0, f64::INFINITY);
    let mut history = Vec::with_capacity(cfg.epochs);
    let n = train_rows.len() as f64;
    let use_mask = cfg.dropout_rate > 0.0 && current.layers.len() > 1;
    for epoch in 0..cfg.epochs {
        let mask = use_mask.then(|| DropoutMask::sample(&mut rng, current.dropout_width(), cfg.dropout_rate));
        let (sse, grad) = current.backprop(train_rows, mask.as_ref())?;
        let val_mse = evaluate(&current, val_rows)?;
        history.push(EpochRecord {
            epoch,
            train_mse: sse / n,
            val_mse,
        });
        if !sse.is_finite() || !val_mse.is_finite() {
            return Err(MlpError::DivergenceDetected { epoch, history });
        }
        if val_mse < best.2 {
            best = (current.clone(), epoch, val_mse);
        }
        current.apply(&grad, cfg.rate_at(epoch) / n);
    }
    Ok(TrainOutcome {
        best: best.0,
        best_epoch: best.1,
        best_val_mse: best.2,
        history,
    })
}

pub fn write_history(history: &[EpochRecord], path: &Path) -> Result<(), MlpError> {
    let mut text = String::from("epoch,train_mse,val_mse\n");
    for r in history {
        text.push_str(&format!("{},{:.16e},{:.16e}\n", r.epoch, r.train_mse, r.val_mse));
    }
    fs::write(path, text).map_err(|source| MlpError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_history(path: &Path) -> Result<Vec<EpochRecord>, MlpError> {
    let text = fs::read_to_string(path).map_err(|source| MlpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    if lines.next() != Some("epoch,train_mse,val_mse") {
        return Err(MlpError::Malformed("history header".into()));
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || MlpError::Malformed(format!("history line {l:?}"));
            if f.len() != 3 {
                return Err(bad());
            }
            Ok(EpochRecord {
                epoch: f[0].parse().map_err(|_| bad())?,
                train_mse: f[1].parse().map_err(|_| bad())?,
                val_mse: f[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Saved network with its training configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub network: Network,
    pub config: TrainConfig,
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    payload: Checkpoint,
    sha256: String,
}

const CHECKPOINT_FORMAT: &str = "discordlab-mlp/1";

fn payload_digest(c: &Checkpoint) -> Result<String, MlpError> {
    let bytes = serde_json::to_vec(c).map_err(|e| MlpError::Malformed(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), MlpError> {
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.into(),
            sha256: payload_digest(self)?,
            payload: self.clone(),
        };
        let text = serde_json::to_string_pretty(&file).map_err(|e| MlpError::Malformed(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|source| MlpError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MlpError> {
        let text = fs::read_to_string(path).map_err(|source| MlpError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| MlpError::Malformed(e.to_string()))?;
        if file.format != CHECKPOINT_FORMAT {
            return Err(MlpError::Malformed(format!("unknown format {:?}", file.format)));
        }
        let computed = payload_digest(&file.payload)?;
        if computed != file.sha256 {
            return Err(MlpError::ChecksumMismatch {
                stored: file.sha256,
                computed,
            });
        }
        let net = &file.payload.network;
        let shapes_ok = !net.layers.is_empty()
            && net.layers.windows(2).all(|w| w[0].outputs == w[1].inputs)
            && net
                .layers
                .iter()
                .all(|l| l.weights.len() == l.inputs * l.outputs && l.biases.len() == l.outputs);
        if !shapes_ok || !net.is_finite() {
            return Err(MlpError::Malformed("inconsistent layer shapes or values".into()));
        }
        Ok(file.payload)
    }
}
