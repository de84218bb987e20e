//! Shared fixtures for the criterion benches.

use discordlab::dynamics::{Evolver, ModelParams, XState};
use discordlab::mlp::Sample;
use discordlab::qmath::DensityMatrix;

/// The freezing example evolved to `t = 2` under the default model.
pub fn evolved_state() -> DensityMatrix {
    Evolver::new(&ModelParams::default())
        .expect("default model is valid")
        .evolve(&XState::freezing_example(), 2.0)
        .expect("evolution succeeds")
}

/// Deterministic rows with seven features in `[0, 1)`.
pub fn synthetic_rows(n: usize) -> Vec<Sample> {
    (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..7).map(|k| ((i * 7 + k) as f64 * 0.618_033_988_75).fract()).collect();
            let y = x.iter().sum::<f64>() / 7.0;
            Sample { x, y }
        })
        .collect()
}
