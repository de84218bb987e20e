//! Exact open-system dynamics of two qubits coupled to correlated spin baths,
//! quantum-correlation measures computed by derivative-free optimisation, a
//! reproducible feature-dataset pipeline and a small regression network.

pub mod dataset;
pub mod dynamics;
pub mod measures;
pub mod mlp;
pub mod optimize;
pub mod parallel;
pub mod qmath;

#[cfg(test)]
pub(crate) mod testutil;
