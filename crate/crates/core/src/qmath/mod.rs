//! Dense complex linear algebra for the 2-, 4- and 8-dimensional operators
//! used by the dynamics and the correlation measures.

mod density;
mod distance;
mod eig;
mod functions;
pub mod matrix;
mod tensor;

pub use density::{DensityMatrix, STATE_TOL};
pub use distance::{
    affinity, bures_distance_sq, fidelity, hellinger_distance_sq, hs_distance_sq, sqrt_fidelity,
    sqrt_fidelity_with_root,
};
pub use eig::{hermitian_eig, hermitian_eigenvalues, orthonormality_error, EigenDecomposition};
pub use functions::{matrix_power_on_support, matrix_sqrt_psd, SUPPORT_CUTOFF};
pub use matrix::{pauli, CMatrix, C64};
pub use tensor::{kron, partial_trace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QmathError {
    #[error("matrix is not hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{len} entries do not form a square matrix")]
    NotSquare { len: usize },
    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(&m.hermitian_part())
        .expect("hermitian part is hermitian")
        .into_iter()
        .filter(|&l| l > SUPPORT_CUTOFF)
        .map(|l| -l * l.log2())
        .sum()
}
