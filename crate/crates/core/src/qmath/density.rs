use super::eig::hermitian_eigenvalues;
use super::matrix::{CMatrix, C64};
use super::QmathError;

/// Tolerance for the Hermitian, unit-trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, QmathError> {
        Self::with_tolerance(m, STATE_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self, QmathError> {
        let deviation = m.hermiticity_error();
        if deviation > tol {
            return Err(QmathError::NonHermitian { deviation });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(QmathError::TraceNotOne { trace: trace.re });
        }
        let min = hermitian_eigenvalues(&m)?[0];
        if min < -tol {
            return Err(QmathError::NotPositive { min_eigenvalue: min });
        }
        Ok(Self(m))
    }

    /// Pure state `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &[C64]) -> Result<Self, QmathError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QmathError::TraceNotOne { trace: norm });
        }
        Self::new(CMatrix::outer(psi).scale(1.0 / norm))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0).expect("density matrices are hermitian")
    }
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}
