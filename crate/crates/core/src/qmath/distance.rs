use super::density::DensityMatrix;
use super::eig::hermitian_eigenvalues;
use super::functions::{matrix_sqrt_psd, SUPPORT_CUTOFF};
use super::matrix::CMatrix;
use super::QmathError;

fn same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(), QmathError> {
    if rho.dim() != sigma.dim() {
        return Err(QmathError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// `Tr sqrt(sqrt(rho) sigma sqrt(rho))` given a precomputed `sqrt(rho)`.
///
/// Eigenvalues at or below the support cutoff are dropped; their square roots
/// would otherwise turn rounding noise into errors of order 1e-8.
pub fn sqrt_fidelity_with_root(sqrt_rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let inner = sqrt_rho.matmul(sigma).matmul(sqrt_rho).hermitian_part();
    hermitian_eigenvalues(&inner)
        .expect("hermitian part is hermitian")
        .into_iter()
        .filter(|&l| l > SUPPORT_CUTOFF)
        .map(f64::sqrt)
        .sum()
}

/// Root fidelity `Tr |sqrt(rho) sqrt(sigma)|`.
pub fn sqrt_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    same_dim(rho, sigma)?;
    Ok(sqrt_fidelity_with_root(&matrix_sqrt_psd(rho.matrix()), sigma.matrix()))
}

/// Uhlmann fidelity `F = (Tr |sqrt(rho) sqrt(sigma)|)^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    Ok(sqrt_fidelity(rho, sigma)?.powi(2))
}

/// Squared Bures distance `2 (1 - sqrt F)`.
pub fn bures_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    Ok(2.0 * (1.0 - sqrt_fidelity(rho, sigma)?.min(1.0)))
}

/// Quantum affinity `Tr[sqrt(rho) sqrt(sigma)]`.
pub fn affinity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    same_dim(rho, sigma)?;
    let a = matrix_sqrt_psd(rho.matrix());
    let b = matrix_sqrt_psd(sigma.matrix());
    Ok(a.trace_product(&b).re)
}

/// Squared Hellinger distance `2 (1 - Tr[sqrt(rho) sqrt(sigma)])`.
pub fn hellinger_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    Ok(2.0 * (1.0 - affinity(rho, sigma)?.min(1.0)))
}

/// Squared Hilbert-Schmidt (Frobenius) distance `sum |rho_ij - sigma_ij|^2`.
pub fn hs_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    same_dim(rho, sigma)?;
    Ok((rho.matrix() - sigma.matrix()).frobenius_norm_sq())
}
