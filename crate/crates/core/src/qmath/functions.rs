use super::eig::hermitian_eig;
use super::matrix::CMatrix;

/// Default support cutoff applied to eigenvalues before fractional powers.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// `M^p` computed on the support of a positive semidefinite matrix.
///
/// Eigenvalues `<= cutoff` (including small negative rounding noise) map to
/// zero, so negative exponents give the pseudo-inverse power.
pub fn matrix_power_on_support(m: &CMatrix, p: f64, cutoff: f64) -> CMatrix {
    let e = hermitian_eig(&m.hermitian_part()).expect("hermitian part is hermitian");
    e.reconstruct_with(|l| if l <= cutoff { 0.0 } else { l.powf(p) })
}

pub fn matrix_sqrt_psd(m: &CMatrix) -> CMatrix {
    matrix_power_on_support(m, 0.5, SUPPORT_CUTOFF)
}
