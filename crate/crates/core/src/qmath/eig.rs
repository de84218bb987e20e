//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so every step
//! is an exact unitary similarity and eigenvectors stay orthonormal to
//! rounding error.

use super::matrix::{CMatrix, C64, ZERO};
use super::QmathError;

/// Symmetry tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;
const SWEEP_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 200;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V f(Λ) V^dagger`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let fv: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        CMatrix::from_fn(n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fv[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition, QmathError> {
    check_hermitian(m)?;
    let (values, vectors) = jacobi(m, true);
    let vectors = vectors.expect("vectors requested");
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, |i, j| vectors[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending. Skips the eigenvector accumulation.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>, QmathError> {
    check_hermitian(m)?;
    let (mut values, _) = jacobi(m, false);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn check_hermitian(m: &CMatrix) -> Result<(), QmathError> {
    let deviation = m.hermiticity_error();
    if !(deviation <= HERMITIAN_TOL * m.max_abs().max(1.0)) {
        return Err(QmathError::NonHermitian { deviation });
    }
    Ok(())
}

fn jacobi(m: &CMatrix, want_vectors: bool) -> (Vec<f64>, Option<CMatrix>) {
    let n = m.dim();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = want_vectors.then(|| CMatrix::identity(n));

    let scale = a.frobenius_norm_sq().sqrt().max(f64::MIN_POSITIVE);
    let threshold = (SWEEP_TOL * scale).powi(2);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag; // e^{i phi}
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                rotate(&mut a, p, q, gpp, gpq, gqp, gqq);
                a[(p, p)] = C64::new(app - t * mag, 0.0);
                a[(q, q)] = C64::new(aqq + t * mag, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                if let Some(v) = v.as_mut() {
                    rotate_columns(v, p, q, gpp, gpq, gqp, gqq);
                }
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    (values, v)
}

#[inline]
fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, gpp: C64, gpq: C64, gqp: C64, gqq: C64) {
    for k in 0..m.dim() {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * gpp + mkq * gqp;
        m[(k, q)] = mkp * gpq + mkq * gqq;
    }
}

/// `A <- G^dagger A G` on the rows and columns `p`, `q`.
#[inline]
fn rotate(a: &mut CMatrix, p: usize, q: usize, gpp: C64, gpq: C64, gqp: C64, gqq: C64) {
    rotate_columns(a, p, q, gpp, gpq, gqp, gqq);
    for k in 0..a.dim() {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
}

/// `max |V^dagger V - I|`.
pub fn orthonormality_error(v: &CMatrix) -> f64 {
    v.adjoint().matmul(v).max_abs_diff(&CMatrix::identity(v.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::matrix::ONE;
    use crate::qmath::{kron, matrix::pauli};
    use crate::testutil::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, k: usize) -> Vec<C64> {
        let mut e = vec![ZERO; n];
        e[k] = ONE;
        e
    }

    #[test]
    fn diagonal_input_is_returned_sorted_with_canonical_vectors() {
        let m = CMatrix::from_real_diag(&[3.0, 1.0, 4.0, 2.0]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0, 4.0]);
        let expected_cols = [1, 3, 0, 2];
        for (j, &k) in expected_cols.iter().enumerate() {
            let col = e.eigenvector(j);
            assert!((col[k].norm() - 1.0).abs() < 1e-15);
            assert_eq!(col, unit(4, k));
        }
    }

    #[test]
    fn pauli_x_tensor_identity_spectrum() {
        let m = kron(&pauli::x(), &pauli::id());
        let e = hermitian_eig(&m).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (l, x) in e.eigenvalues.iter().zip(expected) {
            assert!((l - x).abs() < 1e-14);
        }
    }

    #[test]
    fn random_hermitian_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2, 4, 8] {
            for _ in 0..100 {
                let h = random_hermitian(&mut rng, dim);
                let e = hermitian_eig(&h).unwrap();
                assert!(e.reconstruct().max_abs_diff(&h) <= 1e-9);
                assert!(orthonormality_error(&e.eigenvectors) <= 1e-9);
                assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
                let only = hermitian_eigenvalues(&h).unwrap();
                for (a, b) in only.iter().zip(&e.eigenvalues) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn degenerate_and_complex_inputs() {
        // Hadamard-like rotation of a degenerate spectrum.
        let y = pauli::y();
        let e = hermitian_eig(&y).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let zero = CMatrix::zeros(4);
        let e = hermitian_eig(&zero).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            hermitian_eig(&m),
            Err(QmathError::NonHermitian { .. })
        ));
    }
}
