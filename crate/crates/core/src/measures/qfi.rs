use super::{check_two_qubit, minimize_angles, MeasureResult, MeasuresError, Measurement, OptimizerConfig};
use crate::qmath::{hermitian_eig, kron, pauli, CMatrix, DensityMatrix, SUPPORT_CUTOFF};

/// Pairwise weights `2 (q_i - q_k)^2 / (q_i + q_k)` and the generator matrix
/// elements in the eigenbasis of `rho`.
struct QfiKernel {
    weights: Vec<f64>,
    /// `<psi_i| sigma_k (x) I |psi_j>` for `k = x, y, z`.
    elements: [CMatrix; 3],
}

impl QfiKernel {
    fn new(rho: &CMatrix) -> Result<Self, MeasuresError> {
        let e = hermitian_eig(rho)?;
        let n = rho.dim();
        let q = &e.eigenvalues;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let s = q[i] + q[k];
                if s > SUPPORT_CUTOFF {
                    weights[i * n + k] = 2.0 * (q[i] - q[k]).powi(2) / s;
                }
            }
        }
        let v = &e.eigenvectors;
        let va = v.adjoint();
        let id = pauli::id();
        let elements = [pauli::x(), pauli::y(), pauli::z()].map(|s| va.matmul(&kron(&s, &id)).matmul(v));
        Ok(Self { weights, elements })
    }

    /// QFI for the generator `(n . sigma / 2) (x) I`.
    fn for_direction(&self, n: [f64; 3]) -> f64 {
        let dim = self.elements[0].dim();
        let mut f = 0.0;
        for i in 0..dim {
            for k in 0..dim {
                let w = self.weights[i * dim + k];
                if w == 0.0 {
                    continue;
                }
                let h = (self.elements[0][(i, k)] * n[0] + self.elements[1][(i, k)] * n[1] + self.elements[2][(i, k)] * n[2]) * 0.5;
                f += w * h.norm_sqr();
            }
        }
        f
    }
}

/// Quantum Fisher information of `rho` for the generator `h (x) I`,
/// normalised so that `F = 4 Var(h)` on pure states.
pub fn qfi(rho: &DensityMatrix, h: &CMatrix) -> Result<f64, MeasuresError> {
    let dim = rho.dim();
    let local = match dim {
        d if d == h.dim() => h.clone(),
        d if d % h.dim() == 0 => kron(h, &CMatrix::identity(d / h.dim())),
        _ => {
            return Err(MeasuresError::WrongDimension {
                expected: h.dim(),
                found: dim,
            })
        }
    };
    let e = hermitian_eig(rho.matrix())?;
    let q = &e.eigenvalues;
    let hv = e.eigenvectors.adjoint().matmul(&local).matmul(&e.eigenvectors);
    let mut f = 0.0;
    for i in 0..dim {
        for k in 0..dim {
            let s = q[i] + q[k];
            if s > SUPPORT_CUTOFF {
                f += 2.0 * (q[i] - q[k]).powi(2) / s * hv[(i, k)].norm_sqr();
            }
        }
    }
    Ok(f)
}

/// Interferometric power: a quarter of the smallest QFI over local
/// generators `n . sigma / 2` on qubit A (spectrum `+-1/2`).
pub fn interferometric_power(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    check_two_qubit(rho)?;
    let kernel = QfiKernel::new(rho.matrix())?;
    let mut res = minimize_angles(|t, p| kernel.for_direction(Measurement::new(t, p).bloch()) / 4.0, cfg)?;
    res.value = res.value.max(0.0);
    Ok(res)
}
