//! Geometric discords: distance from `rho` to the closest classical-quantum state.
//!
//! For a fixed measurement basis the inner minimisation over the CQ weights
//! and conditional states has a closed form for all three distances, so the
//! production path only searches the two measurement angles. The direct
//! search over all nine CQ parameters is kept for cross-checks.

use serde::{Deserialize, Serialize};

use super::{check_two_qubit, minimize_angles, AngleDomain, CQStateParams, MeasureResult, MeasuresError, Measurement, OptimizerConfig};
use crate::optimize::{multistart, ObjectiveSpec};
use crate::qmath::{hermitian_eigenvalues, kron, matrix_sqrt_psd, pauli, sqrt_fidelity_with_root, CMatrix, DensityMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometricKind {
    HilbertSchmidt,
    Hellinger,
    Bures,
}

impl GeometricKind {
    /// Factor between the discord and the minimal squared distance. The
    /// Hilbert-Schmidt and Hellinger discords take half, which keeps both
    /// below the Bures discord.
    pub fn scale(self) -> f64 {
        match self {
            Self::HilbertSchmidt | Self::Hellinger => 0.5,
            Self::Bures => 1.0,
        }
    }
}

/// `<k|_A M |k>_A` as a 2x2 operator on B.
fn block(m: &CMatrix, k: &[C64; 2]) -> [C64; 4] {
    let mut out = [C64::new(0.0, 0.0); 4];
    for b in 0..2 {
        for bp in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for ap in 0..2 {
                    acc += k[a].conj() * m[(2 * a + b, 2 * ap + bp)] * k[ap];
                }
            }
            out[2 * b + bp] = acc;
        }
    }
    out
}

fn norm_sq(b: &[C64; 4]) -> f64 {
    b.iter().map(|z| z.norm_sqr()).sum()
}

/// Sum over the two outcomes of the squared Frobenius norm of the diagonal blocks.
fn dephased_norm_sq(m: &CMatrix, basis: &Measurement) -> f64 {
    basis.kets().iter().map(|k| norm_sq(&block(m, k))).sum()
}

fn hs_value(rho: &CMatrix, rho_norm_sq: f64, basis: &Measurement) -> f64 {
    (rho_norm_sq - dephased_norm_sq(rho, basis)).max(0.0)
}

/// Best affinity with a CQ state in `basis`: by Cauchy-Schwarz the optimal
/// `sqrt(p_i w_i)` is proportional to `<i'|sqrt(rho)|i'>`.
fn hellinger_value(root: &CMatrix, basis: &Measurement) -> f64 {
    2.0 * (1.0 - dephased_norm_sq(root, basis).sqrt().min(1.0))
}

/// Best fidelity with a CQ state whose A-basis has Bloch vector `n`:
/// `F = (1 + l1 + l2 - l3 - l4) / 2` with `l` the descending eigenvalues of
/// `sqrt(rho) (n.sigma (x) I) sqrt(rho)`.
fn bures_value(lk: &[CMatrix; 3], basis: &Measurement) -> f64 {
    let n = basis.bloch();
    let lambda = CMatrix::from_fn(4, |i, j| lk[0][(i, j)] * n[0] + lk[1][(i, j)] * n[1] + lk[2][(i, j)] * n[2]);
    let ev = hermitian_eigenvalues(&lambda).expect("hermitian by construction");
    let f = 0.5 * (1.0 + ev[3] + ev[2] - ev[1] - ev[0]);
    2.0 * (1.0 - f.clamp(0.0, 1.0).sqrt())
}

fn bures_operators(root: &CMatrix) -> [CMatrix; 3] {
    let id = pauli::id();
    [pauli::x(), pauli::y(), pauli::z()].map(|s| root.matmul(&kron(&s, &id)).matmul(root).hermitian_part())
}

fn reduced(rho: &DensityMatrix, kind: GeometricKind, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let mut res = match kind {
        GeometricKind::HilbertSchmidt => {
            let total = m.frobenius_norm_sq();
            minimize_angles(|t, p| hs_value(m, total, &Measurement::new(t, p)), cfg)?
        }
        GeometricKind::Hellinger => {
            let root = matrix_sqrt_psd(m);
            minimize_angles(|t, p| hellinger_value(&root, &Measurement::new(t, p)), cfg)?
        }
        GeometricKind::Bures => {
            let lk = bures_operators(&matrix_sqrt_psd(m));
            minimize_angles(|t, p| bures_value(&lk, &Measurement::new(t, p)), cfg)?
        }
    };
    res.value = (res.value * kind.scale()).clamp(0.0, 2.0);
    Ok(res)
}

/// Hilbert-Schmidt discord `min_chi ||rho - chi||_2^2 / 2`.
pub fn discord_hs(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    reduced(rho, GeometricKind::HilbertSchmidt, cfg)
}

/// Hellinger discord `min_chi (1 - Tr[sqrt(rho) sqrt(chi)])`.
pub fn discord_hellinger(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    reduced(rho, GeometricKind::Hellinger, cfg)
}

/// Bures discord `min_chi 2 (1 - sqrt F(rho, chi))`.
pub fn discord_bures(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    reduced(rho, GeometricKind::Bures, cfg)
}

/// Box for `[theta, phi, p, bloch0, bloch1]`.
pub fn cq_search_spec(domain: AngleDomain) -> ObjectiveSpec {
    let [t, p] = domain.bounds();
    let mut bounds = vec![t, p, (0.0, 1.0)];
    bounds.extend(std::iter::repeat((-1.0, 1.0)).take(6));
    ObjectiveSpec::new(bounds)
}

/// Direct minimisation of the distance over all nine CQ parameters.
pub fn discord_direct(
    rho: &DensityMatrix,
    kind: GeometricKind,
    spec: &ObjectiveSpec,
    n_starts: usize,
    points_per_dim: usize,
) -> Result<MeasureResult, MeasuresError> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let root = matrix_sqrt_psd(m);
    let objective = |x: &[f64]| {
        let chi = CQStateParams::from_vector(x).to_matrix();
        match kind {
            GeometricKind::HilbertSchmidt => (m - &chi).frobenius_norm_sq(),
            GeometricKind::Hellinger => 2.0 * (1.0 - root.trace_product(&matrix_sqrt_psd(&chi)).re.min(1.0)),
            GeometricKind::Bures => 2.0 * (1.0 - sqrt_fidelity_with_root(&root, &chi).min(1.0)),
        }
    };
    let best = multistart(objective, spec, n_starts, points_per_dim)?;
    Ok(MeasureResult {
        value: (best.value * kind.scale()).clamp(0.0, 2.0),
        argmin: CQStateParams::from_vector(&best.x).to_vector(),
        evaluations: best.evaluations,
        converged: best.converged,
    })
}
