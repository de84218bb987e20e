//! Renyi-entropy discord from the conditional mutual information
//! `I_alpha(E; B | X)` of the measurement dilation, and its von Neumann limit.
//!
//! Subsystem order of the dilated state is `X (x) E (x) B`, with basis index
//! `4 x + 2 e + b`.

use super::{check_two_qubit, minimize_angles, MeasureResult, MeasuresError, Measurement, OptimizerConfig};
use crate::qmath::{
    hermitian_eigenvalues, kron, matrix_power_on_support, partial_trace, von_neumann_entropy, CMatrix, DensityMatrix, C64,
    SUPPORT_CUTOFF,
};

const NEGATIVE_SLACK: f64 = 1e-8;

fn check_alpha(alpha: f64) -> Result<(), MeasuresError> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(MeasuresError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

fn clamp_small_negative(v: f64) -> f64 {
    if (-NEGATIVE_SLACK..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `tau = (V (x) I_B) rho (V (x) I_B)^dagger` with `V = sum_x |x>_X |x>_E <x'|_A`.
pub fn measurement_dilation(rho: &DensityMatrix, m: &Measurement) -> Result<DensityMatrix, MeasuresError> {
    check_two_qubit(rho)?;
    let kets = m.kets();
    // Nonzero entries of the 8x4 isometry: row 4x + 2x + b, column 2a + b.
    let iso = |row: usize, col: usize| -> C64 {
        let (x, e, b) = (row / 4, (row / 2) % 2, row % 2);
        let (a, bb) = (col / 2, col % 2);
        if x != e || b != bb {
            C64::new(0.0, 0.0)
        } else {
            kets[x][a].conj()
        }
    };
    let r = rho.matrix();
    let tau = CMatrix::from_fn(8, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..4 {
            let wik = iso(i, k);
            if wik.norm_sqr() == 0.0 {
                continue;
            }
            for l in 0..4 {
                acc += wik * r[(k, l)] * iso(j, l).conj();
            }
        }
        acc
    });
    Ok(DensityMatrix::new(tau.hermitian_part())?)
}

fn trace_power(m: &CMatrix, p: f64) -> Result<f64, MeasuresError> {
    Ok(hermitian_eigenvalues(&m.hermitian_part())?
        .into_iter()
        .filter(|&l| l > SUPPORT_CUTOFF)
        .map(|l| l.powf(p))
        .sum())
}

/// Renyi conditional mutual information `I_alpha(E; B | X)` in bits:
/// `alpha/(alpha-1) log2 Tr[(rho_X^{(a-1)/2} Tr_E{rho_EX^{(1-a)/2} tau^a rho_EX^{(1-a)/2}} rho_X^{(a-1)/2})^{1/a}]`.
pub fn renyi_cmi(tau: &DensityMatrix, alpha: f64) -> Result<f64, MeasuresError> {
    check_alpha(alpha)?;
    if tau.dim() != 8 {
        return Err(MeasuresError::WrongDimension {
            expected: 8,
            found: tau.dim(),
        });
    }
    let t = tau.matrix();
    let dims = [2, 2, 2];
    let rho_ex = partial_trace(t, &dims, &[0, 1])?;
    let rho_x = partial_trace(t, &dims, &[0])?;
    let id2 = CMatrix::identity(2);
    let s = (1.0 - alpha) / 2.0;
    let outer = kron(&matrix_power_on_support(&rho_ex, s, SUPPORT_CUTOFF), &id2);
    let tau_a = matrix_power_on_support(t, alpha, SUPPORT_CUTOFF);
    let inner = outer.matmul(&tau_a).matmul(&outer);
    let inner_xb = partial_trace(&inner, &dims, &[0, 2])?;
    let side = kron(&matrix_power_on_support(&rho_x, -s, SUPPORT_CUTOFF), &id2);
    let arg = side.matmul(&inner_xb).matmul(&side);
    let tr = trace_power(&arg, 1.0 / alpha)?;
    Ok(clamp_small_negative(alpha / (alpha - 1.0) * tr.log2()))
}

/// Von Neumann `I(E; B | X) = S(EX) + S(BX) - S(X) - S(EBX)` in bits.
pub fn vn_cmi(tau: &DensityMatrix) -> Result<f64, MeasuresError> {
    let t = tau.matrix();
    let dims = [2, 2, 2];
    let s_ex = von_neumann_entropy(&partial_trace(t, &dims, &[0, 1])?);
    let s_bx = von_neumann_entropy(&partial_trace(t, &dims, &[0, 2])?);
    let s_x = von_neumann_entropy(&partial_trace(t, &dims, &[0])?);
    Ok(s_ex + s_bx - s_x - von_neumann_entropy(t))
}

/// `<k|_A M |k>_A` as a 2x2 operator on B.
fn block(m: &CMatrix, k: &[C64; 2]) -> CMatrix {
    CMatrix::from_fn(2, |b, bp| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..2 {
            for ap in 0..2 {
                acc += k[a].conj() * m[(2 * a + b, 2 * ap + bp)] * k[ap];
            }
        }
        acc
    })
}

fn eig2(m: &CMatrix) -> [f64; 2] {
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Measurement-independent pieces of `I_alpha` for one state.
///
/// Because the dilation is an isometry, `tau^a = V rho^a V^dagger` and
/// `rho_EX^s = V rho_A^s V^dagger`, so the whole expression collapses to
/// `sum_x Tr[(p_x^{a-1} <x'|K|x'>)^{1/a}]` with
/// `K = (rho_A^s (x) I) rho^a (rho_A^s (x) I)` and `p_x = <x'|rho_A|x'>`.
#[derive(Debug, Clone)]
pub struct RenyiProblem {
    alpha: f64,
    k: CMatrix,
    rho_a: CMatrix,
}

impl RenyiProblem {
    pub fn new(rho: &DensityMatrix, alpha: f64) -> Result<Self, MeasuresError> {
        check_alpha(alpha)?;
        check_two_qubit(rho)?;
        let m = rho.matrix();
        let rho_a = partial_trace(m, &[2, 2], &[0])?;
        let s = (1.0 - alpha) / 2.0;
        let side = kron(&matrix_power_on_support(&rho_a, s, SUPPORT_CUTOFF), &CMatrix::identity(2));
        let k = side.matmul(&matrix_power_on_support(m, alpha, SUPPORT_CUTOFF)).matmul(&side).hermitian_part();
        Ok(Self { alpha, k, rho_a })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `I_alpha(E; B | X)` for the dilation of `m`.
    pub fn value(&self, m: &Measurement) -> f64 {
        let a = self.alpha;
        let mut tr = 0.0;
        for k in m.kets() {
            let p = self.rho_a.apply(&k).iter().zip(&k).map(|(v, ki)| ki.conj() * v).sum::<C64>().re;
            if p <= SUPPORT_CUTOFF {
                continue;
            }
            let scale = p.powf(a - 1.0);
            for l in eig2(&block(&self.k, &k)) {
                let l = l * scale;
                if l > SUPPORT_CUTOFF {
                    tr += l.powf(1.0 / a);
                }
            }
        }
        clamp_small_negative(a / (a - 1.0) * tr.log2())
    }
}

/// Renyi discord `min over measurements of I_alpha(E; B | X)`.
pub fn renyi_discord(rho: &DensityMatrix, alpha: f64, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    let problem = RenyiProblem::new(rho, alpha)?;
    minimize_angles(|t, p| problem.value(&Measurement::new(t, p)), cfg)
}

/// Ollivier-Zurek discord `S(A) - S(AB) + min sum_x p_x S(rho_B|x)`.
pub fn vn_discord(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let base = von_neumann_entropy(&partial_trace(m, &[2, 2], &[0])?) - von_neumann_entropy(m);
    let conditional = |t: f64, p: f64| -> f64 {
        Measurement::new(t, p)
            .kets()
            .iter()
            .map(|k| {
                let b = block(m, k);
                let px = b.trace().re;
                if px <= SUPPORT_CUTOFF {
                    0.0
                } else {
                    px * von_neumann_entropy(&b.scale(1.0 / px))
                }
            })
            .sum()
    };
    let mut res = minimize_angles(conditional, cfg)?;
    res.value = (res.value + base).max(0.0);
    Ok(res)
}
