//! Correlation quantifiers for two-qubit states: concurrence, geometric
//! discords (Hilbert-Schmidt, Hellinger, Bures), interferometric power and
//! Renyi-entropy discord, plus the von Neumann discord used as a reference.
//!
//! Every discord is minimised over rank-one projective measurements on qubit A.

mod geometric;
mod qfi;
mod renyi;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::optimize::{multistart, ObjectiveSpec, OptimizeError};
use crate::qmath::{kron, pauli, CMatrix, DensityMatrix, QmathError, C64};

pub use geometric::{
    cq_search_spec, discord_bures, discord_direct, discord_hellinger, discord_hs, GeometricKind,
};
pub use qfi::{interferometric_power, qfi};
pub use renyi::{measurement_dilation, renyi_cmi, renyi_discord, vn_cmi, vn_discord, RenyiProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasuresError {
    #[error("alpha = {0} outside (0, 1) U (1, 2]")]
    AlphaOutOfRange(f64),
    #[error("expected a {expected}-dimensional state, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error(transparent)]
    Qmath(#[from] QmathError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
}

/// Von Neumann measurement on qubit A with
/// `|0'> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>` and
/// `|1'> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub theta: f64,
    pub phi: f64,
}

impl Measurement {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn kets(&self) -> [[C64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = C64::from_polar(1.0, self.phi);
        [[C64::new(c, 0.0), e * s], [C64::new(s, 0.0), -e * c]]
    }

    /// `|i'><i'|` for `i = 0, 1`.
    pub fn projectors(&self) -> [CMatrix; 2] {
        let [k0, k1] = self.kets();
        [CMatrix::outer(&k0), CMatrix::outer(&k1)]
    }

    /// Bloch vector of `|0'>`.
    pub fn bloch(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Parameters of a classical-quantum state
/// `p |0'><0'| (x) w(bloch0) + (1 - p) |1'><1'| (x) w(bloch1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CQStateParams {
    pub basis: Measurement,
    pub p: f64,
    pub bloch0: [f64; 3],
    pub bloch1: [f64; 3],
}

fn clamp_ball(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if r > 1.0 {
        [v[0] / r, v[1] / r, v[2] / r]
    } else {
        v
    }
}

/// `(I + r . sigma) / 2`.
pub fn qubit_state(bloch: [f64; 3]) -> CMatrix {
    (&CMatrix::identity(2) + &pauli::dot(bloch)).scale(0.5)
}

impl CQStateParams {
    /// Reads `[theta, phi, p, bloch0.., bloch1..]`, clamping `p` to `[0, 1]`
    /// and Bloch vectors into the unit ball.
    pub fn from_vector(x: &[f64]) -> Self {
        assert_eq!(x.len(), 9, "CQ parameter vector has 9 entries");
        Self {
            basis: Measurement::new(x[0], x[1]),
            p: x[2].clamp(0.0, 1.0),
            bloch0: clamp_ball([x[3], x[4], x[5]]),
            bloch1: clamp_ball([x[6], x[7], x[8]]),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = vec![self.basis.theta, self.basis.phi, self.p];
        v.extend_from_slice(&self.bloch0);
        v.extend_from_slice(&self.bloch1);
        v
    }

    pub fn to_matrix(&self) -> CMatrix {
        let [p0, p1] = self.basis.projectors();
        let w0 = qubit_state(clamp_ball(self.bloch0));
        let w1 = qubit_state(clamp_ball(self.bloch1));
        let p = self.p.clamp(0.0, 1.0);
        &kron(&p0, &w0).scale(p) + &kron(&p1, &w1).scale(1.0 - p)
    }

    pub fn to_density(&self) -> Result<DensityMatrix, QmathError> {
        DensityMatrix::new(self.to_matrix())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// Range searched for the measurement direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AngleDomain {
    /// `theta in [0, pi/2]`, `phi in [0, pi]`; enough for X states.
    #[default]
    Half,
    /// `theta in [0, pi]`, `phi in [0, 2 pi]`.
    Full,
}

impl AngleDomain {
    pub fn bounds(self) -> [(f64, f64); 2] {
        match self {
            Self::Half => [(0.0, PI / 2.0), (0.0, PI)],
            Self::Full => [(0.0, PI), (0.0, 2.0 * PI)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub domain: AngleDomain,
    pub grid_points: usize,
    pub n_starts: usize,
    pub tolerance: f64,
    pub max_evals: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    /// 33x33 seed grid and 20 polished starts.
    pub fn geometric() -> Self {
        Self {
            domain: AngleDomain::Half,
            grid_points: 33,
            n_starts: 20,
            tolerance: 1e-9,
            max_evals: 2000,
            seed: 0,
        }
    }

    /// 33x33 seed grid and a single polish of the grid minimum.
    pub fn renyi() -> Self {
        Self {
            n_starts: 1,
            ..Self::geometric()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_domain(mut self, domain: AngleDomain) -> Self {
        self.domain = domain;
        self
    }

    pub(crate) fn angle_spec(&self) -> ObjectiveSpec {
        ObjectiveSpec::new(self.domain.bounds().to_vec())
            .with_tolerance(self.tolerance)
            .with_max_evals(self.max_evals)
            .with_seed(self.seed)
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::geometric()
    }
}

/// Below this polar angle the azimuth is meaningless and reported as 0.
const POLAR_SNAP: f64 = 1e-4;

/// Minimises `f(theta, phi)` over the configured measurement domain.
pub(crate) fn minimize_angles<F>(mut f: F, cfg: &OptimizerConfig) -> Result<MeasureResult, MeasuresError>
where
    F: FnMut(f64, f64) -> f64,
{
    let spec = cfg.angle_spec();
    let best = multistart(|x: &[f64]| f(x[0], x[1]), &spec, cfg.n_starts, cfg.grid_points)?;
    let mut argmin = best.x;
    if argmin[0] < POLAR_SNAP {
        argmin[1] = 0.0;
    }
    Ok(MeasureResult {
        value: best.value,
        argmin,
        evaluations: best.evaluations,
        converged: best.converged,
    })
}

pub(crate) fn check_two_qubit(rho: &DensityMatrix) -> Result<(), MeasuresError> {
    if rho.dim() != 4 {
        return Err(MeasuresError::WrongDimension {
            expected: 4,
            found: rho.dim(),
        });
    }
    Ok(())
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)` from the square-rooted
/// eigenvalues of `sqrt(rho) rho~ sqrt(rho)`, `rho~ = (Y (x) Y) rho* (Y (x) Y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64, MeasuresError> {
    check_two_qubit(rho)?;
    let yy = kron(&pauli::y(), &pauli::y());
    let flipped = yy.matmul(&rho.matrix().conj()).matmul(&yy);
    let root = crate::qmath::matrix_sqrt_psd(rho.matrix());
    let r = root.matmul(&flipped).matmul(&root).hermitian_part();
    let mut l: Vec<f64> = crate::qmath::hermitian_eigenvalues(&r)?
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Per-item seed derived from a base seed and a batch index.
pub fn item_seed(base: u64, index: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = base.wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which quantities [`evaluate_batch`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    Concurrence,
    Hs,
    Hellinger,
    Bures,
    InterferometricPower,
    Renyi2,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::Concurrence,
        MeasureKind::Hs,
        MeasureKind::Hellinger,
        MeasureKind::Bures,
        MeasureKind::InterferometricPower,
        MeasureKind::Renyi2,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Self::Concurrence => "concurrence",
            Self::Hs => "dhs",
            Self::Hellinger => "dhl",
            Self::Bures => "dbr",
            Self::InterferometricPower => "ip",
            Self::Renyi2 => "red2",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.column() == name)
    }
}

/// Evaluates one measure on one state with the default optimiser settings.
pub fn evaluate(kind: MeasureKind, rho: &DensityMatrix, seed: u64) -> Result<MeasureResult, MeasuresError> {
    let geo = OptimizerConfig::geometric().with_seed(seed);
    match kind {
        MeasureKind::Concurrence => Ok(MeasureResult {
            value: concurrence(rho)?,
            argmin: Vec::new(),
            evaluations: 1,
            converged: true,
        }),
        MeasureKind::Hs => discord_hs(rho, &geo),
        MeasureKind::Hellinger => discord_hellinger(rho, &geo),
        MeasureKind::Bures => discord_bures(rho, &geo),
        MeasureKind::InterferometricPower => interferometric_power(rho, &geo),
        MeasureKind::Renyi2 => renyi_discord(rho, 2.0, &OptimizerConfig::renyi().with_seed(seed)),
    }
}

/// Evaluates `kinds` on every state in parallel. Row `i` uses
/// `item_seed(base_seed, i)`, so results do not depend on scheduling.
pub fn evaluate_batch(
    states: &[DensityMatrix],
    kinds: &[MeasureKind],
    base_seed: u64,
) -> Result<Vec<Vec<MeasureResult>>, MeasuresError> {
    crate::parallel::par_map(states, |i, rho| {
        let seed = item_seed(base_seed, i);
        kinds.iter().map(|&k| evaluate(k, rho, seed)).collect::<Result<Vec<_>, _>>()
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::dynamics::XState;

    pub fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        DensityMatrix::pure(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap()
    }

    pub fn basis_state(k: usize) -> DensityMatrix {
        let mut v = vec![C64::new(0.0, 0.0); 4];
        v[k] = C64::new(1.0, 0.0);
        DensityMatrix::pure(&v).unwrap()
    }

    pub fn werner(p: f64) -> DensityMatrix {
        let m = &bell().matrix().scale(p) + &CMatrix::identity(4).scale((1.0 - p) / 4.0);
        DensityMatrix::new(m).unwrap()
    }

    pub fn freezing() -> DensityMatrix {
        XState::freezing_example().to_density().unwrap()
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap()
    }

    pub fn local_unitary(rho: &DensityMatrix, ua: &CMatrix, ub: &CMatrix) -> DensityMatrix {
        DensityMatrix::new(kron(ua, ub).conjugate(rho.matrix()).hermitian_part()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::testutil::{random_density, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn measurement_projectors_resolve_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = Measurement::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
            let [p0, p1] = m.projectors();
            assert!((&p0 + &p1).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
            assert!(p0.matmul(&p0).max_abs_diff(&p0) < 1e-12);
            assert!(p1.matmul(&p1).max_abs_diff(&p1) < 1e-12);
            let n = pauli::dot(m.bloch());
            let expected = (&CMatrix::identity(2) + &n).scale(0.5);
            assert!(p0.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn cq_params_build_valid_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let x: Vec<f64> = (0..9)
                .map(|k| match k {
                    0 => rng.gen_range(0.0..PI),
                    1 => rng.gen_range(0.0..2.0 * PI),
                    2 => rng.gen_range(0.0..1.0),
                    _ => rng.gen_range(-1.0..1.0),
                })
                .collect();
            let cq = CQStateParams::from_vector(&x);
            assert!(cq.to_density().is_ok());
            assert_eq!(CQStateParams::from_vector(&cq.to_vector()), cq);
        }
    }

    #[test]
    fn concurrence_reference_values() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-10);
        assert!(concurrence(&basis_state(0)).unwrap().abs() < 1e-10);
        for p in [0.2, 0.5, 0.8, 1.0] {
            let expected = ((3.0 * p - 1.0) / 2.0f64).max(0.0);
            assert!((concurrence(&werner(p)).unwrap() - expected).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn concurrence_of_x_states_matches_closed_form() {
        let rho = freezing();
        let m = rho.matrix();
        let (a, b, c, d) = (m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re);
        let expected = 2.0 * (m[(0, 3)].norm() - (b * c).sqrt()).max(m[(1, 2)].norm() - (a * d).sqrt()).max(0.0);
        assert!((concurrence(&rho).unwrap() - expected).abs() < 1e-8);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 4, 2);
            let ua = random_unitary(&mut rng, 2);
            let ub = random_unitary(&mut rng, 2);
            let rotated = local_unitary(&rho, &ua, &ub);
            assert!((concurrence(&rho).unwrap() - concurrence(&rotated).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(concurrence(&rho), Err(MeasuresError::WrongDimension { .. })));
    }

    #[test]
    fn item_seeds_differ_and_repeat() {
        assert_eq!(item_seed(7, 3), item_seed(7, 3));
        assert_ne!(item_seed(7, 3), item_seed(7, 4));
        assert_ne!(item_seed(7, 3), item_seed(8, 3));
    }
}
