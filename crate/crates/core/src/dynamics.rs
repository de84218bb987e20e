//! Exact reduced dynamics of two coupled qubits, each attached to its own
//! collective spin-1/2 bath, with an Ising coupling between the baths.
//!
//! Every bath operator in the Hamiltonian is diagonal in the collective
//! `|j, m>` basis, so for fixed bath magnetisations `(m1, m2)` the qubits
//! evolve under a closed 4x4 unitary. The reduced state is the thermal
//! mixture of those sector evolutions.

use serde::{Deserialize, Serialize};

use crate::qmath::{CMatrix, DensityMatrix, QmathError, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("invalid quantum numbers N = {n}, 2j = {two_j}")]
    InvalidQuantumNumber { n: u32, two_j: i64 },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("partition function overflows f64 (log Z = {log_z})")]
    Overflow { log_z: f64 },
    #[error("time grid is not strictly ascending at index {index}")]
    NonAscendingGrid { index: usize },
    #[error("negative evolution time {0}")]
    NegativeTime(f64),
    #[error("invalid X state: {0}")]
    InvalidXState(String),
    #[error(transparent)]
    Qmath(#[from] QmathError),
}

/// A half-integer stored as twice its value (`HalfInt(3)` is 3/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

/// Hamiltonian and bath constants. Rates in ps^-1, `beta_t` in ps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub q: f64,
    #[serde(rename = "beta_T")]
    pub beta_t: f64,
    #[serde(rename = "N1")]
    pub n1: u32,
    #[serde(rename = "N2")]
    pub n2: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            j1: 9.0,
            j2: 11.0,
            omega1: 5.0,
            omega2: 6.0,
            alpha1: 250.0,
            alpha2: 200.0,
            gamma1: 0.2,
            gamma2: 0.3,
            q: 30.0,
            beta_t: 1.0 / 77.0,
            n1: 14,
            n2: 12,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.n1 < 1 || self.n2 < 1 {
            return Err(DynamicsError::InvalidParams("bath sizes must be >= 1".into()));
        }
        if !(self.beta_t > 0.0) {
            return Err(DynamicsError::InvalidParams("beta_T must be positive".into()));
        }
        let all = [
            self.j1, self.j2, self.omega1, self.omega2, self.alpha1, self.alpha2, self.gamma1,
            self.gamma2, self.q, self.beta_t,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::InvalidParams("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// Two-qubit X state in the `|00>, |01>, |10>, |11>` basis.
///
/// `delta` couples `|00>` and `|11>`; `beta_c` couples `|01>` and `|10>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "XStateRecord", into = "XStateRecord")]
pub struct XState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub delta: C64,
    pub beta_c: C64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct XStateRecord {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    #[serde(default)]
    re_delta: f64,
    #[serde(default)]
    im_delta: f64,
    #[serde(default)]
    re_beta: f64,
    #[serde(default)]
    im_beta: f64,
}

impl From<XStateRecord> for XState {
    fn from(r: XStateRecord) -> Self {
        Self {
            a: r.a,
            b: r.b,
            c: r.c,
            d: r.d,
            delta: C64::new(r.re_delta, r.im_delta),
            beta_c: C64::new(r.re_beta, r.im_beta),
        }
    }
}

impl From<XState> for XStateRecord {
    fn from(x: XState) -> Self {
        Self {
            a: x.a,
            b: x.b,
            c: x.c,
            d: x.d,
            re_delta: x.delta.re,
            im_delta: x.delta.im,
            re_beta: x.beta_c.re,
            im_beta: x.beta_c.im,
        }
    }
}

const XSTATE_TOL: f64 = 1e-10;

impl XState {
    pub fn new(a: f64, b: f64, c: f64, d: f64, delta: C64, beta_c: C64) -> Result<Self, DynamicsError> {
        let x = Self {
            a,
            b,
            c,
            d,
            delta,
            beta_c,
        };
        x.validate()?;
        Ok(x)
    }

    /// The state `a = delta = 0, b = 0.4, c = 0.5, beta_c = 0.4, d = 0.1`.
    pub fn freezing_example() -> Self {
        Self {
            a: 0.0,
            b: 0.4,
            c: 0.5,
            d: 0.1,
            delta: C64::new(0.0, 0.0),
            beta_c: C64::new(0.4, 0.0),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let pops = [self.a, self.b, self.c, self.d];
        if pops.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(DynamicsError::InvalidXState("negative population".into()));
        }
        if (pops.iter().sum::<f64>() - 1.0).abs() > XSTATE_TOL {
            return Err(DynamicsError::InvalidXState("populations do not sum to 1".into()));
        }
        if self.delta.norm_sqr() > self.a * self.d + 1e-12 {
            return Err(DynamicsError::InvalidXState("|delta|^2 > a d".into()));
        }
        if self.beta_c.norm_sqr() > self.b * self.c + 1e-12 {
            return Err(DynamicsError::InvalidXState("|beta_c|^2 > b c".into()));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let r = |v: f64| C64::new(v, 0.0);
        CMatrix::from_vec(vec![
            r(self.a), z, z, self.delta,
            z, r(self.b), self.beta_c, z,
            z, self.beta_c.conj(), r(self.c), z,
            self.delta.conj(), z, z, r(self.d),
        ])
        .expect("16 entries")
    }

    pub fn to_density(&self) -> Result<DensityMatrix, DynamicsError> {
        self.validate()?;
        Ok(DensityMatrix::new(self.to_matrix())?)
    }

    /// Largest modulus among the entries that vanish for an X state.
    pub fn off_pattern_max(m: &CMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Reads an X state back from a 4x4 matrix, rejecting entries off the X pattern.
    pub fn from_matrix(m: &CMatrix, tol: f64) -> Result<Self, DynamicsError> {
        if m.dim() != 4 {
            return Err(DynamicsError::InvalidXState(format!("dimension {}", m.dim())));
        }
        let off = Self::off_pattern_max(m);
        if off > tol {
            return Err(DynamicsError::InvalidXState(format!("off-pattern entry {off:e}")));
        }
        Ok(Self {
            a: m[(0, 0)].re,
            b: m[(1, 1)].re,
            c: m[(2, 2)].re,
            d: m[(3, 3)].re,
            delta: m[(0, 3)],
            beta_c: m[(1, 2)],
        })
    }
}

fn binomial(n: u32, k: i64) -> u128 {
    if k < 0 || k > n as i64 {
        return 0;
    }
    let k = (k as u32).min(n - k as u32);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c * (n - k + i) as u128 / i as u128;
    }
    c
}

/// Multiplicity of spin-`j` multiplets among `n` spin-1/2 particles,
/// `C(n, n/2 - j) - C(n, n/2 - j - 1)`.
pub fn degeneracy(n: u32, j: HalfInt) -> Result<u128, DynamicsError> {
    let two_j = j.twice();
    if two_j < 0 || two_j > n as i64 || (n as i64 - two_j) % 2 != 0 {
        return Err(DynamicsError::InvalidQuantumNumber { n, two_j });
    }
    let k = (n as i64 - two_j) / 2;
    Ok(binomial(n, k) - binomial(n, k - 1))
}

/// Allowed `j` values for `n` spins, ascending.
pub fn spin_values(n: u32) -> impl Iterator<Item = HalfInt> {
    ((n % 2) as i64..=n as i64).step_by(2).map(HalfInt)
}

/// Allowed `m` values for a bath of `n` spins, ascending.
pub fn magnetizations(n: u32) -> impl Iterator<Item = HalfInt> {
    (-(n as i64)..=n as i64).step_by(2).map(HalfInt)
}

fn boltzmann_exponent(p: &ModelParams, m1: HalfInt, m2: HalfInt) -> f64 {
    let (m1, m2) = (m1.value(), m2.value());
    -p.beta_t * (p.q * m1 * m2 + p.alpha1 * m1 + p.alpha2 * m2)
}

/// Unnormalised weight `nu(N1, j1) nu(N2, j2) exp(-beta (q m1 m2 + alpha1 m1 + alpha2 m2))`.
pub fn sector_weight(
    params: &ModelParams,
    m1: HalfInt,
    m2: HalfInt,
    j1: HalfInt,
    j2: HalfInt,
) -> Result<f64, DynamicsError> {
    if m1.twice().abs() > j1.twice() || (j1.twice() - m1.twice()) % 2 != 0 {
        return Err(DynamicsError::InvalidQuantumNumber {
            n: params.n1,
            two_j: j1.twice(),
        });
    }
    if m2.twice().abs() > j2.twice() || (j2.twice() - m2.twice()) % 2 != 0 {
        return Err(DynamicsError::InvalidQuantumNumber {
            n: params.n2,
            two_j: j2.twice(),
        });
    }
    let nu = degeneracy(params.n1, j1)? as f64 * degeneracy(params.n2, j2)? as f64;
    Ok(nu * boltzmann_exponent(params, m1, m2).exp())
}

/// Thermal probability of the bath magnetisations `(m1, m2)`, with the sum
/// over `j` folded into `sum_{j >= |m|} nu(N, j) = C(N, N/2 - |m|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetizationSector {
    pub m1: HalfInt,
    pub m2: HalfInt,
    pub probability: f64,
}

fn log_sector_weights(params: &ModelParams) -> Vec<(HalfInt, HalfInt, f64)> {
    let mut out = Vec::new();
    for m1 in magnetizations(params.n1) {
        let g1 = binomial(params.n1, (params.n1 as i64 - m1.twice().abs()) / 2) as f64;
        for m2 in magnetizations(params.n2) {
            let g2 = binomial(params.n2, (params.n2 as i64 - m2.twice().abs()) / 2) as f64;
            out.push((m1, m2, g1.ln() + g2.ln() + boltzmann_exponent(params, m1, m2)));
        }
    }
    out
}

/// `ln Z`, computed with log-sum-exp.
pub fn log_partition_function(params: &ModelParams) -> Result<f64, DynamicsError> {
    params.validate()?;
    let logs = log_sector_weights(params);
    let max = logs.iter().map(|l| l.2).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l.2 - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Bath partition function `Z`; errors if it is not representable.
pub fn partition_function(params: &ModelParams) -> Result<f64, DynamicsError> {
    let log_z = log_partition_function(params)?;
    let z = log_z.exp();
    if !z.is_finite() || z == 0.0 {
        return Err(DynamicsError::Overflow { log_z });
    }
    Ok(z)
}

/// All magnetisation sectors with their normalised thermal probabilities.
pub fn magnetization_sectors(params: &ModelParams) -> Result<Vec<MagnetizationSector>, DynamicsError> {
    let log_z = log_partition_function(params)?;
    Ok(log_sector_weights(params)
        .into_iter()
        .map(|(m1, m2, lw)| MagnetizationSector {
            m1,
            m2,
            probability: (lw - log_z).exp(),
        })
        .collect())
}

/// Closed 4x4 propagator of the qubits for fixed bath magnetisations.
#[derive(Debug, Clone)]
pub struct SectorPropagator {
    pub m1: HalfInt,
    pub m2: HalfInt,
    pub unitary: CMatrix,
    /// Normalised thermal probability of the sector.
    pub weight: f64,
}

const DEGENERATE_BLOCK: f64 = 1e-14;

/// `exp(-i H_eff t)` for fixed `(m1, m2)`.
///
/// With `Q = omega1 + gamma1 m1 - omega2 - gamma2 m2` and
/// `r = sqrt(Q^2 + 4 J1^2)` the energies are `E1 = omega1 + gamma1 m1 +
/// omega2 + gamma2 m2 + J2`, `E2,3 = -J2 +- r`, `E4 = -E1 + 2 J2`.
pub fn sector_unitary(params: &ModelParams, m1: HalfInt, m2: HalfInt, t: f64) -> CMatrix {
    let w1 = params.omega1 + params.gamma1 * m1.value();
    let w2 = params.omega2 + params.gamma2 * m2.value();
    let q = w1 - w2;
    let e1 = w1 + w2 + params.j2;
    let e4 = -e1 + 2.0 * params.j2;
    let disc = q * q + 4.0 * params.j1 * params.j1;
    let r = disc.sqrt();
    let e2 = -params.j2 + r;
    let e3 = -params.j2 - r;
    let phase = |e: f64| C64::from_polar(1.0, -e * t);
    let (p2, p3) = (phase(e2), phase(e3));

    let (u11, u12, u22) = if disc.abs() < DEGENERATE_BLOCK {
        (p2, C64::new(0.0, 0.0), p3)
    } else {
        let q1 = q + r;
        let q2 = q - r;
        let den = q1 - q2;
        (
            (p2 * q1 - p3 * q2) / den,
            (p2 - p3) * (2.0 * params.j1) / den,
            (-p2 * q2 + p3 * q1) / den,
        )
    };
    let z = C64::new(0.0, 0.0);
    CMatrix::from_vec(vec![
        phase(e1), z, z, z,
        z, u11, u12, z,
        z, u12, u22, z,
        z, z, z, phase(e4),
    ])
    .expect("16 entries")
}

pub fn sector_propagator(
    params: &ModelParams,
    m1: HalfInt,
    m2: HalfInt,
    t: f64,
) -> Result<SectorPropagator, DynamicsError> {
    if t < 0.0 {
        return Err(DynamicsError::NegativeTime(t));
    }
    let log_z = log_partition_function(params)?;
    let g1 = binomial(params.n1, (params.n1 as i64 - m1.twice().abs()) / 2) as f64;
    let g2 = binomial(params.n2, (params.n2 as i64 - m2.twice().abs()) / 2) as f64;
    let weight = if g1 == 0.0 || g2 == 0.0 {
        0.0
    } else {
        (g1.ln() + g2.ln() + boltzmann_exponent(params, m1, m2) - log_z).exp()
    };
    Ok(SectorPropagator {
        m1,
        m2,
        unitary: sector_unitary(params, m1, m2, t),
        weight,
    })
}

/// Precomputed sector probabilities for repeated evolution of one model.
#[derive(Debug, Clone)]
pub struct Evolver {
    params: ModelParams,
    sectors: Vec<MagnetizationSector>,
}

impl Evolver {
    pub fn new(params: &ModelParams) -> Result<Self, DynamicsError> {
        let sectors = magnetization_sectors(params)?
            .into_iter()
            .filter(|s| s.probability > 0.0)
            .collect();
        Ok(Self {
            params: params.clone(),
            sectors,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `rho(t) = sum_sectors p (U rho0 U^dagger)` for a general 4x4 initial matrix.
    pub fn evolve_matrix(&self, rho0: &CMatrix, t: f64) -> Result<CMatrix, DynamicsError> {
        if t < 0.0 {
            return Err(DynamicsError::NegativeTime(t));
        }
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let mut acc = CMatrix::zeros(4);
        for s in &self.sectors {
            let u = sector_unitary(&self.params, s.m1, s.m2, t);
            acc = &acc + &u.conjugate(rho0).scale(s.probability);
        }
        Ok(acc.hermitian_part())
    }

    pub fn evolve(&self, rho0: &XState, t: f64) -> Result<DensityMatrix, DynamicsError> {
        rho0.validate()?;
        let m = self.evolve_matrix(&rho0.to_matrix(), t)?;
        Ok(DensityMatrix::new(m)?)
    }

    pub fn trajectory(&self, rho0: &XState, t_grid: &[f64]) -> Result<Vec<(f64, DensityMatrix)>, DynamicsError> {
        check_grid(t_grid)?;
        t_grid.iter().map(|&t| Ok((t, self.evolve(rho0, t)?))).collect()
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), DynamicsError> {
    if let Some(&t) = t_grid.iter().find(|&&t| t < 0.0) {
        return Err(DynamicsError::NegativeTime(t));
    }
    if let Some(i) = t_grid.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(DynamicsError::NonAscendingGrid { index: i + 1 });
    }
    Ok(())
}

/// Reduced two-qubit state at time `t` (Schrodinger convention `U rho0 U^dagger`).
pub fn evolve(rho0: &XState, params: &ModelParams, t: f64) -> Result<DensityMatrix, DynamicsError> {
    Evolver::new(params)?.evolve(rho0, t)
}

pub fn trajectory(
    rho0: &XState,
    params: &ModelParams,
    t_grid: &[f64],
) -> Result<Vec<(f64, DensityMatrix)>, DynamicsError> {
    check_grid(t_grid)?;
    Evolver::new(params)?.trajectory(rho0, t_grid)
}

/// `n` points uniformly spaced on `(0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| t_max * k as f64 / n as f64).collect()
}
