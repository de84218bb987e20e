//! Seeded random matrices and states shared by unit tests.

use rand::Rng;

use crate::qmath::{CMatrix, DensityMatrix, C64};

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    random_matrix(rng, dim).hermitian_part()
}

pub fn random_ket<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Random state of the given rank built as `G G^dagger / Tr`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let mut m = CMatrix::zeros(dim);
    for _ in 0..rank {
        let psi = random_ket(rng, dim);
        let w: f64 = rng.gen_range(0.1..1.0);
        m = &m + &CMatrix::outer(&psi).scale(w);
    }
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr)).expect("valid random state")
}

/// Haar-ish random unitary via Gram-Schmidt on a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    CMatrix::from_fn(dim, |i, j| cols[j][i])
}
