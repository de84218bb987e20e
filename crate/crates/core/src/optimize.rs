//! Derivative-free box-constrained minimisation: lattice search, Nelder-Mead
//! and a deterministic multistart driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("grid of {needed} points exceeds the evaluation budget of {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("invalid objective spec: {0}")]
    InvalidSpec(String),
}

/// Box, stopping rule and seed of one minimisation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub bounds: Vec<(f64, f64)>,
    /// Nelder-Mead stops once the simplex diameter falls below this.
    pub tolerance: f64,
    /// Evaluation budget for one lattice search or one simplex run.
    pub max_evals: usize,
    pub seed: u64,
}

impl ObjectiveSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds,
            tolerance: 1e-9,
            max_evals: 2000,
            seed: 0,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.bounds.is_empty() {
            return Err(OptimizeError::InvalidSpec("zero-dimensional problem".into()));
        }
        if let Some((i, _)) = self.bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(OptimizeError::InvalidSpec(format!("bound {i} has lo >= hi")));
        }
        if !(self.tolerance > 0.0) {
            return Err(OptimizeError::InvalidSpec("tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (xi, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *xi = xi.clamp(lo, hi);
        }
    }
}

/// Best point found by a search.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Evaluates `f` on the full `points_per_dim^d` lattice spanning the box
/// (endpoints included) and returns the first lattice argmin.
pub fn grid_search<F>(mut f: F, spec: &ObjectiveSpec, points_per_dim: usize) -> Result<Optimum, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    spec.validate()?;
    let d = spec.dimension();
    let needed = points_per_dim
        .checked_pow(d as u32)
        .filter(|_| points_per_dim >= 1)
        .unwrap_or(usize::MAX);
    if needed > spec.max_evals {
        return Err(OptimizeError::BudgetExceeded {
            needed,
            budget: spec.max_evals,
        });
    }
    let axis = |k: usize, i: usize| -> f64 {
        let (lo, hi) = spec.bounds[k];
        if points_per_dim == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (points_per_dim - 1) as f64
        }
    };
    let mut idx = vec![0usize; d];
    let mut x: Vec<f64> = (0..d).map(|k| axis(k, 0)).collect();
    let mut best = Optimum {
        x: x.clone(),
        value: f64::INFINITY,
        evaluations: 0,
        converged: true,
    };
    for _ in 0..needed {
        let v = f(&x);
        best.evaluations += 1;
        if best.evaluations == 1 || v < best.value {
            best.value = v;
            best.x.copy_from_slice(&x);
        }
        // Odometer increment, last coordinate fastest.
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < points_per_dim {
                x[k] = axis(k, idx[k]);
                break;
            }
            idx[k] = 0;
            x[k] = axis(k, 0);
        }
    }
    Ok(best)
}

/// Nelder-Mead simplex search (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Vertices are clamped into the box before evaluation.
pub fn nelder_mead<F>(mut f: F, spec: &ObjectiveSpec, x0: &[f64]) -> Optimum
where
    F: FnMut(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = spec.dimension();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut start = x0.to_vec();
    spec.clamp(&mut start);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&start, &mut evals);
    simplex.push((start.clone(), f0));
    for k in 0..n {
        let (lo, hi) = spec.bounds[k];
        let step = 0.05 * (hi - lo);
        let mut v = start.clone();
        v[k] = if v[k] + step <= hi { v[k] + step } else { v[k] - step };
        spec.clamp(&mut v);
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < spec.tolerance {
            converged = true;
            break;
        }
        if evals >= spec.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            let worst = &simplex[n].0;
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            spec.clamp(&mut p);
            p
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(REFLECT * CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (v, fv) in simplex.iter_mut().skip(1) {
            for (vi, a) in v.iter_mut().zip(&anchor) {
                *vi = a + SHRINK * (*vi - a);
            }
            spec.clamp(v);
            *fv = eval(v, &mut evals);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Optimum {
        x,
        value,
        evaluations: evals,
        converged,
    }
}

/// Lattice seed plus `n_starts - 1` seeded uniform random starts, each
/// polished with [`nelder_mead`]. Ties resolve to the lowest start index.
pub fn multistart<F>(
    mut f: F,
    spec: &ObjectiveSpec,
    n_starts: usize,
    points_per_dim: usize,
) -> Result<Optimum, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    let seed = grid_search(&mut f, spec, points_per_dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut starts = vec![seed.x.clone()];
    for _ in 1..n_starts.max(1) {
        starts.push(spec.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
    }

    let mut best: Option<Optimum> = None;
    let mut evaluations = seed.evaluations;
    for x0 in &starts {
        let run = nelder_mead(&mut f, spec, x0);
        evaluations += run.evaluations;
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one start");
    best.evaluations = evaluations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn grid_finds_origin_of_bowl() {
        let spec = ObjectiveSpec::new(vec![(-1.0, 1.0); 2]);
        let r = grid_search(sphere, &spec, 33).unwrap();
        assert_eq!(r.evaluations, 33 * 33);
        assert!(r.x.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn grid_constant_returns_first_point() {
        let spec = ObjectiveSpec::new(vec![(-1.0, 1.0), (2.0, 3.0)]);
        let r = grid_search(|_| 4.0, &spec, 5).unwrap();
        assert_eq!(r.x, vec![-1.0, 2.0]);
    }

    #[test]
    fn grid_matches_enumeration() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 3]);
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.8).abs() + (x[2] * 7.0).sin();
        let r = grid_search(f, &spec, 5).unwrap();
        let mut best = (f64::INFINITY, vec![]);
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    let x = vec![i as f64 / 4.0, j as f64 / 4.0, k as f64 / 4.0];
                    let v = f(&x);
                    if v < best.0 {
                        best = (v, x);
                    }
                }
            }
        }
        assert_eq!(r.value, best.0);
        assert_eq!(r.x, best.1);
    }

    #[test]
    fn grid_over_budget_is_rejected() {
        let spec = ObjectiveSpec::new(vec![(0.0, 1.0); 9]).with_max_evals(2000);
        assert!(matches!(
            grid_search(sphere, &spec, 3),
            Err(OptimizeError::BudgetExceeded { needed: 19683, .. })
        ));
    }

    #[test]
    fn nelder_mead_quadratic_bowl() {
        let spec = ObjectiveSpec::new(vec![(-5.0, 5.0); 2]);
        let r = nelder_mead(|x| (x[0] - 0.5).powi(2) + 3.0 * (x[1] + 0.25).powi(2), &spec, &[1.0, 1.0]);
        assert!(r.converged);
        assert!((r.x[0] - 0.5).abs() < 1e-6 && (r.x[1] + 0.25).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let spec = ObjectiveSpec::new(vec![(-5.0, 5.0); 2]).with_tolerance(1e-10);
        let r = nelder_mead(rosenbrock, &spec, &[-1.2, 1.0]);
        assert!(r.value < 1e-8, "f = {}", r.value);
        assert!(r.evaluations <= 2000);
    }

    #[test]
    fn nelder_mead_from_optimum_stays() {
        let spec = ObjectiveSpec::new(vec![(-1.0, 1.0); 2]);
        let r = nelder_mead(sphere, &spec, &[0.0, 0.0]);
        assert!(r.converged);
        assert_eq!(r.value, 0.0);
        assert!(r.evaluations < 300);
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let spec = ObjectiveSpec::new(vec![(1.0, 2.0); 2]);
        let r = nelder_mead(sphere, &spec, &[1.5, 1.9]);
        assert!((r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 1.0).abs() < 1e-9);
        assert!(r.x.iter().all(|v| (1.0..=2.0).contains(v)));
    }

    #[test]
    fn multistart_finds_global_minimum_of_multimodal_function() {
        let f = |x: &[f64]| (5.0 * x[0]).sin() + x[0] * x[0];
        // Dense oracle on a 1e-5 lattice.
        let mut oracle = f64::INFINITY;
        let mut t = -2.0;
        while t <= 2.0 {
            oracle = oracle.min(f(&[t]));
            t += 1e-5;
        }
        let spec = ObjectiveSpec::new(vec![(-2.0, 2.0)]).with_seed(42);
        // A coarse lattice so the seed alone lands in the wrong basin.
        let r = multistart(f, &spec, 20, 3).unwrap();
        assert!(r.value <= oracle + 1e-9, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn single_start_equals_grid_plus_polish() {
        let f = |x: &[f64]| (x[0] - 0.1).powi(2) + (x[1] + 0.2).powi(2);
        let spec = ObjectiveSpec::new(vec![(-1.0, 1.0); 2]).with_seed(3);
        let ms = multistart(f, &spec, 1, 9).unwrap();
        let g = grid_search(f, &spec, 9).unwrap();
        let nm = nelder_mead(f, &spec, &g.x);
        assert_eq!(ms.x, nm.x);
        assert_eq!(ms.value, nm.value);
        assert_eq!(ms.evaluations, g.evaluations + nm.evaluations);
    }

    #[test]
    fn multistart_is_deterministic_and_below_grid_seed() {
        let f = |x: &[f64]| (3.0 * x[0]).cos() * (2.0 * x[1]).sin() + 0.1 * x[0];
        let spec = ObjectiveSpec::new(vec![(-3.0, 3.0); 2]).with_seed(9);
        let a = multistart(f, &spec, 20, 11).unwrap();
        let b = multistart(f, &spec, 20, 11).unwrap();
        assert_eq!(a, b);
        let g = grid_search(f, &spec, 11).unwrap();
        assert!(a.value <= g.value);
    }

    #[test]
    fn invalid_spec_is_reported() {
        let spec = ObjectiveSpec::new(vec![(1.0, 1.0)]);
        assert!(matches!(grid_search(sphere, &spec, 3), Err(OptimizeError::InvalidSpec(_))));
    }
}
