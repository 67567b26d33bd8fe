#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use social_bandits::arms::Catalog;
use social_bandits::estimation::EstimatorState;
use social_bandits::influence::{apply_l, InfluenceGraph};
use social_bandits::Recommendation;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(r: usize, c: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

pub fn uniform_vec(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn stochastic(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut p = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() + 1e-3);
    for i in 0..n {
        let s = p.row(i).sum();
        p.row_mut(i).scale_mut(1.0 / s);
    }
    p
}

pub fn graph(n: usize, rng: &mut impl Rng) -> InfluenceGraph {
    InfluenceGraph::new(stochastic(n, rng), 0.0).unwrap()
}

/// Explicit `L = Aᵀ ⊗ I_d`.
pub fn explicit_l(a: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    a.transpose().kronecker(&DMatrix::<f64>::identity(d, d))
}

pub fn stacked(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// `uᵀLv` through the implicit operator.
pub fn bilinear(u: &DVector<f64>, a: &DMatrix<f64>, v: &Recommendation) -> f64 {
    let d = v.d();
    u.dot(&apply_l(a, v.stacked().as_slice(), d).unwrap())
}

/// Every joint recommendation from a finite catalog, `|B|^n` of them.
pub fn all_joint(items: &[DVector<f64>], n: usize) -> Vec<Recommendation> {
    let m = items.len();
    let d = items[0].len();
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut rows = DMatrix::zeros(n, d);
            for i in 0..n {
                rows.set_row(i, &items[code % m].transpose());
                code /= m;
            }
            Recommendation::new(rows, "brute")
        })
        .collect()
}

pub fn finite_items(catalog: &Catalog) -> &[DVector<f64>] {
    match catalog {
        Catalog::Finite(items) => items,
        Catalog::UnitBall { .. } => panic!("finite catalog expected"),
    }
}

/// An estimator fed a few random rounds.
pub fn trained_estimator(n: usize, d: usize, catalog: &Catalog, rounds: usize, rng: &mut impl Rng) -> EstimatorState {
    let mut est = EstimatorState::new(n, d, 1e-6).unwrap();
    for _ in 0..rounds {
        let a = stochastic(n, rng);
        let rows = DMatrix::from_fn(n, d, |_, _| 0.0);
        let mut rec = Recommendation::new(rows, "train");
        for i in 0..n {
            let item = match catalog {
                Catalog::Finite(items) => items[rng.random_range(0..items.len())].clone(),
                Catalog::UnitBall { .. } => {
                    let g = uniform_vec(d, rng);
                    &g / g.norm().max(1.0)
                }
            };
            rec.items.set_row(i, &item.transpose());
        }
        let r = uniform_vec(n, rng);
        est.ingest_round(&a, &rec, &r).unwrap();
    }
    est
}
