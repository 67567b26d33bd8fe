//! Reward generation, contexts, the clairvoyant oracle and regret bookkeeping.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arms::{greedy_rows, Catalog};
use crate::error::{check_dim, Error, Result};
use crate::influence::ProfileMatrix;
use crate::linalg::vec_rows;

/// Gaussian rating noise with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma >= 0.0 {
            Ok(Self { sigma })
        } else {
            Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("{sigma} must be finite and nonnegative"),
            })
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// One item profile per user, stored as the rows of an `n x d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub items: DMatrix<f64>,
    pub origin: String,
}

impl Recommendation {
    pub fn new(items: DMatrix<f64>, origin: impl Into<String>) -> Self {
        Self {
            items,
            origin: origin.into(),
        }
    }

    /// The same item for every user.
    pub fn broadcast(item: &DVector<f64>, n: usize, origin: impl Into<String>) -> Self {
        let items = DMatrix::from_fn(n, item.len(), |_, k| item[k]);
        Self::new(items, origin)
    }

    pub fn n(&self) -> usize {
        self.items.nrows()
    }

    pub fn d(&self) -> usize {
        self.items.ncols()
    }

    pub fn item(&self, i: usize) -> DVector<f64> {
        self.items.row(i).transpose()
    }

    /// Row-major stacking `vec(V)`.
    pub fn stacked(&self) -> DVector<f64> {
        vec_rows(&self.items)
    }

    /// True when every row belongs to the catalog.
    pub fn is_valid_for(&self, catalog: &Catalog) -> bool {
        self.d() == catalog.dim() && (0..self.n()).all(|i| catalog.contains(&self.item(i)))
    }
}

/// Per-round outcome of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub rewards: DVector<f64>,
    pub expected_total: f64,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub wall_ns: u64,
}

/// `r_i = ⟨u_i, v_i⟩ + ε_i` with `ε_i ~ N(0, σ²)` drawn independently.
pub fn observe_rewards<R: Rng + ?Sized>(
    u: &ProfileMatrix,
    v: &Recommendation,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<DVector<f64>> {
    check_dim("recommendation rows", u.n(), v.n())?;
    check_dim("recommendation dimension", u.d(), v.d())?;
    let mut r = row_dots(u.as_matrix(), &v.items);
    if noise.sigma > 0.0 {
        for x in r.iter_mut() {
            let eps: f64 = StandardNormal.sample(rng);
            *x += noise.sigma * eps;
        }
    }
    Ok(r)
}

fn row_dots(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(a.nrows(), |i, _| a.row(i).dot(&b.row(i)))
}

/// Context of user `i`, `x_i = a_i ⊗ v_i` with `a_i` row `i` of `A`.
///
/// Kept in factored form; [`Context::densify`] materializes the `nd` vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub weights: DVector<f64>,
    pub item: DVector<f64>,
}

impl Context {
    pub fn densify(&self) -> DVector<f64> {
        self.weights.kronecker(&self.item)
    }

    /// `x_iᵀu` without materializing `x_i`.
    pub fn dot(&self, u: &[f64]) -> f64 {
        let d = self.item.len();
        self.weights
            .iter()
            .enumerate()
            .map(|(j, &a)| a * self.item.iter().zip(&u[j * d..(j + 1) * d]).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }
}

pub fn context_row(a: &DMatrix<f64>, item: &DVector<f64>, i: usize) -> Result<Context> {
    if i >= a.nrows() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: a.nrows(),
        });
    }
    Ok(Context {
        weights: a.row(i).transpose(),
        item: item.clone(),
    })
}

/// Total expected reward `⟨U⁰, AᵀV⟩ = Σ_i ⟨(AU⁰)_i, v_i⟩`.
pub fn expected_total_reward(u0: &ProfileMatrix, a: &DMatrix<f64>, v: &Recommendation) -> Result<f64> {
    check_dim("design rows", u0.n(), a.nrows())?;
    check_dim("recommendation rows", u0.n(), v.n())?;
    check_dim("recommendation dimension", u0.d(), v.d())?;
    Ok((a * u0.as_matrix()).component_mul(&v.items).sum())
}

/// Total reward of `v` under current profiles `U`, `Σ_i ⟨u_i, v_i⟩`.
pub fn total_reward(current: &DMatrix<f64>, v: &Recommendation) -> f64 {
    current.component_mul(&v.items).sum()
}

/// Best joint recommendation when the current profiles are known.
///
/// The total reward separates over users, so each row is an independent
/// linear maximization over the catalog.
pub fn best_response(current: &DMatrix<f64>, catalog: &Catalog) -> Result<(Recommendation, f64)> {
    let mut evals = 0;
    let (rows, value) = greedy_rows(current, catalog, &mut evals)?;
    Ok((Recommendation::new(rows, "oracle"), value))
}

/// The clairvoyant recommendation `argmax_v u₀ᵀL(t)v`.
pub fn oracle_best(u0: &ProfileMatrix, a: &DMatrix<f64>, catalog: &Catalog) -> Result<Recommendation> {
    check_dim("design rows", u0.n(), a.nrows())?;
    Ok(best_response(&(a * u0.as_matrix()), catalog)?.0)
}

/// Running regret accumulator.
#[derive(Debug, Clone, Default)]
pub struct RegretTracker {
    cum: f64,
}

impl RegretTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cumulative(&self) -> f64 {
        self.cum
    }

    /// Records round `t`: `ρ(t) = Σ_i ⟨u_i(t), v*_i − v_i⟩` for the current
    /// profiles `u_i(t)`, accumulated into the running total.
    pub fn record_round(
        &mut self,
        t: usize,
        current: &DMatrix<f64>,
        chosen: &Recommendation,
        optimal: &Recommendation,
        rewards: DVector<f64>,
        wall_ns: u64,
    ) -> RoundRecord {
        let expected_total = total_reward(current, chosen);
        let inst_regret = total_reward(current, optimal) - expected_total;
        self.cum += inst_regret;
        RoundRecord {
            t,
            rewards,
            expected_total,
            inst_regret,
            cum_regret: self.cum,
            wall_ns,
        }
    }
}
