//! Comparison policies: uniform random arms and greedy least squares.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arms::{greedy_rows, Catalog};
use crate::environment::{Recommendation, RoundRecord};
use crate::error::Result;
use crate::estimation::EstimatorState;
use crate::influence::apply_l_transpose;
use crate::linalg::mat_rows;
use crate::policy::Policy;
use crate::sim::{simulate, Scenario};

/// Explores without exploiting: a uniform item per user, or a uniform point
/// on the unit sphere for the ball.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    n: usize,
    catalog: Catalog,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(n: usize, catalog: Catalog, rng: ChaCha8Rng) -> Self {
        Self { n, catalog, rng }
    }
}

/// Uniform draw from the catalog (sphere surface for the ball).
pub fn random_item<R: Rng + ?Sized>(catalog: &Catalog, rng: &mut R) -> DVector<f64> {
    match catalog {
        Catalog::Finite(items) => items[rng.random_range(0..items.len())].clone(),
        Catalog::UnitBall { dim } => loop {
            let g: DVector<f64> = DVector::from_fn(*dim, |_, _| StandardNormal.sample(rng));
            let norm = g.norm();
            if norm > 0.0 {
                break g / norm;
            }
        },
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "rand"
    }

    fn select(&mut self, _design: &DMatrix<f64>, _round: usize) -> Result<Recommendation> {
        let d = self.catalog.dim();
        let mut rows = DMatrix::zeros(self.n, d);
        for i in 0..self.n {
            let item = random_item(&self.catalog, &mut self.rng);
            rows.set_row(i, &item.transpose());
        }
        Ok(Recommendation::new(rows, "rand"))
    }

    fn observe(&mut self, _: &DMatrix<f64>, _: &Recommendation, _: &DVector<f64>) -> Result<()> {
        Ok(())
    }
}

/// Exploits without exploring: greedy arms for the ridge estimate.
#[derive(Debug, Clone)]
pub struct Regression {
    estimator: EstimatorState,
    catalog: Catalog,
}

impl Regression {
    pub fn new(n: usize, catalog: Catalog, lambda: f64) -> Result<Self> {
        Ok(Self {
            estimator: EstimatorState::new(n, catalog.dim(), lambda)?,
            catalog,
        })
    }

    pub fn estimator(&self) -> &EstimatorState {
        &self.estimator
    }
}

/// Greedy joint recommendation for a stacked parameter estimate.
pub fn greedy_recommendation(u: &DVector<f64>, design: &DMatrix<f64>, catalog: &Catalog) -> Result<Recommendation> {
    let (n, d) = (design.nrows(), catalog.dim());
    let z = mat_rows(apply_l_transpose(design, u.as_slice(), d)?.as_slice(), n, d);
    let mut evals = 0;
    let (rows, _) = greedy_rows(&z, catalog, &mut evals)?;
    Ok(Recommendation::new(rows, "regression"))
}

impl Policy for Regression {
    fn name(&self) -> &str {
        "regression"
    }

    fn select(&mut self, design: &DMatrix<f64>, _round: usize) -> Result<Recommendation> {
        greedy_recommendation(self.estimator.u_hat(), design, &self.catalog)
    }

    fn observe(&mut self, design: &DMatrix<f64>, rec: &Recommendation, rewards: &DVector<f64>) -> Result<()> {
        self.estimator.ingest_round(design, rec, rewards)
    }
}

pub fn run_rand(scenario: &Scenario, horizon: usize) -> Result<Vec<RoundRecord>> {
    let mut policy = RandomPolicy::new(scenario.n(), scenario.catalog.clone(), scenario.policy_rng());
    simulate(scenario, &mut policy, horizon)
}

pub fn run_regression(scenario: &Scenario, lambda: f64, horizon: usize) -> Result<Vec<RoundRecord>> {
    let mut policy = Regression::new(scenario.n(), scenario.catalog.clone(), lambda)?;
    simulate(scenario, &mut policy, horizon)
}
