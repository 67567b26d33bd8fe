//! LinREL over the L1 confidence polytope.
//!
//! A linear objective over `{u : ‖Z^{1/2}(u − û₀)‖₁ ≤ ρ}` is maximized at one
//! of the `2nd` vertices `û₀ ± ρ·(Z^{-1/2})_{·j}`. For a fixed vertex the
//! joint arm choice separates over users, so one selection costs `2nd`
//! vertex evaluations of `n` per-user linear maximizations each.

use nalgebra::{DMatrix, DVector};

use crate::arms::{greedy_rows, Catalog};
use crate::environment::{Recommendation, RoundRecord};
use crate::error::{Error, Result};
use crate::estimation::{EstimatorState, DEFAULT_LAMBDA};
use crate::influence::apply_l_transpose;
use crate::linalg::{sym_inv_sqrt, sym_sqrt};
use crate::linalg::mat_rows;
use crate::policy::Policy;
use crate::sim::{simulate, Scenario};

pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_BETA_SCALE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinRelConfig {
    pub delta: f64,
    /// Multiplier applied to the theoretical `β_t`. Zero collapses the
    /// polytope onto `û₀`.
    pub beta_scale: f64,
    pub lambda: f64,
}

impl Default for LinRelConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            beta_scale: DEFAULT_BETA_SCALE,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

impl LinRelConfig {
    pub fn new(delta: f64, beta_scale: f64, lambda: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("{delta} is outside (0, 1)"),
            });
        }
        if !(beta_scale >= 0.0 && beta_scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta_scale",
                reason: format!("{beta_scale} must be finite and nonnegative"),
            });
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("{lambda} must be positive"),
            });
        }
        Ok(Self {
            delta,
            beta_scale,
            lambda,
        })
    }

    /// Radius `sqrt(nd·β_t·scale)` of the L1 polytope at round `t`.
    pub fn radius(&self, t: usize, n: usize, d: usize) -> f64 {
        ((n * d) as f64 * beta_t(t, n, d, self.delta, self.beta_scale)).sqrt()
    }
}

/// `β_t = scale · max{128·nd·ln t·ln(t²/δ), ((8/3)·ln(t²/δ))²}`.
pub fn beta_t(t: usize, n: usize, d: usize, delta: f64, scale: f64) -> f64 {
    let t = t.max(1) as f64;
    let log_term = (t * t / delta).ln();
    let first = 128.0 * (n * d) as f64 * t.ln() * log_term;
    let second = (8.0 / 3.0 * log_term).powi(2);
    scale * first.max(second)
}

/// The `2nd` vertices of `{u : ‖Z^{1/2}(u − û₀)‖₁ ≤ radius}`, ordered
/// `û₀ − ρc₁, û₀ + ρc₁, û₀ − ρc₂, …` for the columns `c_j` of `Z^{-1/2}`.
pub fn extreme_points(u_hat: &DVector<f64>, z: &DMatrix<f64>, radius: f64) -> Result<Vec<DVector<f64>>> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("{radius} must be finite and nonnegative"),
        });
    }
    crate::error::check_dim("precision size", u_hat.len(), z.nrows())?;
    let root = sym_inv_sqrt(z)?;
    let mut points = Vec::with_capacity(2 * u_hat.len());
    for j in 0..u_hat.len() {
        let step = root.column(j) * radius;
        points.push(u_hat - &step);
        points.push(u_hat + &step);
    }
    Ok(points)
}

/// `‖Z^{1/2}(u − û₀)‖₁`.
pub fn l1_z_norm(u: &DVector<f64>, u_hat: &DVector<f64>, z: &DMatrix<f64>) -> f64 {
    (sym_sqrt(z) * (u - u_hat)).lp_norm(1)
}

/// `‖u − û₀‖_{2,Z} = sqrt((u − û₀)ᵀ Z (u − û₀))`.
pub fn l2_z_norm(u: &DVector<f64>, u_hat: &DVector<f64>, z: &DMatrix<f64>) -> f64 {
    let diff = u - u_hat;
    diff.dot(&(z * &diff)).max(0.0).sqrt()
}

/// Membership in the L1 confidence set of radius `sqrt(nd·β)`.
pub fn in_c1(u: &DVector<f64>, u_hat: &DVector<f64>, z: &DMatrix<f64>, beta: f64) -> bool {
    l1_z_norm(u, u_hat, z) <= (u.len() as f64 * beta).sqrt() + 1e-9
}

/// Membership in the L2 confidence set of radius `sqrt(β)`.
pub fn in_c2(u: &DVector<f64>, u_hat: &DVector<f64>, z: &DMatrix<f64>, beta: f64) -> bool {
    l2_z_norm(u, u_hat, z) <= beta.sqrt() + 1e-9
}

/// A LinREL decision with its instrumentation counters.
#[derive(Debug, Clone)]
pub struct LinRelSelection {
    pub recommendation: Recommendation,
    /// Optimistic value `max_{u ∈ E} uᵀL(t)v` of the returned arms.
    pub objective: f64,
    /// The maximizing vertex.
    pub point: DVector<f64>,
    pub extreme_points: usize,
    /// Candidate inner products evaluated across all per-user maximizations.
    pub evaluations: u64,
}

/// Optimistic arm selection over the L1 polytope of the given radius.
///
/// Ties between vertices keep the first in enumeration order.
pub fn select_arms(
    estimator: &EstimatorState,
    design: &DMatrix<f64>,
    catalog: &Catalog,
    radius: f64,
) -> Result<LinRelSelection> {
    let (n, d) = (estimator.n(), estimator.d());
    let points = extreme_points(estimator.u_hat(), estimator.precision(), radius)?;
    let mut evaluations = 0;
    let mut best: Option<(usize, DMatrix<f64>, f64)> = None;
    for (k, u) in points.iter().enumerate() {
        let z = mat_rows(apply_l_transpose(design, u.as_slice(), d)?.as_slice(), n, d);
        let (rows, value) = greedy_rows(&z, catalog, &mut evaluations)?;
        if best.as_ref().is_none_or(|(_, _, v)| value > *v) {
            best = Some((k, rows, value));
        }
    }
    let (k, rows, objective) = best.expect("at least one extreme point");
    Ok(LinRelSelection {
        recommendation: Recommendation::new(rows, "linrel"),
        objective,
        point: points[k].clone(),
        extreme_points: points.len(),
        evaluations,
    })
}

/// Which confidence set a regret bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceSet {
    L1,
    L2,
}

/// High-probability regret bound of LinREL at horizon `T`.
///
/// L2: `n·sqrt(8ndβ_T·T·ln(1 + nT/d))`; L1: `n²d·sqrt(8β_T·T·ln(1 + nT/d))`,
/// with the unscaled `β_T`.
pub fn linrel_regret_bound(horizon: usize, n: usize, d: usize, delta: f64, set: ConfidenceSet) -> f64 {
    let t = horizon as f64;
    let (nf, df) = (n as f64, d as f64);
    let beta = beta_t(horizon, n, d, delta, 1.0);
    let growth = beta * t * (1.0 + nf / df * t).ln();
    match set {
        ConfidenceSet::L2 => nf * (8.0 * nf * df * growth).sqrt(),
        ConfidenceSet::L1 => nf * nf * df * (8.0 * growth).sqrt(),
    }
}

/// LinREL as a simulation policy.
#[derive(Debug, Clone)]
pub struct LinRel {
    cfg: LinRelConfig,
    estimator: EstimatorState,
    catalog: Catalog,
    radii: Vec<f64>,
    last: Option<LinRelSelection>,
}

impl LinRel {
    pub fn new(n: usize, catalog: Catalog, cfg: LinRelConfig) -> Result<Self> {
        let estimator = EstimatorState::new(n, catalog.dim(), cfg.lambda)?;
        Ok(Self {
            cfg,
            estimator,
            catalog,
            radii: Vec::new(),
            last: None,
        })
    }

    pub fn estimator(&self) -> &EstimatorState {
        &self.estimator
    }

    /// Polytope radius used at each selection round so far.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn last_selection(&self) -> Option<&LinRelSelection> {
        self.last.as_ref()
    }
}

impl Policy for LinRel {
    fn name(&self) -> &str {
        "linrel"
    }

    fn select(&mut self, design: &DMatrix<f64>, round: usize) -> Result<Recommendation> {
        let radius = self.cfg.radius(round, self.estimator.n(), self.estimator.d());
        let selection = select_arms(&self.estimator, design, &self.catalog, radius)?;
        self.radii.push(radius);
        let rec = selection.recommendation.clone();
        self.last = Some(selection);
        Ok(rec)
    }

    fn observe(&mut self, design: &DMatrix<f64>, rec: &Recommendation, rewards: &DVector<f64>) -> Result<()> {
        self.estimator.ingest_round(design, rec, rewards)
    }
}

/// Runs LinREL on a scenario for `horizon` selection rounds.
pub fn run_linrel(scenario: &Scenario, cfg: LinRelConfig, horizon: usize) -> Result<Vec<RoundRecord>> {
    let mut policy = LinRel::new(scenario.n(), scenario.catalog.clone(), cfg)?;
    simulate(scenario, &mut policy, horizon)
}
