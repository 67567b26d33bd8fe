//! LinUCB on the unit ball through a semidefinite relaxation.
//!
//! The selection `max_v ûᵀLv + c·vᵀLᵀΣLv` over per-user unit balls is
//! homogenized with `y = (v, s)` into `max yᵀH₀y`, lifted to `Y = yyᵀ` and
//! relaxed to `max tr(H₀Y)` over PSD `Y` whose per-user diagonal blocks have
//! trace at most one and whose last diagonal entry is at most one. The
//! relaxation is solved by projected gradient ascent and rounded through the
//! top eigenvector. This is a heuristic: no regret guarantee comes with it.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arms::Catalog;
use crate::environment::{Recommendation, RoundRecord};
use crate::error::{check_dim, Error, Result};
use crate::estimation::{EstimatorState, DEFAULT_LAMBDA};
use crate::influence::{apply_l, apply_l_transpose};
use crate::linalg::symmetrize;
use crate::policy::Policy;
use crate::sim::{simulate, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinUcbConfig {
    /// Exploration constant `c`.
    pub c: f64,
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LinUcbConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            lambda: DEFAULT_LAMBDA,
            max_iter: 2000,
            tol: 1e-9,
        }
    }
}

/// The homogenized quadratic program `max yᵀH₀y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub h0: DMatrix<f64>,
    pub n: usize,
    pub d: usize,
    pub c: f64,
}

/// `H₀ = [[c·LᵀΣL, Lᵀû/2], [ûᵀL/2, 0]]` with `L = Aᵀ ⊗ I_d` applied implicitly.
pub fn build_h0(u_hat: &DVector<f64>, sigma: &DMatrix<f64>, a: &DMatrix<f64>, c: f64) -> Result<SdpProblem> {
    let n = a.nrows();
    check_dim("design columns", n, a.ncols())?;
    let nd = u_hat.len();
    if n == 0 || !nd.is_multiple_of(n) {
        return Err(Error::DimensionMismatch {
            context: "stacked estimate length",
            expected: n * (nd / n.max(1)).max(1),
            actual: nd,
        });
    }
    let d = nd / n;
    check_dim("covariance size", nd, sigma.nrows())?;
    check_dim("covariance size", nd, sigma.ncols())?;

    // LᵀΣ column by column, then Lᵀ(LᵀΣ)ᵀ = LᵀΣL.
    let mut lt_sigma = DMatrix::zeros(nd, nd);
    for k in 0..nd {
        let col: Vec<f64> = sigma.column(k).iter().copied().collect();
        lt_sigma.set_column(k, &apply_l_transpose(a, &col, d)?);
    }
    let rows_t = lt_sigma.transpose();
    let mut quad = DMatrix::zeros(nd, nd);
    for k in 0..nd {
        let col: Vec<f64> = rows_t.column(k).iter().copied().collect();
        quad.set_column(k, &apply_l_transpose(a, &col, d)?);
    }
    symmetrize(&mut quad);

    let linear = apply_l_transpose(a, u_hat.as_slice(), d)?;
    let mut h0 = DMatrix::zeros(nd + 1, nd + 1);
    h0.view_mut((0, 0), (nd, nd)).copy_from(&(quad * c));
    for k in 0..nd {
        h0[(k, nd)] = linear[k] / 2.0;
        h0[(nd, k)] = linear[k] / 2.0;
    }
    Ok(SdpProblem { h0, n, d, c })
}

/// `yᵀH₀y` at `y = (vec(V), 1)`, i.e. the LinUCB score of `V`.
pub fn linucb_objective(problem: &SdpProblem, v: &Recommendation) -> f64 {
    let nd = problem.n * problem.d;
    let mut y = DVector::zeros(nd + 1);
    y.rows_mut(0, nd).copy_from(&v.stacked());
    y[nd] = 1.0;
    y.dot(&(&problem.h0 * &y))
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub y: DMatrix<f64>,
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iter` was reached before the objective settled; `y`
    /// is then the best feasible iterate found.
    pub converged: bool,
}

/// Radially shrinks every over-full user block of rows of the factor `R`
/// (and the homogenizing row) onto the unit Frobenius ball. For `Y = RRᵀ`
/// this is the diagonal congruence `DYD` that lands in the diagonal
/// constraint set, and it is the exact Euclidean projection for `R`.
fn project_factor(r: &mut DMatrix<f64>, n: usize, d: usize) {
    let m = r.nrows();
    let shrink = |r: &mut DMatrix<f64>, rows: std::ops::Range<usize>| {
        let mass: f64 = rows.clone().map(|k| r.row(k).norm_squared()).sum();
        if mass > 1.0 {
            let f = 1.0 / mass.sqrt();
            for k in rows {
                r.row_mut(k).scale_mut(f);
            }
        }
    };
    for i in 0..n {
        shrink(r, i * d..(i + 1) * d);
    }
    shrink(r, m - 1..m);
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Fixed seed for the solver's starting factor; the solver is deterministic.
const FACTOR_SEED: u64 = 0x5d9_f00d;

/// Maximizes `tr(H₀Y)` subject to `Y ⪰ 0` and the diagonal constraints.
///
/// `Y` is kept in factored form `Y = RRᵀ` with `R` of size `m × (m+1)`, so
/// it is PSD by construction. Each iteration takes a gradient step on `R`
/// and projects back onto the diagonal constraint set. With more columns
/// than rows every local maximum of the factored problem is a global
/// maximum of the relaxation. Stops once the objective changes by less than
/// `tol` (relative to `max(1, |value|)`) or after `max_iter` steps.
pub fn sdp_solve(problem: &SdpProblem, max_iter: usize, tol: f64) -> Result<SdpSolution> {
    let (n, d) = (problem.n, problem.d);
    let m = n * d + 1;
    check_dim("H0 size", m, problem.h0.nrows())?;
    if problem.h0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("H0"));
    }
    let h = &problem.h0;
    let spectral = h.clone().symmetric_eigen().eigenvalues.amax();
    if spectral == 0.0 {
        let mut y = DMatrix::zeros(m, m);
        for k in 0..n * d {
            y[(k, k)] = 1.0 / d as f64;
        }
        y[(m - 1, m - 1)] = 1.0;
        return Ok(SdpSolution {
            value: 0.0,
            y,
            iterations: 0,
            converged: true,
        });
    }
    // Ascent is guaranteed at the 1/Lipschitz step; longer steps are tried
    // first and halved back toward it, which matters when H₀ is badly
    // conditioned (huge posterior variance early on).
    let floor = 0.25 / spectral;
    let mut step = floor;

    let mut rng = ChaCha8Rng::seed_from_u64(FACTOR_SEED);
    let mut r = DMatrix::from_fn(m, m + 1, |_, _| StandardNormal.sample(&mut rng));
    project_factor(&mut r, n, d);
    let objective = |r: &DMatrix<f64>| trace_product(&(h * r), r);
    let mut value = objective(&r);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let grad = h * &r;
        let (next, next_value) = loop {
            let mut next = &r + &grad * (2.0 * step);
            project_factor(&mut next, n, d);
            let next_value = objective(&next);
            if next_value >= value || step <= floor {
                break (next, next_value);
            }
            step = (step / 2.0).max(floor);
        };
        let change = (next_value - value).abs();
        r = next;
        value = next_value;
        if change < tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
        step *= 2.0;
    }
    let mut y = &r * r.transpose();
    symmetrize(&mut y);
    Ok(SdpSolution {
        value: trace_product(h, &y),
        y,
        iterations,
        converged,
    })
}

/// Rounds a relaxed solution to per-user items in the unit ball.
///
/// Takes `y = sqrt(λ_max)·q_max` with the sign fixed so the homogenizing
/// entry is nonnegative, splits its first `nd` entries into user blocks and
/// normalizes blocks longer than one. Zero blocks map to `e₁`.
pub fn round_y(y: &DMatrix<f64>, n: usize, d: usize) -> Result<Recommendation> {
    check_dim("relaxed matrix size", n * d + 1, y.nrows())?;
    let eig = y.clone().symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let lambda = eig.eigenvalues[top].max(0.0);
    let mut vec = eig.eigenvectors.column(top) * lambda.sqrt();
    let last = vec[n * d];
    let flip = if last != 0.0 {
        last < 0.0
    } else {
        vec.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
    };
    if flip {
        vec.neg_mut();
    }
    let mut rows = DMatrix::zeros(n, d);
    for i in 0..n {
        let mut block = vec.rows(i * d, d).clone_owned();
        let norm = block.norm();
        if norm == 0.0 {
            block[0] = 1.0;
        } else if norm > 1.0 {
            block /= norm;
        }
        rows.set_row(i, &block.transpose());
    }
    Ok(Recommendation::new(rows, "linucb"))
}

/// LinUCB as a simulation policy (unit-ball catalogs only).
#[derive(Debug, Clone)]
pub struct LinUcb {
    cfg: LinUcbConfig,
    estimator: EstimatorState,
    last: Option<SdpSolution>,
}

impl LinUcb {
    pub fn new(n: usize, catalog: &Catalog, cfg: LinUcbConfig) -> Result<Self> {
        let Catalog::UnitBall { dim } = catalog else {
            return Err(Error::Unsupported(
                "LinUCB arm selection is only available for the unit-ball catalog".into(),
            ));
        };
        if !(cfg.c >= 0.0 && cfg.c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "linucb_c",
                reason: format!("{} must be finite and nonnegative", cfg.c),
            });
        }
        Ok(Self {
            cfg,
            estimator: EstimatorState::new(n, *dim, cfg.lambda)?,
            last: None,
        })
    }

    pub fn last_solution(&self) -> Option<&SdpSolution> {
        self.last.as_ref()
    }
}

impl Policy for LinUcb {
    fn name(&self) -> &str {
        "linucb"
    }

    fn select(&mut self, design: &DMatrix<f64>, _round: usize) -> Result<Recommendation> {
        let sigma = self.estimator.covariance()?;
        let problem = build_h0(self.estimator.u_hat(), &sigma, design, self.cfg.c)?;
        let solution = sdp_solve(&problem, self.cfg.max_iter, self.cfg.tol)?;
        let rec = round_y(&solution.y, self.estimator.n(), self.estimator.d())?;
        self.last = Some(solution);
        Ok(rec)
    }

    fn observe(&mut self, design: &DMatrix<f64>, rec: &Recommendation, rewards: &DVector<f64>) -> Result<()> {
        self.estimator.ingest_round(design, rec, rewards)
    }
}

pub fn run_linucb(scenario: &Scenario, cfg: LinUcbConfig, horizon: usize) -> Result<Vec<RoundRecord>> {
    let mut policy = LinUcb::new(scenario.n(), &scenario.catalog, cfg)?;
    simulate(scenario, &mut policy, horizon)
}

/// Explicit `L = Aᵀ ⊗ I_d` applied to `v`; used to cross-check `H₀`.
#[doc(hidden)]
pub fn quadratic_score(u_hat: &DVector<f64>, sigma: &DMatrix<f64>, a: &DMatrix<f64>, c: f64, v: &[f64]) -> Result<f64> {
    let d = u_hat.len() / a.nrows();
    let lv = apply_l(a, v, d)?;
    Ok(u_hat.dot(&lv) + c * lv.dot(&(sigma * &lv)))
}
