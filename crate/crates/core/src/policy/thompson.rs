//! Thompson sampling with a Gaussian prior over the stacked profiles.
//!
//! The posterior is kept in information form: precision
//! `Σ⁻¹ = I/κ + Σ_τ XᵀX/σ²` and shift `h = Σ_τ Xᵀr/σ²`, with mean `Σh`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::arms::{greedy_rows, Catalog};
use crate::environment::{Recommendation, RoundRecord};
use crate::error::{Error, Result};
use crate::estimation::{add_context_gram, add_context_moments};
use crate::influence::apply_l_transpose;
use crate::linalg::{mat_rows, spd_inverse, spd_solve};
use crate::policy::Policy;
use crate::sim::{simulate, Scenario};

const JITTER: f64 = 1e-10;

/// How the posterior sample is produced each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Draw a fresh sample from the current posterior.
    #[default]
    Recompute,
    /// Carry one sample forward with perturbed-observation updates.
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThompsonConfig {
    /// Prior covariance is `κI`.
    pub prior_variance: f64,
    pub mode: SampleMode,
}

impl Default for ThompsonConfig {
    fn default() -> Self {
        Self {
            prior_variance: 1.0,
            mode: SampleMode::Recompute,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThompsonState {
    n: usize,
    d: usize,
    precision: DMatrix<f64>,
    shift: DVector<f64>,
    sigma2: f64,
    mode: SampleMode,
    sample: Option<DVector<f64>>,
}

impl ThompsonState {
    pub fn new(n: usize, d: usize, prior_variance: f64, sigma2: f64, mode: SampleMode) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: "Thompson sampling needs positive reward noise".into(),
            });
        }
        if !(prior_variance > 0.0 && prior_variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "prior_variance",
                reason: format!("{prior_variance} must be positive"),
            });
        }
        let nd = n * d;
        Ok(Self {
            n,
            d,
            precision: DMatrix::identity(nd, nd) / prior_variance,
            shift: DVector::zeros(nd),
            sigma2,
            mode,
            sample: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `Σ(t)⁻¹`.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        spd_inverse(&self.precision)
    }

    /// Posterior mean `û₀(t)`.
    pub fn mean(&self) -> Result<DVector<f64>> {
        spd_solve(&self.precision, &self.shift)
    }

    /// The carried sample (incremental mode, once drawn).
    pub fn current_sample(&self) -> Option<&DVector<f64>> {
        self.sample.as_ref()
    }

    /// `Σ(t+1) = (Σ(t)⁻¹ + XᵀX/σ²)⁻¹`, stored as a precision update.
    pub fn update_covariance(&mut self, a: &DMatrix<f64>, v: &Recommendation) -> Result<()> {
        add_context_gram(&mut self.precision, a, v, 1.0 / self.sigma2)
    }

    fn absorb_rewards(&mut self, a: &DMatrix<f64>, v: &Recommendation, r: &DVector<f64>) -> Result<()> {
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rewards"));
        }
        add_context_moments(&mut self.shift, a, v, r, 1.0 / self.sigma2)
    }

    /// Precision and mean update for one observed round, without touching
    /// the carried sample.
    pub fn ingest_round(&mut self, a: &DMatrix<f64>, v: &Recommendation, r: &DVector<f64>) -> Result<()> {
        self.absorb_rewards(a, v, r)?;
        self.update_covariance(a, v)
    }

    /// Draws `u ~ N(û₀, Σ)` as `û₀ + L⁻ᵀξ` for the Cholesky factor `Σ⁻¹ = LLᵀ`.
    pub fn sample_u(&self, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        let nd = self.precision.nrows();
        let chol = match self.precision.clone().cholesky() {
            Some(c) => c,
            None => (&self.precision + DMatrix::identity(nd, nd) * JITTER)
                .cholesky()
                .ok_or(Error::Singular("posterior factorization"))?,
        };
        let xi = DVector::from_fn(nd, |_, _| StandardNormal.sample(rng));
        let offset = chol
            .l()
            .transpose()
            .solve_upper_triangular(&xi)
            .ok_or(Error::Singular("posterior factorization"))?;
        let mean = chol.solve(&self.shift);
        Ok(mean + offset)
    }

    /// Perturbed-observation update of the carried sample:
    /// `u(t+1) = Σ(t+1)(Σ(t)⁻¹u(t) + Xᵀ(r + w̃)/σ²)` with `w̃ ~ N(0, σ²I)`.
    ///
    /// Also applies the precision and mean updates for the round.
    pub fn incremental_sample_update(
        &mut self,
        a: &DMatrix<f64>,
        v: &Recommendation,
        r: &DVector<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        if self.mode != SampleMode::Incremental {
            return Err(Error::Unsupported(
                "incremental sample update requires incremental mode".into(),
            ));
        }
        let sample = match self.sample.take() {
            Some(s) => s,
            None => self.sample_u(rng)?,
        };
        let sigma = self.sigma2.sqrt();
        let perturbed = DVector::from_fn(r.len(), |i, _| {
            let w: f64 = StandardNormal.sample(rng);
            r[i] + sigma * w
        });
        let mut rhs = &self.precision * sample;
        add_context_moments(&mut rhs, a, v, &perturbed, 1.0 / self.sigma2)?;
        self.ingest_round(a, v, r)?;
        self.sample = Some(spd_solve(&self.precision, &rhs)?);
        Ok(())
    }

    fn next_sample(&mut self, rng: &mut ChaCha8Rng) -> Result<DVector<f64>> {
        match self.mode {
            SampleMode::Recompute => self.sample_u(rng),
            SampleMode::Incremental => {
                if self.sample.is_none() {
                    self.sample = Some(self.sample_u(rng)?);
                }
                Ok(self.sample.clone().expect("sample drawn above"))
            }
        }
    }
}

/// Exact joint maximizer of `uᵀL(t)v`: per-user greedy on the blocks of `Lᵀu`.
pub fn select_arms_ts(u: &DVector<f64>, design: &DMatrix<f64>, catalog: &Catalog) -> Result<Recommendation> {
    let d = catalog.dim();
    let n = design.nrows();
    let z = mat_rows(apply_l_transpose(design, u.as_slice(), d)?.as_slice(), n, d);
    let mut evals = 0;
    let (rows, _) = greedy_rows(&z, catalog, &mut evals)?;
    Ok(Recommendation::new(rows, "thompson"))
}

/// Bayesian regret bound at horizon `T`:
/// `2 + 2nβ_T·T·sqrt(2ndT·ln(1 + nT/d))` with
/// `β_T = 1 + sqrt(2 ln(1/δ) + nd·ln(1 + nT/d))`.
pub fn ts_bayes_regret_bound(horizon: usize, n: usize, d: usize, delta: f64) -> f64 {
    let t = horizon as f64;
    let (nf, df) = (n as f64, d as f64);
    let growth = (1.0 + nf / df * t).ln();
    let beta = 1.0 + (2.0 * (1.0 / delta).ln() + nf * df * growth).sqrt();
    2.0 + 2.0 * nf * beta * t * (2.0 * nf * df * t * growth).sqrt()
}

/// Thompson sampling as a simulation policy.
#[derive(Debug, Clone)]
pub struct ThompsonSampling {
    state: ThompsonState,
    catalog: Catalog,
    rng: ChaCha8Rng,
}

impl ThompsonSampling {
    pub fn new(n: usize, catalog: Catalog, sigma: f64, cfg: ThompsonConfig, rng: ChaCha8Rng) -> Result<Self> {
        let state = ThompsonState::new(n, catalog.dim(), cfg.prior_variance, sigma * sigma, cfg.mode)?;
        Ok(Self { state, catalog, rng })
    }

    pub fn with_seed(n: usize, catalog: Catalog, sigma: f64, cfg: ThompsonConfig, seed: u64) -> Result<Self> {
        Self::new(n, catalog, sigma, cfg, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn state(&self) -> &ThompsonState {
        &self.state
    }
}

impl Policy for ThompsonSampling {
    fn name(&self) -> &str {
        "thompson"
    }

    fn select(&mut self, design: &DMatrix<f64>, _round: usize) -> Result<Recommendation> {
        let u = self.state.next_sample(&mut self.rng)?;
        select_arms_ts(&u, design, &self.catalog)
    }

    fn observe(&mut self, design: &DMatrix<f64>, rec: &Recommendation, rewards: &DVector<f64>) -> Result<()> {
        match self.state.mode {
            SampleMode::Incremental if self.state.sample.is_some() => {
                self.state.incremental_sample_update(design, rec, rewards, &mut self.rng)
            }
            _ => self.state.ingest_round(design, rec, rewards),
        }
    }
}

/// Runs Thompson sampling on a scenario; the policy stream comes from the scenario seed.
pub fn run_thompson(scenario: &Scenario, cfg: ThompsonConfig, horizon: usize) -> Result<Vec<RoundRecord>> {
    let mut policy = ThompsonSampling::new(
        scenario.n(),
        scenario.catalog.clone(),
        scenario.noise.sigma(),
        cfg,
        scenario.policy_rng(),
    )?;
    simulate(scenario, &mut policy, horizon)
}
