//! The simulation loop shared by every policy.
//!
//! A run plays the spanning items to all users for `d` rounds, then
//! `horizon` selection rounds. The world clock advances once per round in
//! both phases. Regret is only recorded for selection rounds.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arms::{spanning_init, Catalog};
use crate::environment::{best_response, observe_rewards, NoiseModel, Recommendation, RegretTracker, RoundRecord};
use crate::error::{check_dim, Error, Result};
use crate::influence::{evolve_stochastic, fixpoint_a, InfluenceGraph, ProfileMatrix, SocialState};
use crate::policy::Policy;

/// Independent random streams derived from one run seed.
pub mod stream {
    pub const INSTANCE: u64 = 0;
    pub const NOISE: u64 = 1;
    pub const DYNAMICS: u64 = 2;
    pub const POLICY: u64 = 3;
    pub const GRAPH: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How user interests evolve and which design the policies are shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dynamics {
    /// Interests follow their expectation `A(t)U⁰`; policies see `A(t)`.
    #[default]
    Expected,
    /// Interests evolve by random adoption; policies see `A(t)`.
    Stochastic,
    /// Interests follow `A(t)U⁰`; policies only see the fixed point `A∞`.
    Fixpoint,
}

/// Everything that defines one simulated world.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: InfluenceGraph,
    pub profiles: ProfileMatrix,
    pub catalog: Catalog,
    pub alpha: f64,
    pub noise: NoiseModel,
    pub dynamics: Dynamics,
    pub seed: u64,
}

impl Scenario {
    pub fn new(
        graph: InfluenceGraph,
        profiles: ProfileMatrix,
        catalog: Catalog,
        alpha: f64,
        noise: NoiseModel,
        dynamics: Dynamics,
        seed: u64,
    ) -> Result<Self> {
        check_dim("profile rows", graph.n(), profiles.n())?;
        check_dim("catalog dimension", profiles.d(), catalog.dim())?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("{alpha} is outside (0, 1]"),
            });
        }
        Ok(Self {
            graph,
            profiles,
            catalog,
            alpha,
            noise,
            dynamics,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn d(&self) -> usize {
        self.profiles.d()
    }

    /// Seeded stream reserved for the policy's own randomness.
    pub fn policy_rng(&self) -> ChaCha8Rng {
        stream_rng(self.seed, stream::POLICY)
    }
}

struct World<'a> {
    scenario: &'a Scenario,
    social: SocialState,
    fixpoint: Option<DMatrix<f64>>,
    current: ProfileMatrix,
    dynamics_rng: ChaCha8Rng,
}

impl<'a> World<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self> {
        let social = SocialState::new(&scenario.graph, scenario.alpha)?;
        let fixpoint = match scenario.dynamics {
            Dynamics::Fixpoint => Some(fixpoint_a(&scenario.graph, scenario.alpha)?),
            _ => None,
        };
        let mut dynamics_rng = stream_rng(scenario.seed, stream::DYNAMICS);
        let current = match scenario.dynamics {
            // Starting from zero profiles, E[U(0)] = αU⁰ = A(0)U⁰.
            Dynamics::Stochastic => evolve_stochastic(
                &ProfileMatrix::zeros(scenario.n(), scenario.d()),
                &scenario.profiles,
                scenario.alpha,
                &scenario.graph,
                &mut dynamics_rng,
            )?,
            _ => expected(&social, &scenario.profiles),
        };
        Ok(Self {
            scenario,
            social,
            fixpoint,
            current,
            dynamics_rng,
        })
    }

    fn visible_design(&self) -> &DMatrix<f64> {
        self.fixpoint.as_ref().unwrap_or(self.social.design())
    }

    fn advance(&mut self) -> Result<()> {
        self.social.advance();
        self.current = match self.scenario.dynamics {
            Dynamics::Stochastic => evolve_stochastic(
                &self.current,
                &self.scenario.profiles,
                self.scenario.alpha,
                &self.scenario.graph,
                &mut self.dynamics_rng,
            )?,
            _ => expected(&self.social, &self.scenario.profiles),
        };
        Ok(())
    }
}

fn expected(social: &SocialState, u0: &ProfileMatrix) -> ProfileMatrix {
    ProfileMatrix::new(social.design() * u0.as_matrix()).expect("finite profiles stay finite")
}

/// Runs `policy` on `scenario` for `horizon` selection rounds.
pub fn simulate(scenario: &Scenario, policy: &mut dyn Policy, horizon: usize) -> Result<Vec<RoundRecord>> {
    let n = scenario.n();
    let mut world = World::new(scenario)?;
    let mut noise_rng = stream_rng(scenario.seed, stream::NOISE);

    for item in spanning_init(&scenario.catalog, scenario.d())? {
        let rec = Recommendation::broadcast(&item, n, "init");
        let rewards = observe_rewards(&world.current, &rec, scenario.noise, &mut noise_rng)?;
        policy.observe(world.visible_design(), &rec, &rewards)?;
        world.advance()?;
    }

    let mut tracker = RegretTracker::new();
    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let start = Instant::now();
        let rec = policy.select(world.visible_design(), t)?;
        let mut elapsed = start.elapsed();
        if rec.n() != n || !rec.is_valid_for(&scenario.catalog) {
            return Err(Error::InvalidParameter {
                name: "recommendation",
                reason: format!("{} produced an arm outside the catalog at round {t}", policy.name()),
            });
        }
        let (optimal, _) = best_response(world.current.as_matrix(), &scenario.catalog)?;
        let rewards = observe_rewards(&world.current, &rec, scenario.noise, &mut noise_rng)?;
        let start = Instant::now();
        policy.observe(world.visible_design(), &rec, &rewards)?;
        elapsed += start.elapsed();
        let wall_ns = u64::try_from(elapsed.as_nanos()).unwrap_or(u64::MAX);
        records.push(tracker.record_round(t, world.current.as_matrix(), &rec, &optimal, rewards, wall_ns));
        world.advance()?;
    }
    Ok(records)
}
