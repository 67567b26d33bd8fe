//! Thompson sampling with a fresh posterior draw each round versus the
//! incremental variant that carries one sample forward with perturbed
//! observations, on the unit-ball catalog.

use std::time::Instant;

use social_bandits::arms::Catalog;
use social_bandits::graph_gen;
use social_bandits::policy::thompson::{run_thompson, ThompsonConfig};
use social_bandits::policy::SampleMode;
use social_bandits::sim::stream_rng;
use social_bandits::{Dynamics, NoiseModel, ProfileMatrix, Scenario};

fn main() -> social_bandits::Result<()> {
    let (n, d, horizon) = (10, 5, 100);
    for mode in [SampleMode::Recompute, SampleMode::Incremental] {
        let mut total = 0.0;
        let start = Instant::now();
        let seeds = 0..10;
        for seed in seeds.clone() {
            let profiles = ProfileMatrix::random_uniform(n, d, &mut stream_rng(seed, 0));
            let scenario = Scenario::new(
                graph_gen::erdos_renyi(n, seed)?,
                profiles,
                Catalog::unit_ball(d)?,
                0.05,
                NoiseModel::new(1.0)?,
                Dynamics::Stochastic,
                seed,
            )?;
            let cfg = ThompsonConfig { prior_variance: 1.0, mode };
            total += run_thompson(&scenario, cfg, horizon)?.last().unwrap().cum_regret;
        }
        let runs = seeds.count() as f64;
        println!(
            "{mode:?}: mean R({horizon}) = {:.2}, {:.2} ms per run",
            total / runs,
            start.elapsed().as_secs_f64() * 1e3 / runs
        );
    }
    Ok(())
}
