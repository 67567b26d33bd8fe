//! One round of arm selection by each policy on a small finite catalog.
//!
//! LinREL scans the 2nd vertices of its L1 confidence polytope and solves a
//! separable per-user argmax at each, so its cost is `2n²d|B|` inner products
//! rather than `|B|^n` joint recommendations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_bandits::arms::Catalog;
use social_bandits::environment::{expected_total_reward, observe_rewards, oracle_best};
use social_bandits::estimation::EstimatorState;
use social_bandits::graph_gen;
use social_bandits::influence::{evolve_expected, SocialState};
use social_bandits::policy::baselines::greedy_recommendation;
use social_bandits::policy::linrel::{select_arms, LinRelConfig};
use social_bandits::policy::thompson::{select_arms_ts, ThompsonState};
use social_bandits::policy::SampleMode;
use social_bandits::{NoiseModel, ProfileMatrix, Recommendation};

fn main() -> social_bandits::Result<()> {
    let (n, d, m) = (4, 3, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let catalog = Catalog::random_finite(m, d, &mut rng)?;
    let u0 = ProfileMatrix::random_uniform(n, d, &mut rng);
    let graph = graph_gen::complete(n)?;
    let noise = NoiseModel::new(0.5)?;

    // A few broadcast rounds to get an estimate going.
    let mut est = EstimatorState::new(n, d, 1e-3)?;
    let mut ts = ThompsonState::new(n, d, 1.0, noise.variance(), SampleMode::Recompute)?;
    let mut state = SocialState::new(&graph, 0.3)?;
    let items = match &catalog {
        Catalog::Finite(items) => items.clone(),
        Catalog::UnitBall { .. } => unreachable!(),
    };
    for item in items.iter().take(6) {
        let rec = Recommendation::broadcast(item, n, "warmup");
        let current = evolve_expected(&u0, &state)?;
        let rewards = observe_rewards(&current, &rec, noise, &mut rng)?;
        est.ingest_round(state.design(), &rec, &rewards)?;
        ts.ingest_round(state.design(), &rec, &rewards)?;
        state.advance();
    }
    let a = state.design();

    let cfg = LinRelConfig::default();
    let radius = cfg.radius(7, n, d);
    let sel = select_arms(&est, a, &catalog, radius)?;
    println!(
        "linrel: radius {radius:.4}, {} extreme points, {} inner products (2n^2d|B| = {}), joint space {}",
        sel.extreme_points,
        sel.evaluations,
        2 * n * n * d * m,
        m.pow(n as u32)
    );

    let oracle = oracle_best(&u0, a, &catalog)?;
    let best = expected_total_reward(&u0, a, &oracle)?;
    let picks = [
        ("linrel", sel.recommendation),
        ("thompson", select_arms_ts(&ts.sample_u(&mut rng)?, a, &catalog)?),
        ("regression", greedy_recommendation(est.u_hat(), a, &catalog)?),
    ];
    println!("oracle expected reward {best:.4}");
    for (name, rec) in &picks {
        let value = expected_total_reward(&u0, a, rec)?;
        println!("{name:>10}: expected reward {value:.4}, gap {:.4}", best - value);
    }
    Ok(())
}
