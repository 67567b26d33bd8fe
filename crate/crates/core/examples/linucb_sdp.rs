//! The LinUCB arm-selection problem over the unit ball is a nonconvex
//! quadratic program; this solves its semidefinite relaxation, rounds the
//! result, and compares it with random feasible recommendations.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use social_bandits::arms::Catalog;
use social_bandits::estimation::EstimatorState;
use social_bandits::graph_gen;
use social_bandits::influence::SocialState;
use social_bandits::policy::linucb::{build_h0, linucb_objective, round_y, run_linucb, sdp_solve, LinUcbConfig};
use social_bandits::policy::baselines::run_rand;
use social_bandits::{Dynamics, NoiseModel, ProfileMatrix, Recommendation, Scenario};

fn unit_rows(n: usize, d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    for mut row in m.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    m
}

fn main() -> social_bandits::Result<()> {
    let (n, d) = (3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let graph = graph_gen::complete(n)?;
    let a = SocialState::build(&graph, 0.2, 4)?.design().clone();

    let mut est = EstimatorState::new(n, d, 1e-2)?;
    for _ in 0..5 {
        let rec = Recommendation::new(unit_rows(n, d, &mut rng), "warmup");
        let rewards = nalgebra::DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        est.ingest_round(&a, &rec, &rewards)?;
    }

    let problem = build_h0(est.u_hat(), &est.covariance()?, &a, 1.0)?;
    let sol = sdp_solve(&problem, 5000, 1e-10)?;
    let rounded = round_y(&sol.y, n, d)?;
    let random_best = (0..10_000)
        .map(|_| linucb_objective(&problem, &Recommendation::new(unit_rows(n, d, &mut rng), "random")))
        .fold(f64::NEG_INFINITY, f64::max);
    println!("relaxation value      {:.5} ({} iterations)", sol.value, sol.iterations);
    println!("rounded arms score    {:.5}", linucb_objective(&problem, &rounded));
    println!("best of 10^4 random   {random_best:.5}");

    let scenario = Scenario::new(
        graph,
        ProfileMatrix::random_uniform(n, d, &mut rng),
        Catalog::unit_ball(d)?,
        0.1,
        NoiseModel::new(0.5)?,
        Dynamics::Expected,
        5,
    )?;
    let linucb = run_linucb(&scenario, LinUcbConfig::default(), 60)?;
    let rand = run_rand(&scenario, 60)?;
    println!(
        "R(60): linucb {:.3}, rand {:.3}",
        linucb.last().unwrap().cum_regret,
        rand.last().unwrap().cum_regret
    );
    Ok(())
}
