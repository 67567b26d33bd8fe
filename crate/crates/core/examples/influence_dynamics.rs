//! How inherent interests spread through the influence graph.
//!
//! Prints the row mass of `A(t)`, its distance to the fixed point `A∞`, and
//! checks that the random-adoption dynamics average out to `A(t)U⁰`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_bandits::graph_gen;
use social_bandits::influence::{evolve_expected, evolve_stochastic, fixpoint_a, SocialState};
use social_bandits::ProfileMatrix;

fn main() -> social_bandits::Result<()> {
    let (n, d, alpha) = (8, 3, 0.1);
    let graph = graph_gen::erdos_renyi(n, 7)?;
    let a_inf = fixpoint_a(&graph, alpha)?;

    println!("{:>4} {:>12} {:>14} {:>14}", "t", "row sum", "1-(1-a)^(t+1)", "|A(t)-A_inf|");
    let mut state = SocialState::new(&graph, alpha)?;
    for t in 0..=60 {
        if t % 10 == 0 {
            let gap = (state.design() - &a_inf).amax();
            let want = 1.0 - (1.0 - alpha).powi(t + 1);
            println!("{t:>4} {:>12.6} {want:>14.6} {gap:>14.3e}", state.design().row(0).sum());
        }
        state.advance();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u0 = ProfileMatrix::random_uniform(n, d, &mut rng);
    let horizon = 5;
    let expected = evolve_expected(&u0, &SocialState::build(&graph, alpha, horizon)?)?;

    // Start from zero profiles: after t+1 random steps the mean is A(t)U⁰.
    let draws = 20_000;
    let mut mean = DMatrix::zeros(n, d);
    for _ in 0..draws {
        let mut cur = ProfileMatrix::zeros(n, d);
        for _ in 0..=horizon {
            cur = evolve_stochastic(&cur, &u0, alpha, &graph, &mut rng)?;
        }
        mean += cur.as_matrix();
    }
    mean /= draws as f64;
    println!(
        "\nstochastic mean vs A({horizon})U0 over {draws} draws: max deviation {:.2e}",
        (mean - expected.as_matrix()).amax()
    );
    Ok(())
}
