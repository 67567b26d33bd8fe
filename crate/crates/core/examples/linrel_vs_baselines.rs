//! Cumulative regret of LinREL, Thompson sampling and the two baselines on
//! one synthetic world with a finite catalog.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_bandits::arms::Catalog;
use social_bandits::graph_gen;
use social_bandits::policy::baselines::{run_rand, run_regression};
use social_bandits::policy::linrel::{run_linrel, LinRelConfig};
use social_bandits::policy::thompson::{run_thompson, ThompsonConfig};
use social_bandits::{Dynamics, NoiseModel, ProfileMatrix, RoundRecord, Scenario};

fn main() -> social_bandits::Result<()> {
    let (n, d, horizon) = (10, 5, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let profiles = ProfileMatrix::random_uniform(n, d, &mut rng);
    let catalog = Catalog::random_finite(100, d, &mut rng)?;
    let scenario = Scenario::new(
        graph_gen::complete(n)?,
        profiles,
        catalog,
        0.05,
        NoiseModel::new(1.0)?,
        Dynamics::Expected,
        11,
    )?;

    let runs: Vec<(&str, Vec<RoundRecord>)> = vec![
        ("linrel", run_linrel(&scenario, LinRelConfig::default(), horizon)?),
        ("thompson", run_thompson(&scenario, ThompsonConfig::default(), horizon)?),
        ("regression", run_regression(&scenario, 1e-6, horizon)?),
        ("rand", run_rand(&scenario, horizon)?),
    ];

    print!("{:>5}", "t");
    for (name, _) in &runs {
        print!(" {name:>11}");
    }
    println!();
    for t in [1, 10, 25, 50, 75, 100] {
        print!("{t:>5}");
        for (_, records) in &runs {
            print!(" {:>11.2}", records[t - 1].cum_regret);
        }
        println!();
    }
    Ok(())
}
