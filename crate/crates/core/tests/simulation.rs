//! End-to-end runs through the shared simulation loop.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::DVector;

use social_bandits::arms::Catalog;
use social_bandits::environment::NoiseModel;
use social_bandits::estimation::EstimatorState;
use social_bandits::graph_gen;
use social_bandits::influence::{apply_l_transpose, ProfileMatrix};
use social_bandits::policy::baselines::{run_rand, run_regression};
use social_bandits::policy::linrel::run_linrel;
use social_bandits::policy::linucb::{build_h0, round_y, run_linucb, sdp_solve};
use social_bandits::policy::thompson::run_thompson;
use social_bandits::policy::{LinRelConfig, LinUcbConfig, ThompsonConfig, ThompsonSampling};
use social_bandits::sim::stream_rng;
use social_bandits::{simulate, Dynamics, RoundRecord, Scenario};

fn scenario(n: usize, d: usize, catalog: Option<usize>, sigma: f64, dynamics: Dynamics, seed: u64) -> Scenario {
    let mut inst = stream_rng(seed, 0);
    let profiles = ProfileMatrix::random_uniform(n, d, &mut inst);
    let catalog = match catalog {
        Some(m) => Catalog::random_finite(m, d, &mut inst).unwrap(),
        None => Catalog::unit_ball(d).unwrap(),
    };
    let g = graph_gen::erdos_renyi(n, seed).unwrap();
    Scenario::new(g, profiles, catalog, 0.05, NoiseModel::new(sigma).unwrap(), dynamics, seed).unwrap()
}

fn strip_time(mut records: Vec<RoundRecord>) -> Vec<RoundRecord> {
    records.iter_mut().for_each(|r| r.wall_ns = 0);
    records
}

fn final_regret(records: &[RoundRecord]) -> f64 {
    records.last().unwrap().cum_regret
}

#[test]
fn cumulative_is_prefix_sum() {
    let records = run_regression(&scenario(4, 3, Some(10), 1.0, Dynamics::Expected, 1), 1e-6, 30).unwrap();
    let mut acc = 0.0;
    for r in &records {
        acc += r.inst_regret;
        assert!((acc - r.cum_regret).abs() < 1e-9);
        assert!(r.inst_regret >= -1e-9);
    }
}

#[test]
fn reruns_are_identical() {
    for dynamics in [Dynamics::Expected, Dynamics::Stochastic, Dynamics::Fixpoint] {
        let s = scenario(5, 3, Some(20), 1.0, dynamics, 9);
        let cfg = LinRelConfig::default();
        assert_eq!(strip_time(run_linrel(&s, cfg, 20).unwrap()), strip_time(run_linrel(&s, cfg, 20).unwrap()));
        let tc = ThompsonConfig::default();
        assert_eq!(
            strip_time(run_thompson(&s, tc, 20).unwrap()),
            strip_time(run_thompson(&s, tc, 20).unwrap())
        );
        assert_eq!(strip_time(run_rand(&s, 20).unwrap()), strip_time(run_rand(&s, 20).unwrap()));
    }
}

#[test]
fn noiseless_tail_is_zero_for_thompson_with_tight_posterior() {
    for seed in 0..5 {
        let s = scenario(4, 3, Some(10), 0.0, Dynamics::Expected, seed);
        let mut policy =
            ThompsonSampling::new(s.n(), s.catalog.clone(), 1e-6, ThompsonConfig::default(), s.policy_rng()).unwrap();
        let records = simulate(&s, &mut policy, 30).unwrap();
        assert!(final_regret(&records).abs() < 1e-9, "seed {seed}: {}", final_regret(&records));
    }
}

#[test]
fn bandits_beat_random() {
    let mut sums = [0.0; 3];
    for seed in 0..5 {
        let s = scenario(10, 5, Some(100), 1.0, Dynamics::Expected, seed);
        sums[0] += final_regret(&run_linrel(&s, LinRelConfig::default(), 100).unwrap());
        sums[1] += final_regret(&run_thompson(&s, ThompsonConfig::default(), 100).unwrap());
        sums[2] += final_regret(&run_rand(&s, 100).unwrap());
    }
    assert!(sums[0] < sums[2], "linrel {} vs rand {}", sums[0], sums[2]);
    assert!(sums[1] < sums[2], "thompson {} vs rand {}", sums[1], sums[2]);
}

#[test]
fn zero_radius_linrel_is_regression() {
    for seed in 0..4 {
        let s = scenario(4, 3, Some(12), 0.5, Dynamics::Expected, seed);
        let cfg = LinRelConfig::new(0.1, 0.0, 1e-6).unwrap();
        let a = strip_time(run_linrel(&s, cfg, 40).unwrap());
        let b = strip_time(run_regression(&s, 1e-6, 40).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn degenerate_thompson_matches_regression() {
    // σ = 1e-7 with unit prior variance is ridge λ = σ²/κ = 1e-14 with a
    // posterior spread far below any gap between arms.
    for seed in 0..4 {
        let s = scenario(3, 2, Some(10), 0.3, Dynamics::Expected, seed);
        let cfg = ThompsonConfig::default();
        let mut ts = ThompsonSampling::new(s.n(), s.catalog.clone(), 1e-7, cfg, s.policy_rng()).unwrap();
        let a = simulate(&s, &mut ts, 30).unwrap();
        let b = run_regression(&s, 1e-14, 30).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.expected_total - y.expected_total).abs() < 1e-9, "seed {seed} t {}", x.t);
        }
    }
}

#[test]
fn single_item_catalog_has_no_regret() {
    let s = scenario(3, 1, Some(1), 1.0, Dynamics::Expected, 4);
    assert_eq!(final_regret(&run_rand(&s, 25).unwrap()), 0.0);
}

#[test]
fn linucb_without_exploration_is_greedy() {
    let mut r = rng(5);
    let (n, d) = (3, 2);
    let ball = Catalog::unit_ball(d).unwrap();
    for _ in 0..10 {
        let est: EstimatorState = trained_estimator(n, d, &ball, 4, &mut r);
        let a = stochastic(n, &mut r);
        let problem = build_h0(est.u_hat(), &est.covariance().unwrap(), &a, 0.0).unwrap();
        let sol = sdp_solve(&problem, 5000, 1e-12).unwrap();
        let rec = round_y(&sol.y, n, d).unwrap();
        let z = apply_l_transpose(&a, est.u_hat().as_slice(), d).unwrap();
        for i in 0..n {
            let block = DVector::from_column_slice(&z.as_slice()[i * d..(i + 1) * d]);
            let want = &block / block.norm();
            assert!((rec.item(i) - &want).amax() < 1e-3, "{} vs {}", rec.item(i), want);
        }
    }
}

#[test]
fn tiny_linucb_run_is_fast_and_deterministic() {
    let s = scenario(2, 2, None, 1.0, Dynamics::Expected, 3);
    let start = Instant::now();
    let a = run_linucb(&s, LinUcbConfig::default(), 100).unwrap();
    assert!(start.elapsed() < Duration::from_secs(30), "{:?}", start.elapsed());
    assert_eq!(a.len(), 100);
    let b = run_linucb(&s, LinUcbConfig::default(), 100).unwrap();
    assert_eq!(strip_time(a.clone()), strip_time(b));
    let rand = run_rand(&s, 100).unwrap();
    assert!(final_regret(&a) < final_regret(&rand));
}

#[test]
fn stochastic_regret_uses_realized_profiles() {
    let s = scenario(4, 2, Some(8), 0.5, Dynamics::Stochastic, 2);
    let records = run_regression(&s, 1e-6, 30).unwrap();
    assert!(records.iter().all(|r| r.inst_regret >= -1e-9));
}
