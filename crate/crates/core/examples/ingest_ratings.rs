//! Turning ratings with item categories and a friendship list into inherent
//! profiles and an influence matrix.
//!
//! Ratings are synthesized from hidden tastes so the recovered profiles can
//! be compared with the truth.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use social_bandits::data_pipeline::{ingest, IngestOptions};

fn main() -> social_bandits::Result<()> {
    let (users, items, d) = (6, 40, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tastes: Vec<Vec<f64>> = (0..users).map(|_| (0..d).map(|_| rng.random_range(-0.5..0.5)).collect()).collect();
    let cats: Vec<Vec<u8>> = (0..items)
        .map(|k| (0..d).map(|c| u8::from((k >> c) & 1 == 1 || k % d == c)).collect())
        .collect();

    let mut ratings = String::from("user,item,stars,f1,f2,f3\n");
    for (u, taste) in tastes.iter().enumerate() {
        for (k, cat) in cats.iter().enumerate() {
            let score: f64 = taste.iter().zip(cat).map(|(t, &c)| t * f64::from(c)).sum();
            let stars = (3.0 + 2.0 * score + rng.random_range(-0.4..0.4)).round().clamp(1.0, 5.0) as u8;
            writeln!(ratings, "user{u},item{k},{stars},{},{},{}", cat[0], cat[1], cat[2]).unwrap();
        }
    }
    let edges = "src,dst\nuser0,user1\nuser1,user2\nuser2,user0\nuser3,user4\nuser4,user5\nuser5,user3\nuser2,user3\n";

    let dir = tempfile::tempdir()?;
    let (rpath, epath) = (dir.path().join("ratings.csv"), dir.path().join("edges.csv"));
    std::fs::write(&rpath, ratings)?;
    std::fs::write(&epath, edges)?;
    let opts = IngestOptions { min_reviews: items, ..IngestOptions::default() };
    let out = ingest(&rpath, &epath, dir.path(), opts)?;

    println!("{} users kept, d = {}", out.users.len(), out.profiles.d());
    for (i, name) in out.users.iter().enumerate() {
        let idx: usize = name.trim_start_matches("user").parse().unwrap();
        let row: Vec<String> = out.profiles.row(i).iter().map(|x| format!("{x:+.2}")).collect();
        let truth: Vec<String> = tastes[idx].iter().map(|x| format!("{x:+.2}")).collect();
        println!("{name}: recovered [{}]  hidden [{}]", row.join(", "), truth.join(", "));
    }
    let row: Vec<String> = out.graph.matrix().row(2).iter().map(|x| format!("{x:.3}")).collect();
    println!("influence on user2: [{}]", row.join(", "));
    Ok(())
}
