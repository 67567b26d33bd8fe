//! The three synthetic influence graphs, their degree profiles, and an edge
//! list round trip.

use social_bandits::graph_gen;
use social_bandits::influence::fixpoint_a;
use social_bandits::InfluenceGraph;

fn describe(name: &str, g: &InfluenceGraph) -> social_bandits::Result<()> {
    let n = g.n();
    let degrees: Vec<usize> = (0..n)
        .map(|i| g.matrix().row(i).iter().filter(|&&w| w > 0.0).count())
        .collect();
    let max = degrees.iter().max().unwrap();
    let mean = degrees.iter().sum::<usize>() as f64 / n as f64;
    // Column sums of A∞ measure how much each user shapes everyone else.
    let a_inf = fixpoint_a(g, 0.05)?;
    let reach: Vec<f64> = (0..n).map(|j| a_inf.column(j).sum()).collect();
    let top = reach.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("{name:>4}: mean out-degree {mean:6.2}, max {max:3}, largest influence mass {top:.3}");
    Ok(())
}

fn main() -> social_bandits::Result<()> {
    let n = 200;
    describe("cmp", &graph_gen::complete(n)?)?;
    describe("er", &graph_gen::erdos_renyi(n, 1)?)?;
    let ba = graph_gen::barabasi_albert(n, 1)?;
    describe("ba", &ba)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("ba.csv");
    graph_gen::write_edge_csv(&ba, &path)?;
    let back = graph_gen::read_edge_csv(&path, Some(n), 0.0)?;
    println!(
        "edge list round trip: {} lines, max difference {:.1e}",
        std::fs::read_to_string(&path)?.lines().count(),
        (back.matrix() - ba.matrix()).amax()
    );
    Ok(())
}
