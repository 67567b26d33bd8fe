//! Synthetic influence graphs: complete (CMP), Erdős–Rényi (ER) and
//! Barabási–Albert (BA). ER and BA edges get influence `1/deg(i)`.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::influence::InfluenceGraph;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("graph generators need n >= 2, got {n}"),
        });
    }
    Ok(())
}

/// `P_ij = 1/n` for all `n²` pairs, self-influence included.
pub fn complete(n: usize) -> Result<InfluenceGraph> {
    check_n(n)?;
    InfluenceGraph::new(DMatrix::from_element(n, n, 1.0 / n as f64), 0.0)
}

/// Row-normalized adjacency of an undirected simple graph. Isolated vertices
/// receive a self-loop so every row stays a distribution.
pub fn from_undirected_edges(n: usize, edges: &[(usize, usize)], teleport: f64) -> Result<InfluenceGraph> {
    let mut neighbours = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::IndexOutOfRange { index: a.max(b), len: n });
        }
        if a != b {
            neighbours[a].insert(b);
            neighbours[b].insert(a);
        }
    }
    let mut p = DMatrix::zeros(n, n);
    for (i, nb) in neighbours.iter().enumerate() {
        if nb.is_empty() {
            p[(i, i)] = 1.0;
        } else {
            let w = 1.0 / nb.len() as f64;
            for &j in nb {
                p[(i, j)] = w;
            }
        }
    }
    InfluenceGraph::new(p, teleport)
}

/// Erdős–Rényi graph with `p = ln n / n`, seeded.
pub fn erdos_renyi(n: usize, seed: u64) -> Result<InfluenceGraph> {
    check_n(n)?;
    erdos_renyi_with_p(n, (n as f64).ln() / n as f64, seed)
}

/// Erdős–Rényi graph with an explicit edge probability.
pub fn erdos_renyi_with_p(n: usize, p: f64, seed: u64) -> Result<InfluenceGraph> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("{p} is outside [0, 1]"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    from_undirected_edges(n, &edges, 0.0)
}

/// Attachment parameter `m = ⌈ln n⌉` used by [`barabasi_albert`].
pub fn ba_attachment(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(1)
}

/// Edge list of a preferential-attachment graph grown from an `m`-clique.
pub fn barabasi_albert_edges(n: usize, m: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("attachment {m} must be in [1, n) for n = {n}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut degree = vec![0usize; n];
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for new in m..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let total: usize = (0..new).filter(|v| !targets.contains(v)).map(|v| degree[v]).sum();
            let pick = if total == 0 {
                let free: Vec<usize> = (0..new).filter(|v| !targets.contains(v)).collect();
                free[rng.random_range(0..free.len())]
            } else {
                let mut ticket = rng.random_range(0..total);
                let mut chosen = None;
                for v in (0..new).filter(|v| !targets.contains(v)) {
                    if ticket < degree[v] {
                        chosen = Some(v);
                        break;
                    }
                    ticket -= degree[v];
                }
                chosen.expect("ticket below total degree")
            };
            targets.insert(pick);
        }
        for &t in &targets {
            edges.push((t, new));
            degree[t] += 1;
            degree[new] += 1;
        }
    }
    Ok(edges)
}

/// Barabási–Albert graph with `m = ⌈ln n⌉`, seeded.
pub fn barabasi_albert(n: usize, seed: u64) -> Result<InfluenceGraph> {
    check_n(n)?;
    let edges = barabasi_albert_edges(n, ba_attachment(n), seed)?;
    from_undirected_edges(n, &edges, 0.0)
}

/// Writes the nonzero entries of the influence matrix as `src,dst,weight`.
pub fn write_edge_csv(graph: &InfluenceGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["src", "dst", "weight"])?;
    let p = graph.matrix();
    for i in 0..graph.n() {
        for j in 0..graph.n() {
            if p[(i, j)] != 0.0 {
                writer.write_record([i.to_string(), j.to_string(), format!("{:.16e}", p[(i, j)])])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads an edge-list CSV (`src,dst,weight`, zero-based indices) into a dense
/// influence matrix. `n` defaults to one more than the largest index.
pub fn read_edge_csv(path: impl AsRef<Path>, n: Option<usize>, teleport: f64) -> Result<InfluenceGraph> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let parse_err = |reason: String| Error::Parse {
        source_name: path.display().to_string(),
        reason,
    };
    let mut entries = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(parse_err(format!("line {}: expected src,dst,weight", line + 2)));
        }
        let src: usize = record[0].parse().map_err(|e| parse_err(format!("line {}: {e}", line + 2)))?;
        let dst: usize = record[1].parse().map_err(|e| parse_err(format!("line {}: {e}", line + 2)))?;
        let w: f64 = record[2].parse().map_err(|e| parse_err(format!("line {}: {e}", line + 2)))?;
        entries.push((src, dst, w));
    }
    let inferred = entries.iter().map(|&(s, d, _)| s.max(d) + 1).max().unwrap_or(0);
    let n = n.unwrap_or(inferred);
    if inferred > n {
        return Err(Error::IndexOutOfRange { index: inferred - 1, len: n });
    }
    let mut p = DMatrix::zeros(n, n);
    for (s, d, w) in entries {
        p[(s, d)] += w;
    }
    InfluenceGraph::new(p, teleport)
}
