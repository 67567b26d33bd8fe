//! Ratings + social edges → inherent profiles `U⁰` and influence matrix `P`.
//!
//! Stars are mapped linearly onto `[-1, 1]` via `(s − 3)/2` and each retained
//! user's profile is the ridge solution of mapped rating on item category
//! indicators. The influence matrix is the retained subgraph with `1/deg`
//! rows plus a small teleport term.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph_gen::from_undirected_edges;
use crate::influence::{InfluenceGraph, ProfileMatrix};
use crate::linalg::spd_solve;

pub const DEFAULT_MIN_REVIEWS: usize = 1500;
pub const DEFAULT_PROFILE_LAMBDA: f64 = 1e-3;
pub const DEFAULT_TELEPORT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub user: String,
    pub item: String,
    pub stars: u8,
    pub features: Vec<f64>,
}

/// A validated set of ratings sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsTable {
    d: usize,
    rows: Vec<Rating>,
}

impl RatingsTable {
    pub fn new(d: usize, rows: Vec<Rating>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "ratings need at least one feature column".into(),
            });
        }
        for (i, r) in rows.iter().enumerate() {
            if !(1..=5).contains(&r.stars) {
                return Err(Error::InvalidParameter {
                    name: "stars",
                    reason: format!("row {i}: {} is outside 1..=5", r.stars),
                });
            }
            if r.features.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "rating feature vector",
                    expected: d,
                    actual: r.features.len(),
                });
            }
            if r.features.iter().all(|&f| f == 0.0) {
                return Err(Error::InvalidParameter {
                    name: "features",
                    reason: format!("row {i} (item {}) has no nonzero category", r.item),
                });
            }
        }
        Ok(Self { d, rows })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Rating] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct user ids in sorted order.
    pub fn users(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.user.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.user.clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// Reads `user,item,stars,f1,...,fd`.
pub fn read_ratings_csv(path: impl AsRef<Path>) -> Result<RatingsTable> {
    let path = path.as_ref();
    let source_name = path.display().to_string();
    let parse_err = |reason: String| Error::Parse {
        source_name: source_name.clone(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 4 || &headers[0] != "user" || &headers[1] != "item" || &headers[2] != "stars" {
        return Err(parse_err("expected header user,item,stars,f1,...,fd".into()));
    }
    let d = headers.len() - 3;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let stars = record[2]
            .parse::<u8>()
            .map_err(|e| parse_err(format!("line {line}: stars: {e}")))?;
        let features = (3..record.len())
            .map(|k| {
                record[k]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("line {line}: f{}: {e}", k - 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(Rating {
            user: record[0].to_string(),
            item: record[1].to_string(),
            stars,
            features,
        });
    }
    RatingsTable::new(d, rows)
}

/// Reads an undirected `src,dst` user-id edge list.
pub fn read_social_edges_csv(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "src" || &headers[1] != "dst" {
        return Err(Error::Parse {
            source_name: path.display().to_string(),
            reason: "expected header src,dst".into(),
        });
    }
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record?;
        edges.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(edges)
}

pub fn filter_users(table: &RatingsTable, min_reviews: usize) -> RatingsTable {
    let counts = table.counts();
    let rows = table
        .rows
        .iter()
        .filter(|r| counts[&r.user] >= min_reviews)
        .cloned()
        .collect();
    RatingsTable { d: table.d, rows }
}

pub fn map_stars(stars: u8) -> f64 {
    (stars as f64 - 3.0) / 2.0
}

/// Per-user ridge regression, users in sorted id order.
pub fn regress_profiles(table: &RatingsTable, lambda: f64) -> Result<(Vec<String>, ProfileMatrix)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("ridge parameter must be positive, got {lambda}"),
        });
    }
    let users = table.users();
    let d = table.d;
    let mut by_user: HashMap<&str, Vec<&Rating>> = HashMap::new();
    for r in &table.rows {
        by_user.entry(r.user.as_str()).or_default().push(r);
    }
    let profiles = users
        .par_iter()
        .map(|user| {
            let mut gram = DMatrix::identity(d, d) * lambda;
            let mut rhs = DVector::zeros(d);
            for r in &by_user[user.as_str()] {
                let x = DVector::from_column_slice(&r.features);
                gram.ger(1.0, &x, &x, 1.0);
                rhs.axpy(map_stars(r.stars), &x, 1.0);
            }
            spd_solve(&gram, &rhs)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut u0 = DMatrix::zeros(users.len(), d);
    for (i, p) in profiles.iter().enumerate() {
        u0.set_row(i, &p.transpose());
    }
    Ok((users, ProfileMatrix::new(u0)?))
}

/// Restricts the social graph to `users` and applies the 1/deg rule.
pub fn build_social_p(edges: &[(String, String)], users: &[String], teleport: f64) -> Result<InfluenceGraph> {
    let index: HashMap<&str, usize> = users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let local: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|(a, b)| Some((*index.get(a.as_str())?, *index.get(b.as_str())?)))
        .collect();
    from_undirected_edges(users.len(), &local, teleport)
}

pub fn write_matrix_csv(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        writer.write_record(m.row(i).iter().map(|x| format!("{x:.16e}")))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let parse_err = |reason: String| Error::Parse {
        source_name: path.display().to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(format!("row {rows} has {} columns, expected {c}", record.len())))
            }
            _ => {}
        }
        for field in record.iter() {
            data.push(field.parse::<f64>().map_err(|e| parse_err(format!("row {rows}: {e}")))?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err("empty matrix".into()))?;
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    pub min_reviews: usize,
    pub lambda: f64,
    pub teleport: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            min_reviews: DEFAULT_MIN_REVIEWS,
            lambda: DEFAULT_PROFILE_LAMBDA,
            teleport: DEFAULT_TELEPORT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub users: Vec<String>,
    pub profiles: ProfileMatrix,
    pub graph: InfluenceGraph,
    pub u0_path: PathBuf,
    pub p_path: PathBuf,
    pub users_path: PathBuf,
}

/// Full pipeline: read, filter, regress, build `P`, and write `u0.csv`,
/// `p.csv` and `users.csv` into `out_dir`.
pub fn ingest(
    ratings: impl AsRef<Path>,
    edges: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    opts: IngestOptions,
) -> Result<IngestOutput> {
    let table = filter_users(&read_ratings_csv(ratings)?, opts.min_reviews);
    if table.is_empty() {
        return Err(Error::InvalidParameter {
            name: "min_reviews",
            reason: format!("no user has at least {} ratings", opts.min_reviews),
        });
    }
    let edges = read_social_edges_csv(edges)?;
    let (users, profiles) = regress_profiles(&table, opts.lambda)?;
    let graph = build_social_p(&edges, &users, opts.teleport)?;

    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let u0_path = out_dir.join("u0.csv");
    let p_path = out_dir.join("p.csv");
    let users_path = out_dir.join("users.csv");
    write_matrix_csv(profiles.as_matrix(), &u0_path)?;
    write_matrix_csv(graph.matrix(), &p_path)?;
    let mut writer = csv::Writer::from_path(&users_path)?;
    writer.write_record(["index", "user"])?;
    for (i, u) in users.iter().enumerate() {
        writer.write_record([i.to_string(), u.clone()])?;
    }
    writer.flush()?;
    Ok(IngestOutput {
        users,
        profiles,
        graph,
        u0_path,
        p_path,
        users_path,
    })
}
