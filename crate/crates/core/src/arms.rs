//! The recommendation set `B` and the per-user linear maximization
//! `max_{v ∈ B} zᵀv` that every policy reduces to.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dim, Error, Result};

/// Membership slack for the unit ball.
pub const BALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Catalog {
    /// A finite list of item profiles.
    Finite(Vec<DVector<f64>>),
    /// The Euclidean unit ball in `R^d`.
    UnitBall { dim: usize },
}

/// Outcome of a linear maximization over the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmChoice {
    pub item: DVector<f64>,
    pub value: f64,
    /// Catalog index of the item (finite catalogs only).
    pub index: Option<usize>,
}

impl Catalog {
    pub fn finite(items: Vec<DVector<f64>>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyCatalog)?;
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "items must have at least one dimension".into(),
            });
        }
        for item in &items {
            check_dim("catalog item dimension", d, item.len())?;
            if item.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("catalog item"));
            }
        }
        Ok(Self::Finite(items))
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "unit ball needs d >= 1".into(),
            });
        }
        Ok(Self::UnitBall { dim })
    }

    /// `m` items sampled uniformly from `[0, 1]^d`.
    pub fn random_finite<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Result<Self> {
        let items = (0..m)
            .map(|_| DVector::from_fn(d, |_, _| rng.random::<f64>()))
            .collect();
        Self::finite(items)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Finite(items) => items[0].len(),
            Self::UnitBall { dim } => *dim,
        }
    }

    /// Number of items, `None` for the ball.
    pub fn len(&self) -> Option<usize> {
        match self {
            Self::Finite(items) => Some(items.len()),
            Self::UnitBall { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn contains(&self, v: &DVector<f64>) -> bool {
        match self {
            Self::Finite(items) => items.iter().any(|item| item == v),
            Self::UnitBall { dim } => v.len() == *dim && v.norm() <= 1.0 + BALL_TOL,
        }
    }

    /// `argmax_{v ∈ B} zᵀv`; see [`Catalog::linmax_counted`].
    pub fn linmax(&self, z: &[f64]) -> Result<ArmChoice> {
        let mut evals = 0;
        self.linmax_counted(z, &mut evals)
    }

    /// `argmax_{v ∈ B} zᵀv`, adding the number of candidate inner products
    /// evaluated to `evals`.
    ///
    /// Finite catalogs are scanned with ties going to the lowest index. On the
    /// ball the maximizer is `z/‖z‖` and `e₁` when `z = 0`.
    pub fn linmax_counted(&self, z: &[f64], evals: &mut u64) -> Result<ArmChoice> {
        check_dim("linmax direction", self.dim(), z.len())?;
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linmax direction"));
        }
        match self {
            Self::Finite(items) => {
                let mut best = 0;
                let mut best_value = f64::NEG_INFINITY;
                for (k, item) in items.iter().enumerate() {
                    let value: f64 = item.iter().zip(z).map(|(a, b)| a * b).sum();
                    *evals += 1;
                    if value > best_value {
                        best = k;
                        best_value = value;
                    }
                }
                Ok(ArmChoice {
                    item: items[best].clone(),
                    value: best_value,
                    index: Some(best),
                })
            }
            Self::UnitBall { dim } => {
                *evals += 1;
                let zv = DVector::from_column_slice(z);
                let norm = zv.norm();
                if norm > 0.0 {
                    Ok(ArmChoice {
                        item: zv / norm,
                        value: norm,
                        index: None,
                    })
                } else {
                    let mut e1 = DVector::zeros(*dim);
                    e1[0] = 1.0;
                    Ok(ArmChoice {
                        item: e1,
                        value: 0.0,
                        index: None,
                    })
                }
            }
        }
    }

    /// Loads a finite catalog: one item per line, comma-separated decimals.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut items = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let values = record
                .iter()
                .map(|field| field.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    source_name: path.display().to_string(),
                    reason: format!("line {}: {e}", line + 1),
                })?;
            items.push(DVector::from_vec(values));
        }
        Self::finite(items)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let Self::Finite(items) = self else {
            return Err(Error::Unsupported(
                "only finite catalogs can be written as CSV".into(),
            ));
        };
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)?;
        for item in items {
            writer.write_record(item.iter().map(|x| format!("{x:.16e}")))?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// `d` items spanning `R^d`, recommended to every user during initialization.
///
/// The ball uses the standard basis. Finite catalogs are selected greedily by
/// Gram volume: each step adds the item whose residual against the span of
/// the items already picked is largest, which is the item maximizing the Gram
/// determinant of the enlarged set.
pub fn spanning_init(catalog: &Catalog, d: usize) -> Result<Vec<DVector<f64>>> {
    check_dim("spanning set dimension", catalog.dim(), d)?;
    match catalog {
        Catalog::UnitBall { .. } => Ok((0..d)
            .map(|k| {
                let mut e = DVector::zeros(d);
                e[k] = 1.0;
                e
            })
            .collect()),
        Catalog::Finite(items) => {
            let scale = items.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
            let mut picked = Vec::with_capacity(d);
            let mut residuals: Vec<DVector<f64>> = items.clone();
            for rank in 0..d {
                let mut best = None;
                let mut best_norm = tol;
                for (k, r) in residuals.iter().enumerate() {
                    let norm = r.norm();
                    if norm > best_norm {
                        best = Some(k);
                        best_norm = norm;
                    }
                }
                let Some(k) = best else {
                    return Err(Error::RankDeficient { rank, dim: d });
                };
                let q = &residuals[k] / best_norm;
                for r in residuals.iter_mut() {
                    let c = q.dot(r);
                    r.axpy(-c, &q, 1.0);
                }
                picked.push(items[k].clone());
            }
            Ok(picked)
        }
    }
}

/// Per-user greedy recommendation for a stacked parameter `u`: row `i` of the
/// result maximizes the `i`-th block of `Lᵀu = vec(A·mat(u))` over the catalog.
///
/// Returns the rows and the summed objective `uᵀLv`.
pub fn greedy_rows(
    z: &DMatrix<f64>,
    catalog: &Catalog,
    evals: &mut u64,
) -> Result<(DMatrix<f64>, f64)> {
    let (n, d) = z.shape();
    check_dim("catalog dimension", d, catalog.dim())?;
    let mut rows = DMatrix::zeros(n, d);
    let mut total = 0.0;
    for i in 0..n {
        let zi: Vec<f64> = z.row(i).iter().copied().collect();
        let choice = catalog.linmax_counted(&zi, evals)?;
        rows.set_row(i, &choice.item.transpose());
        total += choice.value;
    }
    Ok((rows, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn ball_normalizes() {
        let ball = Catalog::unit_ball(2).unwrap();
        let c = ball.linmax(&[3.0, 4.0]).unwrap();
        assert!((c.item - v(&[0.6, 0.8])).norm() < 1e-15);
        assert!((c.value - 5.0).abs() < 1e-15);
        let c = ball.linmax(&[0.0, 0.0]).unwrap();
        assert_eq!(c.item, v(&[1.0, 0.0]));
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn finite_scan() {
        let cat = Catalog::finite(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.7, 0.7])]).unwrap();
        let c = cat.linmax(&[1.0, 1.0]).unwrap();
        assert_eq!(c.index, Some(2));
        assert!((c.value - 1.4).abs() < 1e-15);
        // tie: lowest index
        let c = cat.linmax(&[1.0, 0.0]).unwrap();
        assert_eq!(c.index, Some(0));
        let mut evals = 0;
        cat.linmax_counted(&[0.2, 0.1], &mut evals).unwrap();
        assert_eq!(evals, 3);
    }

    #[test]
    fn empty_and_mismatched() {
        assert!(matches!(Catalog::finite(vec![]), Err(Error::EmptyCatalog)));
        let cat = Catalog::unit_ball(3).unwrap();
        assert!(cat.linmax(&[1.0]).is_err());
        assert!(cat.linmax(&[f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn spanning_sets() {
        let ball = Catalog::unit_ball(3).unwrap();
        let s = spanning_init(&ball, 3).unwrap();
        assert_eq!(s[1], v(&[0.0, 1.0, 0.0]));

        let h = 1.0 / 2f64.sqrt();
        let cat = Catalog::finite(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[h, h])]).unwrap();
        let s = spanning_init(&cat, 2).unwrap();
        assert_eq!(s, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);

        let line = Catalog::finite(vec![v(&[1.0, 2.0]), v(&[2.0, 4.0]), v(&[-1.0, -2.0])]).unwrap();
        assert!(matches!(
            spanning_init(&line, 2),
            Err(Error::RankDeficient { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("items.csv");
        let cat = Catalog::finite(vec![v(&[0.1, 0.2]), v(&[1.0 / 3.0, -2.5])]).unwrap();
        cat.write_csv(&path).unwrap();
        assert_eq!(Catalog::load_csv(&path).unwrap(), cat);
    }
}
