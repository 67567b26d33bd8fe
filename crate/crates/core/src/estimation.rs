//! Ridge least-squares estimation of the stacked inherent profiles `u₀`.
//!
//! The precision `Z = λI + Σ_τ XᵀX` and the moment vector `b = Σ_τ Xᵀr` are
//! accumulated from contexts `x_i = a_i ⊗ v_i` without ever forming `X`.

use nalgebra::{DMatrix, DVector};

use crate::environment::Recommendation;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{spd_inverse, spd_solve};

/// Default ridge regularization.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EstimatorState {
    n: usize,
    d: usize,
    lambda: f64,
    z: DMatrix<f64>,
    b: DVector<f64>,
    u_hat: DVector<f64>,
}

impl EstimatorState {
    pub fn new(n: usize, d: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("{lambda} must be positive"),
            });
        }
        let nd = n * d;
        if nd == 0 {
            return Err(Error::InvalidParameter {
                name: "n*d",
                reason: "estimator needs at least one coordinate".into(),
            });
        }
        Ok(Self {
            n,
            d,
            lambda,
            z: DMatrix::identity(nd, nd) * lambda,
            b: DVector::zeros(nd),
            u_hat: DVector::zeros(nd),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn moments(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn u_hat(&self) -> &DVector<f64> {
        &self.u_hat
    }

    /// Adds one round of contexts and rewards, then refreshes `û₀ = Z⁻¹b`.
    pub fn ingest_round(&mut self, a: &DMatrix<f64>, v: &Recommendation, r: &DVector<f64>) -> Result<()> {
        check_dim("design rows", self.n, a.nrows())?;
        check_dim("reward count", self.n, r.len())?;
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rewards"));
        }
        add_context_gram(&mut self.z, a, v, 1.0)?;
        add_context_moments(&mut self.b, a, v, r, 1.0)?;
        self.u_hat = spd_solve(&self.z, &self.b)?;
        Ok(())
    }

    /// `Σ = Z⁻¹`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        spd_inverse(&self.z)
    }
}

/// `Z += w · Σ_i x_i x_iᵀ` with `x_i x_iᵀ = (a_i a_iᵀ) ⊗ (v_i v_iᵀ)`.
pub(crate) fn add_context_gram(
    z: &mut DMatrix<f64>,
    a: &DMatrix<f64>,
    v: &Recommendation,
    weight: f64,
) -> Result<()> {
    let n = a.nrows();
    let d = v.d();
    check_dim("recommendation rows", n, v.n())?;
    check_dim("precision size", n * d, z.nrows())?;
    for i in 0..n {
        let item = v.items.row(i);
        let vv = item.transpose() * item;
        for j in 0..n {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for l in 0..n {
                let coef = weight * aij * a[(i, l)];
                if coef == 0.0 {
                    continue;
                }
                let mut block = z.view_mut((j * d, l * d), (d, d));
                block += &vv * coef;
            }
        }
    }
    Ok(())
}

/// `b += w · Σ_i r_i x_i`.
pub(crate) fn add_context_moments(
    b: &mut DVector<f64>,
    a: &DMatrix<f64>,
    v: &Recommendation,
    r: &DVector<f64>,
    weight: f64,
) -> Result<()> {
    let n = a.nrows();
    let d = v.d();
    check_dim("recommendation rows", n, v.n())?;
    check_dim("moment size", n * d, b.len())?;
    for i in 0..n {
        for j in 0..n {
            let coef = weight * r[i] * a[(i, j)];
            if coef == 0.0 {
                continue;
            }
            for k in 0..d {
                b[j * d + k] += coef * v.items[(i, k)];
            }
        }
    }
    Ok(())
}
