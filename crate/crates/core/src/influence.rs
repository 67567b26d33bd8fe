//! Social-influence dynamics: the influence matrix `P`, the design matrix
//! `A(t) = α Σ_{k≤t} ((1−α)P)^k`, its fixed point, and the implicit
//! Kronecker operator `L(t) = A(t)ᵀ ⊗ I_d`.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{mat_rows, vec_rows};

/// Tolerance on the row sums of a stochastic matrix.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic influence matrix over `n` users.
///
/// `P[i][j]` is the probability that user `i` adopts the profile of user `j`.
/// A positive `teleport` blends in the uniform matrix, `(1−τ)P + τ/n`, which
/// makes every entry strictly positive. The stored matrix is the blended one.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    p: DMatrix<f64>,
    teleport: f64,
}

impl InfluenceGraph {
    pub fn new(p: DMatrix<f64>, teleport: f64) -> Result<Self> {
        let n = p.nrows();
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "influence graph needs at least one user".into(),
            });
        }
        check_dim("influence matrix columns", n, p.ncols())?;
        if !(0.0..1.0).contains(&teleport) {
            return Err(Error::InvalidParameter {
                name: "teleport",
                reason: format!("{teleport} is outside [0, 1)"),
            });
        }
        validate_stochastic(&p)?;
        let p = if teleport > 0.0 {
            p * (1.0 - teleport) + DMatrix::from_element(n, n, teleport / n as f64)
        } else {
            p
        };
        Ok(Self { p, teleport })
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    /// The effective (teleport-blended) influence matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn teleport(&self) -> f64 {
        self.teleport
    }
}

fn validate_stochastic(p: &DMatrix<f64>) -> Result<()> {
    for i in 0..p.nrows() {
        let mut sum = 0.0;
        for j in 0..p.ncols() {
            let value = p[(i, j)];
            if !value.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&value) {
                return Err(Error::ProbabilityOutOfRange {
                    row: i,
                    col: j,
                    value,
                });
            }
            sum += value;
        }
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::NotRowStochastic { row: i, sum });
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{alpha} is outside (0, 1]"),
        })
    }
}

/// The time-varying design `A(t)` together with the cached power
/// `((1−α)P)^t`, so that moving to `t+1` costs one `n x n` product.
#[derive(Debug, Clone)]
pub struct SocialState {
    alpha: f64,
    t: usize,
    a: DMatrix<f64>,
    p_pow: DMatrix<f64>,
    step: DMatrix<f64>,
}

impl SocialState {
    /// State at `t = 0`, where `A(0) = αI`.
    pub fn new(graph: &InfluenceGraph, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let n = graph.n();
        Ok(Self {
            alpha,
            t: 0,
            a: DMatrix::identity(n, n) * alpha,
            p_pow: DMatrix::identity(n, n),
            step: graph.matrix() * (1.0 - alpha),
        })
    }

    /// Builds `A(t)` by advancing from `t = 0`.
    pub fn build(graph: &InfluenceGraph, alpha: f64, t: usize) -> Result<Self> {
        let mut state = Self::new(graph, alpha)?;
        for _ in 0..t {
            state.advance();
        }
        Ok(state)
    }

    /// `A(t+1) = A(t) + α((1−α)P)^{t+1}`.
    pub fn advance(&mut self) {
        self.p_pow = &self.p_pow * &self.step;
        self.a += &self.p_pow * self.alpha;
        self.t += 1;
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Cached `((1−α)P)^t`.
    pub fn decay_power(&self) -> &DMatrix<f64> {
        &self.p_pow
    }
}

/// Convenience wrapper returning `A(t)` for the given graph.
pub fn build_a(graph: &InfluenceGraph, alpha: f64, t: usize) -> Result<SocialState> {
    SocialState::build(graph, alpha, t)
}

/// Steady-state design `A∞ = α(I − (1−α)P)^{-1}`.
pub fn fixpoint_a(graph: &InfluenceGraph, alpha: f64) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    let n = graph.n();
    let m = DMatrix::identity(n, n) - graph.matrix() * (1.0 - alpha);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("fixed-point design"))?;
    Ok(inv * alpha)
}

/// `n x d` matrix of per-user interest vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix(DMatrix<f64>);

impl ProfileMatrix {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("profile matrix"));
        }
        Ok(Self(rows))
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self(DMatrix::zeros(n, d))
    }

    /// Reshapes a stacked vector `[u_1; …; u_n]` into profiles.
    pub fn from_stacked(v: &[f64], n: usize, d: usize) -> Result<Self> {
        check_dim("stacked profile length", n * d, v.len())?;
        Self::new(mat_rows(v, n, d))
    }

    /// Profiles drawn uniformly from `[0, 1]^d`.
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Self {
        Self(DMatrix::from_fn(n, d, |_, _| rng.random::<f64>()))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.0.row(i).transpose()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Row-major stacking `vec(U)`.
    pub fn stacked(&self) -> DVector<f64> {
        vec_rows(&self.0)
    }
}

/// `Lᵀu` for `L = Aᵀ ⊗ I_d`, computed as `vec(A · mat(u))`.
pub fn apply_l_transpose(a: &DMatrix<f64>, u: &[f64], d: usize) -> Result<DVector<f64>> {
    let n = a.nrows();
    check_dim("stacked vector length", n * d, u.len())?;
    Ok(vec_rows(&(a * mat_rows(u, n, d))))
}

/// `Lv` for `L = Aᵀ ⊗ I_d`, computed as `vec(Aᵀ · mat(v))`.
pub fn apply_l(a: &DMatrix<f64>, v: &[f64], d: usize) -> Result<DVector<f64>> {
    let n = a.nrows();
    check_dim("stacked vector length", n * d, v.len())?;
    Ok(vec_rows(&(a.transpose() * mat_rows(v, n, d))))
}

/// Expected profiles `U(t) = A(t) U⁰`.
pub fn evolve_expected(u0: &ProfileMatrix, state: &SocialState) -> Result<ProfileMatrix> {
    check_dim("profile rows", state.design().nrows(), u0.n())?;
    Ok(ProfileMatrix(state.design() * u0.as_matrix()))
}

/// One step of the stochastic interest dynamics.
///
/// Each user independently keeps the inherent profile with probability `α`,
/// otherwise copies the previous profile of a neighbour `j ~ P[i, ·]`.
pub fn evolve_stochastic<R: Rng + ?Sized>(
    prev: &ProfileMatrix,
    u0: &ProfileMatrix,
    alpha: f64,
    graph: &InfluenceGraph,
    rng: &mut R,
) -> Result<ProfileMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{alpha} is outside [0, 1]"),
        });
    }
    let n = graph.n();
    check_dim("previous profile rows", n, prev.n())?;
    check_dim("inherent profile rows", n, u0.n())?;
    check_dim("profile dimension", u0.d(), prev.d())?;
    let p = graph.matrix();
    let mut next = DMatrix::zeros(n, u0.d());
    for i in 0..n {
        let keep = rng.random::<f64>() < alpha;
        if keep {
            next.set_row(i, &u0.as_matrix().row(i));
        } else {
            let weights = WeightedIndex::new(p.row(i).iter().copied())
                .map_err(|_| Error::NotRowStochastic { row: i, sum: p.row(i).sum() })?;
            let j = weights.sample(rng);
            next.set_row(i, &prev.as_matrix().row(j));
        }
    }
    Ok(ProfileMatrix(next))
}
