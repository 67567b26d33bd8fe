//! Small dense linear-algebra helpers shared by the estimators and policies.
//!
//! Vectors that represent stacked per-user blocks (`vec(U)`, `vec(V)`) are
//! laid out row-major: block `i` occupies entries `i*d .. (i+1)*d`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalue floor used when taking inverse square roots of precisions.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Row-major vectorization of an `n x d` matrix.
pub fn vec_rows(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Inverse of [`vec_rows`]: reshapes a length `rows*cols` slice into a matrix row by row.
pub fn mat_rows(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, v)
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Symmetric inverse square root `Z^{-1/2}` through an eigendecomposition.
///
/// Fails when the smallest eigenvalue is below [`EIGEN_FLOOR`].
pub fn sym_inv_sqrt(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = z.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min >= EIGEN_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let scale = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let q = &eig.eigenvectors;
    let mut out = q * DMatrix::from_diagonal(&scale) * q.transpose();
    symmetrize(&mut out);
    Ok(out)
}

/// Symmetric square root `Z^{1/2}` of a positive semidefinite matrix.
pub fn sym_sqrt(z: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = z.clone().symmetric_eigen();
    let scale = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let mut out = q * DMatrix::from_diagonal(&scale) * q.transpose();
    symmetrize(&mut out);
    out
}

/// Solves `Z x = b` for symmetric positive-definite `Z`.
pub fn spd_solve(z: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = z
        .clone()
        .cholesky()
        .ok_or(Error::Singular("positive-definite solve"))?;
    Ok(chol.solve(b))
}

pub fn spd_inverse(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = z
        .clone()
        .cholesky()
        .ok_or(Error::Singular("positive-definite inverse"))?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_and_mat_are_inverse() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let v = vec_rows(&m);
        assert_eq!(v.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(mat_rows(v.as_slice(), 2, 3), m);
    }

    #[test]
    fn inverse_square_root_of_diagonal() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = sym_inv_sqrt(&z).unwrap();
        assert!((r[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((r[(1, 1)] - 1.0 / 3.0).abs() < 1e-14);
        assert!(r[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            sym_inv_sqrt(&z),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
