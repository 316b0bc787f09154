//! Small dense linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on matrices of dimension ≤ 8. Rank and span
//! decisions are made against singular values relative to the largest one,
//! so subspace dimensions are scale-invariant.

use nalgebra::{DMatrix, DVector};

use crate::error::{CurvlieError, Result};

/// Maximum absolute entry of a matrix (the norm used by structural
/// residual checks throughout the crate).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
}

/// Maximum absolute entry of a vector.
pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
}

/// Numerical rank of `m`: singular values above `tol * max(1, σ_max)`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let cutoff = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal basis of the column space of `m` (columns of the result).
pub fn column_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("SVD with u requested");
    let sv = &svd.singular_values;
    let cutoff = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > cutoff).count();
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the null space of `m` (columns of the result).
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return DMatrix::identity(cols, cols);
    }
    // The thin SVD of a wide matrix truncates v_t to min(rows, cols) rows;
    // padding with zero rows leaves the kernel unchanged and makes v_t square.
    let m = if m.nrows() < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("SVD with v_t requested");
    let sv = &svd.singular_values;
    let cutoff = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > cutoff).count();
    // rows r.. of V^T span the kernel; transpose them into columns
    debug_assert_eq!(vt.nrows(), cols, "padded SVD yields a square V^T");
    vt.rows(r, cols - r).transpose()
}

/// Orthonormal basis of the orthogonal complement of the column space of
/// `b` inside ℝ^rows.
pub fn orthogonal_complement(b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = b.nrows();
    if b.ncols() == 0 {
        return DMatrix::identity(rows, rows);
    }
    // complement = kernel of b^T
    null_space(&b.transpose(), tol)
}

/// Least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, tol).expect("SVD solve with both factors computed")
}

/// Inverse through LU, with a structured error when singular.
pub fn try_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| CurvlieError::Computation(format!("{what} is singular")))
}

/// 2-norm condition number.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Projection of `v` onto the column space of the orthonormal `q`.
pub fn project_onto(q: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return DVector::zeros(v.len());
    }
    q * (q.transpose() * v)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    let mut out = DMatrix::zeros(m * p, n * q);
    for i in 0..m {
        for j in 0..n {
            out.view_mut((i * p, j * q), (p, q)).copy_from(&(a[(i, j)] * b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_product_is_one() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = &v * v.transpose();
        assert_eq!(rank(&m, 1e-9), 1);
    }

    #[test]
    fn null_space_complements_column_space() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let ker = null_space(&m, 1e-9);
        assert_eq!(ker.ncols(), 1);
        assert!(max_abs(&(&m * &ker)) < 1e-12, "kernel vectors are annihilated");
    }

    #[test]
    fn orthogonal_complement_has_complementary_dimension() {
        let b = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let c = orthogonal_complement(&b, 1e-9);
        assert_eq!(c.ncols(), 2);
        assert!(max_abs(&(b.transpose() * &c)) < 1e-12);
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let b = DVector::from_vec(vec![2.0, 8.0]);
        let x = lstsq(&a, &b, 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
