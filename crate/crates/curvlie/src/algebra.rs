//! Real Lie algebras of dimension ≤ 8 represented by structure constants.
//!
//! A [`LieAlgebra`] stores the constants of `[e_i, e_j] = Σ_k c[i][j][k] e_k`
//! for `i < j` only; antisymmetry is synthesized by the accessor, so it is
//! unfalsifiable by construction and validity testing reduces to the Jacobi
//! identity:
//!
//! ```text
//! [[x,y],z] + [[y,z],x] + [[z,x],y] = 0
//! ```
//!
//! On top of the bracket the module provides the structural toolkit used by
//! the rest of the crate: derived subalgebra, lower-central and derived
//! series, the derivation algebra δ(𝔤) as the null space of a linear
//! constraint system, automorphism and derivation residuals, eigenvalue
//! extraction with a sign guard band, and inner products via
//! [`MetricAlgebra`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A finite-dimensional real Lie algebra given by structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    /// Constants for pairs i < j, flattened as pair-major rows of length
    /// `dim`: entry `(pair_index(i,j), k)` is c[i][j][k].
    upper: Vec<f64>,
}

impl LieAlgebra {
    /// The abelian algebra of the given dimension.
    pub fn abelian(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(CurvlieError::Input(format!(
                "dimension {dim} outside supported range 1..={MAX_DIM}"
            )));
        }
        let pairs = dim * (dim - 1) / 2;
        Ok(LieAlgebra {
            dim,
            upper: vec![0.0; pairs * dim],
        })
    }

    /// Builds an algebra from `(i, j, coefficients)` entries with `i < j`
    /// (0-based). Missing pairs are zero; duplicate pairs are rejected.
    pub fn from_brackets(dim: usize, entries: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        let mut alg = LieAlgebra::abelian(dim)?;
        let mut seen = vec![false; dim * dim];
        for (i, j, coeffs) in entries {
            if *i >= dim || *j >= dim {
                return Err(CurvlieError::Input(format!(
                    "bracket index ({i},{j}) out of range for dimension {dim}"
                )));
            }
            if i >= j {
                return Err(CurvlieError::Input(format!(
                    "bracket entries must have i < j, got ({i},{j})"
                )));
            }
            if coeffs.len() != dim {
                return Err(CurvlieError::Input(format!(
                    "coefficient vector for ({i},{j}) has length {}, expected {dim}",
                    coeffs.len()
                )));
            }
            if seen[i * dim + j] {
                return Err(CurvlieError::Input(format!(
                    "duplicate bracket entry for ({i},{j})"
                )));
            }
            seen[i * dim + j] = true;
            alg.set_bracket(*i, *j, coeffs);
        }
        Ok(alg)
    }

    /// The three-dimensional Heisenberg algebra `[e1,e2] = e3`.
    pub fn heisenberg3() -> Self {
        let mut a = LieAlgebra::abelian(3).expect("dimension 3 is supported");
        a.set_bracket(0, 1, &[0.0, 0.0, 1.0]);
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        // position of (i,j) in row-major upper-triangle enumeration
        i * self.dim - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Structure constant c[i][j][k]; antisymmetry synthesized.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        if i < j {
            self.upper[self.pair_index(i, j) * self.dim + k]
        } else {
            -self.upper[self.pair_index(j, i) * self.dim + k]
        }
    }

    /// Sets `[e_i, e_j]` for `i < j`.
    pub fn set_bracket(&mut self, i: usize, j: usize, coeffs: &[f64]) {
        assert!(i < j && j < self.dim, "set_bracket expects i < j < dim");
        assert_eq!(coeffs.len(), self.dim);
        let p = self.pair_index(i, j) * self.dim;
        self.upper[p..p + self.dim].copy_from_slice(coeffs);
    }

    /// Bracket of two coordinate vectors.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(CurvlieError::Input(format!(
                "bracket arguments must have dimension {}",
                self.dim
            )));
        }
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if j == i || y[j] == 0.0 {
                    continue;
                }
                let f = x[i] * y[j];
                for k in 0..self.dim {
                    out[k] += f * self.c(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// Bracket of two basis vectors.
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| self.c(i, j, k))
    }

    /// The adjoint map `ad(x): y ↦ [x, y]` as a matrix.
    pub fn ad(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.dim {
            return Err(CurvlieError::Input(format!(
                "ad argument must have dimension {}",
                self.dim
            )));
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for i in 0..self.dim {
                if x[i] == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    m[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        Ok(m)
    }

    /// Maximum over basis triples of the max-abs component of the Jacobi
    /// cyclic sum; zero (to tolerance) iff the constants define a Lie
    /// algebra.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for p in 0..n {
                            s += self.c(i, j, p) * self.c(p, k, m)
                                + self.c(j, k, p) * self.c(p, i, m)
                                + self.c(k, i, p) * self.c(p, j, m);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Orthonormal basis (columns) of the derived subalgebra
    /// 𝔤′ = span{[e_i, e_j]}.
    pub fn derived_subalgebra(&self, tol: f64) -> DMatrix<f64> {
        let n = self.dim;
        let mut cols = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                cols.push(self.bracket_basis(i, j));
            }
        }
        let m = DMatrix::from_columns(&cols);
        linalg::column_space(&m, tol)
    }

    /// Span of `[A, B]` for subspaces given by (not necessarily
    /// orthonormal) column bases.
    fn bracket_spans(&self, a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
        if a.ncols() == 0 || b.ncols() == 0 {
            return DMatrix::zeros(self.dim, 0);
        }
        let mut cols = Vec::new();
        for p in 0..a.ncols() {
            for q in 0..b.ncols() {
                let v = self
                    .bracket(&a.column(p).into_owned(), &b.column(q).into_owned())
                    .expect("span columns have ambient dimension");
                cols.push(v);
            }
        }
        linalg::column_space(&DMatrix::from_columns(&cols), tol)
    }

    /// Lower central series `𝔤 ⊇ [𝔤,𝔤] ⊇ [𝔤,[𝔤,𝔤]] ⊇ …` until it
    /// stabilizes; each term as an orthonormal column basis.
    pub fn lower_central_series(&self, tol: f64) -> Vec<DMatrix<f64>> {
        let full = DMatrix::identity(self.dim, self.dim);
        let mut series = vec![full.clone()];
        loop {
            let prev = series.last().expect("series is nonempty");
            let next = self.bracket_spans(&full, prev, tol);
            if next.ncols() == prev.ncols() {
                break;
            }
            let done = next.ncols() == 0;
            series.push(next);
            if done {
                break;
            }
        }
        series
    }

    /// Derived series `𝔤 ⊇ 𝔤′ ⊇ 𝔤″ ⊇ …` until it stabilizes.
    pub fn derived_series(&self, tol: f64) -> Vec<DMatrix<f64>> {
        let mut series = vec![DMatrix::identity(self.dim, self.dim)];
        loop {
            let prev = series.last().expect("series is nonempty");
            let next = self.bracket_spans(prev, prev, tol);
            if next.ncols() == prev.ncols() {
                break;
            }
            let done = next.ncols() == 0;
            series.push(next);
            if done {
                break;
            }
        }
        series
    }

    /// Whether the lower central series reaches zero.
    pub fn is_nilpotent(&self, tol: f64) -> bool {
        self.lower_central_series(tol)
            .last()
            .map(|s| s.ncols() == 0)
            .unwrap_or(false)
    }

    /// Whether the derived series reaches zero.
    pub fn is_solvable(&self, tol: f64) -> bool {
        self.derived_series(tol)
            .last()
            .map(|s| s.ncols() == 0)
            .unwrap_or(false)
    }

    /// Max-abs residual of the Leibniz rule
    /// `D[e_i,e_j] − [De_i, e_j] − [e_i, De_j]` over basis pairs.
    pub fn derivation_defect(&self, d: &DMatrix<f64>) -> Result<f64> {
        self.check_map_dims(d)?;
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let lhs = d * self.bracket_basis(i, j);
                let a = self.bracket(&d.column(i).into_owned(), &basis(n, j))?;
                let b = self.bracket(&basis(n, i), &d.column(j).into_owned())?;
                worst = worst.max(linalg::max_abs_vec(&(lhs - a - b)));
            }
        }
        Ok(worst)
    }

    /// Whether `d` satisfies the Leibniz rule to tolerance.
    pub fn is_derivation(&self, d: &DMatrix<f64>, tol: f64) -> Result<bool> {
        Ok(self.derivation_defect(d)? <= tol)
    }

    /// Max-abs residual of `A[e_i,e_j] − [Ae_i, Ae_j]` over basis pairs.
    pub fn automorphism_defect(&self, a: &DMatrix<f64>) -> Result<f64> {
        self.check_map_dims(a)?;
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let lhs = a * self.bracket_basis(i, j);
                let rhs = self.bracket(&a.column(i).into_owned(), &a.column(j).into_owned())?;
                worst = worst.max(linalg::max_abs_vec(&(lhs - rhs)));
            }
        }
        Ok(worst)
    }

    /// Whether `a` is an invertible bracket-preserving map.
    pub fn is_automorphism(&self, a: &DMatrix<f64>, tol: f64) -> Result<bool> {
        if a.determinant().abs() <= tol {
            return Ok(false);
        }
        Ok(self.automorphism_defect(a)? <= tol)
    }

    /// Basis of the derivation algebra δ(𝔤): null space of the Leibniz
    /// constraint system in the dim² matrix entries.
    pub fn derivation_space(&self, tol: f64) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let pairs = n * (n - 1) / 2;
        let mut rows = DMatrix::zeros(pairs * n, n * n);
        // unknown D[(r,c)] at flat index r + c*n (column-major)
        let idx = |r: usize, c: usize| r + c * n;
        let mut row = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                for m in 0..n {
                    // Σ_k c[i][j][k] D[m][k] − Σ_p c[p][j][m] D[p][i]
                    //                        − Σ_p c[i][p][m] D[p][j] = 0
                    for k in 0..n {
                        rows[(row, idx(m, k))] += self.c(i, j, k);
                    }
                    for p in 0..n {
                        rows[(row, idx(p, i))] -= self.c(p, j, m);
                        rows[(row, idx(p, j))] -= self.c(i, p, m);
                    }
                    row += 1;
                }
            }
        }
        let ker = linalg::null_space(&rows, tol);
        (0..ker.ncols())
            .map(|c| {
                DMatrix::from_fn(n, n, |r, col| ker[(idx(r, col), c)])
            })
            .collect()
    }

    /// Structure constants in the new basis `f_i = Σ_k P[k][i] e_k`.
    pub fn transform(&self, p: &DMatrix<f64>) -> Result<LieAlgebra> {
        self.check_map_dims(p)?;
        let n = self.dim;
        let pinv = linalg::try_inverse(p, "change-of-basis matrix")?;
        let mut out = LieAlgebra::abelian(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                let old = self
                    .bracket(&p.column(i).into_owned(), &p.column(j).into_owned())?;
                let new = &pinv * old;
                out.set_bracket(i, j, new.as_slice());
            }
        }
        Ok(out)
    }

    fn check_map_dims(&self, m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(CurvlieError::Input(format!(
                "linear map is {}×{}, algebra dimension is {}",
                m.nrows(),
                m.ncols(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// Standard basis vector.
pub fn basis(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

/// All eigenvalues of a real matrix, with multiplicity, via the real Schur
/// decomposition. Non-convergence is a hard error, never a silent result.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() != m.ncols() {
        return Err(CurvlieError::Input("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() > MAX_DIM {
        return Err(CurvlieError::Input(format!(
            "eigenvalues supported up to dimension {MAX_DIM}"
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| CurvlieError::Computation("Schur iteration did not converge".into()))?;
    // Walk the quasi-triangular factor directly. The library's own
    // eigenvalue extraction assumes every 2×2 diagonal block carries a
    // conjugate pair and takes the square root of a negated discriminant,
    // which turns a defective *real* eigenvalue (discriminant rounding to
    // a tiny positive number) into NaN. Branching on the discriminant's
    // sign handles both shapes exactly.
    let (_, t) = schur.unpack();
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b) = (t[(i, i)], t[(i, i + 1)]);
            let (c, d) = (t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                out.push(Complex::new(mid + s, 0.0));
                out.push(Complex::new(mid - s, 0.0));
            } else {
                let s = (-disc).sqrt();
                out.push(Complex::new(mid, s));
                out.push(Complex::new(mid, -s));
            }
            i += 2;
        } else {
            out.push(Complex::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(CurvlieError::Computation(
            "eigenvalue extraction produced non-finite values".into(),
        ));
    }
    Ok(out)
}

/// Whether every eigenvalue of the derivation `d` has real part above the
/// guard band. Real parts inside `(-tol_eig, tol_eig]` are indeterminate.
pub fn in_delta_plus(alg: &LieAlgebra, d: &DMatrix<f64>, tols: &Tolerances) -> Result<bool> {
    if !alg.is_derivation(d, tols.tol_struct)? {
        return Err(CurvlieError::Precondition(format!(
            "map is not a derivation (defect {:.3e})",
            alg.derivation_defect(d)?
        )));
    }
    // A decisively negative real part settles the answer to "no"; a real
    // part inside the guard band only blocks a "yes".
    let mut banded: Option<f64> = None;
    for ev in eigenvalues(d)? {
        if ev.re > tols.tol_eig {
            continue;
        }
        if ev.re > -tols.tol_eig {
            banded.get_or_insert(ev.re);
            continue;
        }
        return Ok(false);
    }
    match banded {
        Some(re) => Err(CurvlieError::Indeterminate(format!(
            "eigenvalue real part {re:.3e} inside the sign guard band"
        ))),
        None => Ok(true),
    }
}

/// Milnor's family `[x, y] = ℓ(x)y − ℓ(y)x`, together with the constant
/// sectional curvature `−‖ℓ‖²` it produces.
pub fn milnor_algebra(l: &DVector<f64>) -> Result<(LieAlgebra, f64)> {
    let n = l.len();
    if n < 2 {
        return Err(CurvlieError::Input(
            "Milnor construction needs dimension ≥ 2".into(),
        ));
    }
    let mut alg = LieAlgebra::abelian(n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut coeffs = vec![0.0; n];
            coeffs[j] += l[i];
            coeffs[i] -= l[j];
            alg.set_bracket(i, j, &coeffs);
        }
    }
    Ok((alg, -l.norm_squared()))
}

/// A Lie algebra with an inner product given by its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAlgebra {
    pub alg: LieAlgebra,
    pub gram: DMatrix<f64>,
}

impl MetricAlgebra {
    /// Pairs an algebra with the standard (identity) inner product.
    pub fn standard(alg: LieAlgebra) -> Self {
        let n = alg.dim();
        MetricAlgebra {
            alg,
            gram: DMatrix::identity(n, n),
        }
    }

    /// Validates the Gram matrix: symmetric and positive-definite.
    pub fn new(alg: LieAlgebra, gram: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = alg.dim();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(CurvlieError::Input(format!(
                "Gram matrix is {}×{}, algebra dimension is {n}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        if linalg::max_abs(&(&gram - gram.transpose())) > tol {
            return Err(CurvlieError::Input("Gram matrix is not symmetric".into()));
        }
        let min_eig = gram
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &x| a.min(x));
        if min_eig <= tol {
            return Err(CurvlieError::Input(format!(
                "Gram matrix is not positive-definite (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(MetricAlgebra { alg, gram })
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let n = self.dim();
        linalg::max_abs(&(&self.gram - DMatrix::<f64>::identity(n, n))) <= tol
    }

    /// Change of basis making the inner product standard. Returns the new
    /// metric algebra (identity Gram) and the basis matrix `Q` whose
    /// columns express the new basis in the old coordinates.
    pub fn orthonormalize(&self) -> Result<(MetricAlgebra, DMatrix<f64>)> {
        let n = self.dim();
        if self.is_orthonormal(0.0) {
            return Ok((self.clone(), DMatrix::identity(n, n)));
        }
        let chol = nalgebra::Cholesky::new(self.gram.clone()).ok_or_else(|| {
            CurvlieError::Input("Gram matrix is not positive-definite".into())
        })?;
        // gram = L Lᵀ, so Q = L⁻ᵀ satisfies Qᵀ gram Q = I
        let q = linalg::try_inverse(&chol.l().transpose(), "Cholesky factor")?;
        let alg = self.alg.transform(&q)?;
        Ok((MetricAlgebra::standard(alg), q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b4() -> LieAlgebra {
        let mut a = LieAlgebra::abelian(4).unwrap();
        a.set_bracket(0, 1, &[0.0, 0.0, 1.0, 0.0]);
        a.set_bracket(0, 2, &[0.0, 0.0, 0.0, 1.0]);
        a
    }

    fn c4() -> LieAlgebra {
        let mut a = LieAlgebra::abelian(4).unwrap();
        a.set_bracket(0, 1, &[0.0, 0.0, 0.0, 1.0]);
        a
    }

    #[test]
    fn heisenberg_bracket_of_first_two_basis_vectors_is_third() {
        let h = LieAlgebra::heisenberg3();
        let v = h.bracket(&basis(3, 0), &basis(3, 1)).unwrap();
        assert_eq!(v, basis(3, 2));
    }

    #[test]
    fn bracket_of_vector_with_itself_vanishes() {
        let h = LieAlgebra::heisenberg3();
        let x = DVector::from_vec(vec![1.0, 2.0, -0.5]);
        let v = h.bracket(&x, &x).unwrap();
        assert!(linalg::max_abs_vec(&v) == 0.0);
    }

    #[test]
    fn milnor_bracket_matches_defining_formula() {
        let (m, k) = milnor_algebra(&DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        // [e3, e1] = ℓ(e3) e1 − ℓ(e1) e3 = e1
        let v = m.bracket(&basis(3, 2), &basis(3, 0)).unwrap();
        assert_eq!(v, basis(3, 0));
        assert_eq!(k, -1.0);
    }

    #[test]
    fn jacobi_defect_zero_for_abelian_and_nilpotent_tables() {
        assert_eq!(LieAlgebra::abelian(4).unwrap().jacobi_defect(), 0.0);
        assert_eq!(b4().jacobi_defect(), 0.0);
    }

    #[test]
    fn euclidean_algebra_satisfies_jacobi() {
        // [e1,e2] = e3 plus [e2,e3] = e1: the Euclidean algebra e(2);
        // this is a valid Lie algebra, not a broken table.
        let mut a = LieAlgebra::heisenberg3();
        a.set_bracket(1, 2, &[1.0, 0.0, 0.0]);
        assert_eq!(a.jacobi_defect(), 0.0);
    }

    #[test]
    fn inconsistent_table_has_unit_jacobi_defect() {
        // [e1,e2] = e3, [e2,e3] = e2 genuinely violates Jacobi:
        // the cyclic sum on (e1,e2,e3) has a component of size exactly 1.
        let mut a = LieAlgebra::heisenberg3();
        a.set_bracket(1, 2, &[0.0, 1.0, 0.0]);
        assert_eq!(a.jacobi_defect(), 1.0);
    }

    #[test]
    fn scaled_filiform_constants_still_satisfy_jacobi() {
        let mut a = b4();
        a.set_bracket(0, 1, &[0.0, 0.0, 1.5, 0.0]);
        assert_eq!(a.jacobi_defect(), 0.0);
    }

    #[test]
    fn derived_subalgebra_dimensions() {
        assert_eq!(
            LieAlgebra::abelian(3).unwrap().derived_subalgebra(1e-9).ncols(),
            0
        );
        let d = c4().derived_subalgebra(1e-9);
        assert_eq!(d.ncols(), 1);
        assert!((d[(3, 0)].abs() - 1.0).abs() < 1e-12, "span is the e4 line");
    }

    #[test]
    fn filiform_lower_central_series_dims() {
        let dims: Vec<usize> = b4()
            .lower_central_series(1e-9)
            .iter()
            .map(|s| s.ncols())
            .collect();
        assert_eq!(dims, vec![4, 2, 1, 0]);
        assert!(b4().is_nilpotent(1e-9));
    }

    #[test]
    fn expanded_milnor_algebra_is_solvable_not_nilpotent() {
        let (m, _) = milnor_algebra(&DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(m.is_solvable(1e-9));
        assert!(!m.is_nilpotent(1e-9));
    }

    #[test]
    fn heisenberg_derivation_form_constrains_center_eigenvalue() {
        let h = LieAlgebra::heisenberg3();
        let good = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, 1.0]));
        assert!(h.is_derivation(&good, 1e-9).unwrap());
        // the center must carry the sum of the plane eigenvalues
        let bad = DMatrix::identity(3, 3);
        assert!(!h.is_derivation(&bad, 1e-9).unwrap());
    }

    #[test]
    fn abelian_derivation_space_is_all_endomorphisms() {
        let a = LieAlgebra::abelian(3).unwrap();
        assert_eq!(a.derivation_space(1e-9).len(), 9);
        let any = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert!(a.is_derivation(&any, 1e-9).unwrap());
    }

    #[test]
    fn derivation_space_dimensions_match_nullity_oracle() {
        assert_eq!(LieAlgebra::heisenberg3().derivation_space(1e-9).len(), 6);
        assert_eq!(b4().derivation_space(1e-9).len(), 7);
        assert_eq!(c4().derivation_space(1e-9).len(), 10);
    }

    #[test]
    fn derivation_space_members_pass_leibniz_and_contain_inner_derivations() {
        let alg = b4();
        let space = alg.derivation_space(1e-9);
        for d in &space {
            assert!(alg.is_derivation(d, 1e-9).unwrap());
        }
        // ad(x) must lie in the span of the basis for every basis x
        let n = alg.dim();
        let flat = DMatrix::from_fn(n * n, space.len(), |r, c| space[c][(r % n, r / n)]);
        for i in 0..n {
            let adx = alg.ad(&basis(n, i)).unwrap();
            let target = DVector::from_fn(n * n, |r, _| adx[(r % n, r / n)]);
            let sol = linalg::lstsq(&flat, &target, 1e-12);
            let residual = &flat * sol - target;
            assert!(
                linalg::max_abs_vec(&residual) < 1e-9,
                "inner derivation ad(e{i}) lies in the derivation space"
            );
        }
    }

    #[test]
    fn eigenvalues_of_rotation_block_are_conjugate_pair() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[0.3, -2.0, 0.0, 2.0, 0.3, 0.0, 0.0, 0.0, 1.0],
        );
        let mut evs = eigenvalues(&m).unwrap();
        evs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        assert!((evs[0] - Complex::new(0.3, -2.0)).norm() < 1e-9);
        assert!((evs[1] - Complex::new(0.3, 2.0)).norm() < 1e-9);
        assert!((evs[2] - Complex::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn eigenvalue_sum_and_product_match_trace_and_determinant() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.5],
        );
        let evs = eigenvalues(&m).unwrap();
        let sum: Complex<f64> = evs.iter().sum();
        let prod: Complex<f64> = evs.iter().product();
        assert!((sum.re - m.trace()).abs() < 1e-8 && sum.im.abs() < 1e-8);
        assert!((prod.re - m.determinant()).abs() < 1e-8 && prod.im.abs() < 1e-8);
    }

    #[test]
    fn delta_plus_sign_decisions() {
        let tols = Tolerances::default();
        let a3 = LieAlgebra::abelian(3).unwrap();
        assert!(in_delta_plus(&a3, &DMatrix::identity(3, 3), &tols).unwrap());
        let mixed = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0]));
        assert!(!in_delta_plus(&a3, &mixed, &tols).unwrap());
        // rotation with positive real part on the Heisenberg plane block
        let h = LieAlgebra::heisenberg3();
        let rot = DMatrix::from_row_slice(
            3,
            3,
            &[0.5, -2.0, 0.0, 2.0, 0.5, 0.0, 0.0, 0.0, 1.0],
        );
        assert!(in_delta_plus(&h, &rot, &tols).unwrap());
    }

    #[test]
    fn delta_plus_guard_band_is_indeterminate() {
        let tols = Tolerances::default();
        let a3 = LieAlgebra::abelian(3).unwrap();
        let borderline =
            DMatrix::from_diagonal(&DVector::from_vec(vec![1e-9, 1.0, 1.0]));
        match in_delta_plus(&a3, &borderline, &tols) {
            Err(CurvlieError::Indeterminate(_)) => {}
            other => panic!("expected indeterminate, got {other:?}"),
        }
    }

    #[test]
    fn conjugation_preserves_delta_plus_membership() {
        let tols = Tolerances::default();
        let a3 = LieAlgebra::abelian(3).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, 0.8, 1.0]));
        let p = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0],
        );
        let conj = linalg::try_inverse(&p, "p").unwrap() * &d * &p;
        assert_eq!(
            in_delta_plus(&a3, &d, &tols).unwrap(),
            in_delta_plus(&a3, &conj, &tols).unwrap()
        );
    }

    #[test]
    fn automorphism_requires_determinant_coupling_on_heisenberg() {
        let h = LieAlgebra::heisenberg3();
        assert!(h.is_automorphism(&DMatrix::identity(3, 3), 1e-9).unwrap());
        // scaling the center alone breaks [Ae1, Ae2] = A e3
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 5.0]));
        assert!(!h.is_automorphism(&bad, 1e-9).unwrap());
        // scaling the plane by (a,b) forces the center factor ab
        let good = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 6.0]));
        assert!(h.is_automorphism(&good, 1e-9).unwrap());
    }

    #[test]
    fn abelian_automorphisms_are_all_invertible_maps() {
        let a = LieAlgebra::abelian(3).unwrap();
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1.0, 0.0, 0.0, 1.0, 7.0, 3.0, 0.0, 1.0],
        );
        assert!(a.is_automorphism(&m, 1e-9).unwrap());
    }

    #[test]
    fn transform_round_trips_through_inverse_basis() {
        let h = LieAlgebra::heisenberg3();
        let p = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 1.0, 0.0, 0.0, 2.0, 0.0, 0.5, 0.0, 3.0],
        );
        let back = h
            .transform(&p)
            .unwrap()
            .transform(&linalg::try_inverse(&p, "p").unwrap())
            .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert!((back.c(i, j, k) - h.c(i, j, k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn orthonormalize_rescales_heisenberg_constants() {
        // lengths (2,1,1): e1/2 is unit, so [f1, f2] = (1/2) e3 = (1/2) f3
        let gram = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 1.0]));
        let m = MetricAlgebra::new(LieAlgebra::heisenberg3(), gram, 1e-9).unwrap();
        let (onb, _) = m.orthonormalize().unwrap();
        assert!((onb.alg.c(0, 1, 2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_uniform_gram_scales_by_inverse_sqrt() {
        let gram = DMatrix::<f64>::identity(3, 3) * 2.0;
        let m = MetricAlgebra::new(LieAlgebra::heisenberg3(), gram, 1e-9).unwrap();
        let (onb, _) = m.orthonormalize().unwrap();
        assert!((onb.alg.c(0, 1, 2) - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gram_validation_rejects_indefinite_matrices() {
        let gram = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1.0]));
        assert!(MetricAlgebra::new(LieAlgebra::heisenberg3(), gram, 1e-9).is_err());
    }
}
