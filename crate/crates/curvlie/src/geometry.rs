//! Curvature of a Lie group with left-invariant metric, computed on the
//! Lie algebra.
//!
//! With an orthonormal basis of a metric Lie algebra, the Levi-Civita
//! connection and all curvature tensors are polynomials in the structure
//! constants:
//!
//! ```text
//! ⟨U(X,Y),Z⟩ = ½⟨X,[Z,Y]⟩ + ½⟨Y,[Z,X]⟩
//! ∇_X Y      = U(X,Y) + ½[X,Y]
//! R(X,Y)Z    = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z
//! Ric(X,Y)   = Σ_i ⟨R(e_i,X)Y, e_i⟩
//! K(x,y)     = ⟨R(x,y)y,x⟩ / (‖x‖²‖y‖² − ⟨x,y⟩²)
//! ```
//!
//! Every operation here *requires* an orthonormal basis (`gram = I`);
//! callers orthonormalize first via [`MetricAlgebra::orthonormalize`]. The
//! Ricci tensor is always computed twice — once by contracting the Riemann
//! tensor and once from the direct eight-term formula — and the two must
//! agree, turning most implementation mistakes into loud errors instead of
//! silently wrong numbers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{basis, LieAlgebra, MetricAlgebra};
use crate::error::{CurvlieError, Result};
use crate::extension::snc_test_auto;
use crate::linalg;
use crate::tol::Tolerances;

/// Rank-3 tensor `t[i][j][k]`, dense.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    /// The vector `t[i][j][·]`.
    pub fn slice(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.n, |k, _| self.get(i, j, k))
    }

    /// Bilinear evaluation `Σ_{ij} x_i y_j t[i][j][·]`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for i in 0..self.n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.n {
                let f = x[i] * y[j];
                if f == 0.0 {
                    continue;
                }
                for k in 0..self.n {
                    out[k] += f * self.get(i, j, k);
                }
            }
        }
        out
    }
}

/// Rank-4 tensor `R(e_i,e_j)e_k = Σ_l t[i][j][k][l] e_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    /// The vector `R(e_i,e_j)e_k`.
    pub fn slice(&self, i: usize, j: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(self.n, |l, _| self.get(i, j, k, l))
    }

    /// Trilinear evaluation `R(x,y)z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for i in 0..self.n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..self.n {
                    let f = xy * z[k];
                    if f == 0.0 {
                        continue;
                    }
                    for l in 0..self.n {
                        out[l] += f * self.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
    }
}

/// Rank-5 tensor `(∇_{e_w}R)(e_i,e_j)e_k = Σ_l t[w][i][j][k][l] e_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor5 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor5 {
    fn zeros(n: usize) -> Self {
        Tensor5 {
            n,
            data: vec![0.0; n * n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, w: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[(((w * self.n + i) * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    fn set(&mut self, w: usize, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[(((w * self.n + i) * self.n + j) * self.n + k) * self.n + l] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
    }
}

/// The Levi-Civita connection on basis pairs:
/// `∇_{e_i} e_j = Σ_k gamma[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    pub gamma: Tensor3,
}

impl ConnectionTable {
    /// `∇_x v` for a constant-coefficient left-invariant field `v`.
    pub fn nabla(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.gamma.apply(x, v)
    }
}

fn require_orthonormal(g: &MetricAlgebra, tols: &Tolerances) -> Result<()> {
    if !g.is_orthonormal(tols.tol_struct) {
        return Err(CurvlieError::Precondition(
            "basis is not orthonormal; orthonormalize the metric algebra first".into(),
        ));
    }
    Ok(())
}

/// The symmetric part U of the connection on all basis pairs:
/// `U[i][j][k] = ½(c[k][j][i] + c[k][i][j])` in an orthonormal basis.
pub fn u_table(g: &MetricAlgebra, tols: &Tolerances) -> Result<Tensor3> {
    require_orthonormal(g, tols)?;
    let n = g.dim();
    let alg = &g.alg;
    let mut u = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                u.set(i, j, k, 0.5 * (alg.c(k, j, i) + alg.c(k, i, j)));
            }
        }
    }
    Ok(u)
}

/// `U(x, y)` for arbitrary vectors.
pub fn u_map(
    g: &MetricAlgebra,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tols: &Tolerances,
) -> Result<DVector<f64>> {
    Ok(u_table(g, tols)?.apply(x, y))
}

/// The Levi-Civita connection: `∇_{e_i}e_j = U(e_i,e_j) + ½[e_i,e_j]`.
pub fn levi_civita(g: &MetricAlgebra, tols: &Tolerances) -> Result<ConnectionTable> {
    let n = g.dim();
    let mut gamma = u_table(g, tols)?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = gamma.get(i, j, k) + 0.5 * g.alg.c(i, j, k);
                gamma.set(i, j, k, v);
            }
        }
    }
    Ok(ConnectionTable { gamma })
}

/// The Riemann tensor `R(X,Y)Z = ∇_X∇_YZ − ∇_Y∇_XZ − ∇_{[X,Y]}Z` on basis
/// triples.
pub fn riemann(g: &MetricAlgebra, tols: &Tolerances) -> Result<Tensor4> {
    let conn = levi_civita(g, tols)?;
    riemann_from(&g.alg, &conn)
}

fn riemann_from(alg: &LieAlgebra, conn: &ConnectionTable) -> Result<Tensor4> {
    let n = alg.dim();
    let mut r = Tensor4::zeros(n);
    for i in 0..n {
        let ei = basis(n, i);
        for j in 0..n {
            let ej = basis(n, j);
            let bij = alg.bracket(&ei, &ej)?;
            for k in 0..n {
                let njk = conn.gamma.slice(j, k);
                let nik = conn.gamma.slice(i, k);
                let t1 = conn.nabla(&ei, &njk);
                let t2 = conn.nabla(&ej, &nik);
                let t3 = conn.nabla(&bij, &basis(n, k));
                for l in 0..n {
                    r.set(i, j, k, l, t1[l] - t2[l] - t3[l]);
                }
            }
        }
    }
    Ok(r)
}

/// Direct evaluation of the Ricci form on basis pairs (the eight-term
/// expansion of the curvature formula in an orthonormal basis). This is
/// the second, independent path to the Ricci tensor; [`ricci`] checks it
/// against the Riemann contraction.
pub fn ricci_direct(g: &MetricAlgebra, tols: &Tolerances) -> Result<DMatrix<f64>> {
    let n = g.dim();
    let alg = &g.alg;
    let u = u_table(g, tols)?;
    // Σ_i U(e_i, e_i)
    let mut usum = DVector::zeros(n);
    for i in 0..n {
        usum += u.slice(i, i);
    }
    let e: Vec<DVector<f64>> = (0..n).map(|i| basis(n, i)).collect();
    let mut ric = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let x = &e[a];
            let y = &e[b];
            let mut s = -u.slice(a, b).dot(&usum);
            let bxy = alg.bracket(x, y)?;
            for i in 0..n {
                let ei = &e[i];
                s += -0.5 * ei.dot(&alg.bracket(&bxy, ei)?);
                s += u.slice(i, b).dot(&u.slice(i, a));
                let beix = alg.bracket(ei, x)?;
                let beiy = alg.bracket(ei, y)?;
                s += -0.75 * alg.bracket(&beix, y)?.dot(ei);
                s += -0.25 * y.dot(&alg.bracket(ei, &beix)?);
                s += 0.25 * x.dot(&alg.bracket(&beiy, ei)?);
                s += 0.25 * ei.dot(&alg.bracket(&beiy, x)?);
                s += -0.75 * beix.dot(&beiy);
            }
            ric[(a, b)] = s;
        }
    }
    Ok(ric)
}

/// The Ricci tensor, computed both by contracting the Riemann tensor and
/// by the direct formula; the two paths must agree.
pub fn ricci(g: &MetricAlgebra, tols: &Tolerances) -> Result<DMatrix<f64>> {
    let r = riemann(g, tols)?;
    ricci_checked(g, &r, tols)
}

fn ricci_checked(g: &MetricAlgebra, r: &Tensor4, tols: &Tolerances) -> Result<DMatrix<f64>> {
    let n = g.dim();
    let mut contracted = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += r.get(i, x, y, i);
            }
            contracted[(x, y)] = s;
        }
    }
    let direct = ricci_direct(g, tols)?;
    let disagreement = linalg::max_abs(&(&contracted - &direct));
    if disagreement > tols.tol_curv {
        return Err(CurvlieError::Internal(format!(
            "Ricci paths disagree by {disagreement:.3e} (contraction vs direct formula)"
        )));
    }
    let asym = linalg::max_abs(&(&contracted - contracted.transpose()));
    if asym > tols.tol_curv {
        return Err(CurvlieError::Internal(format!(
            "Ricci tensor asymmetric by {asym:.3e}"
        )));
    }
    Ok((&contracted + contracted.transpose()) * 0.5)
}

/// Sectional curvature of the plane spanned by `x`, `y`.
pub fn sectional(
    g: &MetricAlgebra,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tols: &Tolerances,
) -> Result<f64> {
    let r = riemann(g, tols)?;
    sectional_from(&r, x, y, tols)
}

/// Sectional curvature from a precomputed Riemann tensor (orthonormal
/// coordinates).
pub fn sectional_from(
    r: &Tensor4,
    x: &DVector<f64>,
    y: &DVector<f64>,
    tols: &Tolerances,
) -> Result<f64> {
    let den = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
    let scale = (x.norm_squared() * y.norm_squared()).max(1e-300);
    if den <= tols.tol_struct * scale {
        return Err(CurvlieError::Input(
            "sectional curvature of linearly dependent vectors".into(),
        ));
    }
    Ok(r.apply(x, y, y).dot(x) / den)
}

/// Trace of the Ricci tensor (orthonormal basis).
pub fn scalar_curvature(g: &MetricAlgebra, tols: &Tolerances) -> Result<f64> {
    Ok(ricci(g, tols)?.trace())
}

/// `Some(λ)` iff `Ric = λ·⟨·,·⟩` to curvature tolerance, with
/// `λ = scalar/dim`.
pub fn is_einstein(g: &MetricAlgebra, tols: &Tolerances) -> Result<Option<f64>> {
    let ric = ricci(g, tols)?;
    Ok(einstein_from(&ric, tols))
}

fn einstein_from(ric: &DMatrix<f64>, tols: &Tolerances) -> Option<f64> {
    let n = ric.nrows();
    let lambda = ric.trace() / n as f64;
    let dev = linalg::max_abs(&(ric - DMatrix::identity(n, n) * lambda));
    if dev <= tols.tol_curv {
        Some(lambda)
    } else {
        None
    }
}

/// The covariant derivative of the Riemann tensor and its max-abs norm.
///
/// Left-invariant tensors have constant components, so `∇_w` acts through
/// the connection on each argument slot:
///
/// ```text
/// (∇_{e_w}R)(e_i,e_j)e_k = ∇_w(R(i,j)k) − R(∇_w e_i, e_j)e_k
///                        − R(e_i, ∇_w e_j)e_k − R(e_i,e_j)(∇_w e_k)
/// ```
pub fn nabla_r(g: &MetricAlgebra, tols: &Tolerances) -> Result<(Tensor5, f64)> {
    let conn = levi_civita(g, tols)?;
    let r = riemann_from(&g.alg, &conn)?;
    let n = g.dim();
    let mut out = Tensor5::zeros(n);
    for w in 0..n {
        let ew = basis(n, w);
        for i in 0..n {
            let nwi = conn.gamma.slice(w, i);
            for j in 0..n {
                let nwj = conn.gamma.slice(w, j);
                for k in 0..n {
                    let nwk = conn.gamma.slice(w, k);
                    let mut t = conn.nabla(&ew, &r.slice(i, j, k));
                    t -= r.apply(&nwi, &basis(n, j), &basis(n, k));
                    t -= r.apply(&basis(n, i), &nwj, &basis(n, k));
                    t -= r.apply(&basis(n, i), &basis(n, j), &nwk);
                    for l in 0..n {
                        out.set(w, i, j, k, l, t[l]);
                    }
                }
            }
        }
    }
    let norm = out.max_abs();
    Ok((out, norm))
}

/// Outcome of the structural symmetric-space conditions for a negatively
/// curved metric algebra.
#[derive(Debug, Clone)]
pub struct HeintzeReport {
    /// (a) `𝔞₂ = [𝔤′,𝔤′]` commutes with all of 𝔤′.
    pub cond_a: bool,
    /// (b) symmetric part of `ad A|𝔤′` is λ on 𝔞₁ and 2λ on 𝔞₂, and the
    /// skew part is a derivation of 𝔤′.
    pub cond_b: bool,
    /// (c) the J-maps built from the bracket form square to −id,
    /// anticommute, and close projectively.
    pub cond_c: bool,
    /// The eigenvalue λ from condition (b).
    pub lambda: f64,
    pub a1_dim: usize,
    pub a2_dim: usize,
    /// a ∧ b ∧ c — equivalent to ∇R = 0 for these algebras.
    pub pass: bool,
}

/// Checks the orthogonal-decomposition symmetric-space conditions.
///
/// Requires an orthonormal basis and a positive strict-negative-curvature
/// verdict (the decomposition is defined relative to the witness A).
pub fn heintze_check(g: &MetricAlgebra, tols: &Tolerances) -> Result<HeintzeReport> {
    require_orthonormal(g, tols)?;
    let verdict = snc_test_auto(g, tols)?;
    if !verdict.is_snc {
        return Err(CurvlieError::Precondition(
            "symmetric-space conditions are defined only for strictly negatively curved algebras"
                .into(),
        ));
    }
    let a = verdict
        .witness_a
        .expect("positive verdict carries a witness");
    let n = g.dim();
    let alg = &g.alg;
    let tol = tols.tol_curv;

    let gp = alg.derived_subalgebra(tols.tol_struct);
    let r = gp.ncols();
    // 𝔞₂ = [𝔤′, 𝔤′]
    let mut cols = Vec::new();
    for p in 0..r {
        for q in (p + 1)..r {
            cols.push(alg.bracket(&gp.column(p).into_owned(), &gp.column(q).into_owned())?);
        }
    }
    let a2 = if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        linalg::column_space(&DMatrix::from_columns(&cols), tols.tol_struct)
    };
    let t = a2.ncols();
    // 𝔞₁ = orthogonal complement of 𝔞₂ inside 𝔤′
    let mut a1_cols = gp.clone();
    for c in 0..r {
        let v = a1_cols.column(c).into_owned();
        let proj = linalg::project_onto(&a2, &v);
        a1_cols.set_column(c, &(v - proj));
    }
    let a1 = linalg::column_space(&a1_cols, tols.tol_struct);
    let r1 = a1.ncols();
    debug_assert_eq!(r1 + t, r, "𝔞₁ ⊕ 𝔞₂ fills 𝔤′");

    // (a): [𝔤′, 𝔞₂] = 0
    let mut cond_a = true;
    'outer: for p in 0..r {
        for q in 0..t {
            let v = alg.bracket(&gp.column(p).into_owned(), &a2.column(q).into_owned())?;
            if linalg::max_abs_vec(&v) > tol {
                cond_a = false;
                break 'outer;
            }
        }
    }

    // (b): split ad A|𝔤′ into symmetric and skew parts in basis (𝔞₁ | 𝔞₂)
    let b = {
        let mut m = DMatrix::zeros(n, r1 + t);
        m.columns_mut(0, r1).copy_from(&a1);
        m.columns_mut(r1, t).copy_from(&a2);
        m
    };
    let ada = alg.ad(&a)?;
    let m = b.transpose() * &ada * &b;
    let d0 = (&m + m.transpose()) * 0.5;
    let s0 = (&m - m.transpose()) * 0.5;
    let lambda = if r1 > 0 {
        (0..r1).map(|i| d0[(i, i)]).sum::<f64>() / r1 as f64
    } else {
        0.0
    };
    let mut cond_b = true;
    for i in 0..r1 {
        for j in 0..r1 {
            let want = if i == j { lambda } else { 0.0 };
            if (d0[(i, j)] - want).abs() > tol {
                cond_b = false;
            }
        }
    }
    for i in 0..t {
        for j in 0..t {
            let want = if i == j { 2.0 * lambda } else { 0.0 };
            if (d0[(r1 + i, r1 + j)] - want).abs() > tol {
                cond_b = false;
            }
        }
    }
    for i in 0..r1 {
        for j in 0..t {
            if d0[(i, r1 + j)].abs() > tol {
                cond_b = false;
            }
        }
    }
    // S₀ must be a skew derivation of 𝔤′ (checked in 𝔤′-coordinates)
    let sx = &b * &s0;
    for p in 0..(r1 + t) {
        for q in 0..(r1 + t) {
            let xp = b.column(p).into_owned();
            let xq = b.column(q).into_owned();
            let lhs = b.transpose() * alg.bracket(&xp, &xq)?;
            let term1 = b.transpose() * alg.bracket(&sx.column(p).into_owned(), &xq)?;
            let term2 = b.transpose() * alg.bracket(&xp, &sx.column(q).into_owned())?;
            let v = &s0 * lhs - term1 - term2;
            if linalg::max_abs_vec(&v) > tol {
                cond_b = false;
            }
        }
    }

    // (c): J-maps from the bracket form on 𝔞₁ against each Z_i ∈ 𝔞₂
    let mut cond_c = true;
    if t > 0 && r1 > 0 {
        if lambda.abs() <= tols.tol_eig {
            cond_c = false;
        } else {
            let mut js = Vec::with_capacity(t);
            for i in 0..t {
                let zi = a2.column(i).into_owned();
                let mut ji = DMatrix::zeros(r1, r1);
                for x in 0..r1 {
                    for y in 0..r1 {
                        let bxy = alg.bracket(
                            &a1.column(x).into_owned(),
                            &a1.column(y).into_owned(),
                        )?;
                        ji[(x, y)] = bxy.dot(&zi) / (2.0 * lambda);
                    }
                }
                js.push(ji);
            }
            let id = DMatrix::<f64>::identity(r1, r1);
            for ji in &js {
                if linalg::max_abs(&(ji * ji + &id)) > tol {
                    cond_c = false;
                }
            }
            for i in 0..t {
                for k in 0..t {
                    if i == k {
                        continue;
                    }
                    if linalg::max_abs(&(&js[i] * &js[k] + &js[k] * &js[i])) > tol {
                        cond_c = false;
                    }
                }
            }
            // (γ): J_iJ_k X stays inside span{J_1X, …, J_tX}
            for i in 0..t {
                for k in 0..t {
                    if i == k {
                        continue;
                    }
                    for x in 0..r1 {
                        let xv = basis(r1, x);
                        let target = &js[i] * (&js[k] * &xv);
                        let span =
                            DMatrix::from_columns(&js.iter().map(|j| j * &xv).collect::<Vec<_>>());
                        let sol = linalg::lstsq(&span, &target, 1e-12);
                        if linalg::max_abs_vec(&(&span * sol - &target)) > tol {
                            cond_c = false;
                        }
                    }
                }
            }
        }
    }

    let pass = cond_a && cond_b && cond_c;
    Ok(HeintzeReport {
        cond_a,
        cond_b,
        cond_c,
        lambda,
        a1_dim: r1,
        a2_dim: t,
        pass,
    })
}

/// Result of the randomized search for the largest sectional curvature.
#[derive(Debug, Clone)]
pub struct ScanResult {
    /// Largest sectional curvature found (a lower bound for the true max).
    pub max_k: f64,
    /// The 2-frame achieving it, in the orthonormal coordinates.
    pub argmax: (DVector<f64>, DVector<f64>),
}

/// Maximizes sectional curvature over random 2-planes, then refines the
/// best candidates by finite-difference gradient ascent on orthonormal
/// 2-frames.
///
/// Deterministic for fixed `samples` and `seed`. The result is a sampled
/// lower bound of the true maximum, reported as such.
pub fn negativity_scan(
    g: &MetricAlgebra,
    samples: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<ScanResult> {
    require_orthonormal(g, tols)?;
    let n = g.dim();
    if n < 2 {
        return Err(CurvlieError::Input(
            "sectional curvature needs dimension ≥ 2".into(),
        ));
    }
    if samples == 0 {
        return Err(CurvlieError::Input("sample count must be positive".into()));
    }
    let r = riemann(g, tols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let eval = |x: &DVector<f64>, y: &DVector<f64>| -> Option<f64> {
        let den = x.norm_squared() * y.norm_squared() - x.dot(y).powi(2);
        if den <= 1e-12 {
            return None;
        }
        Some(r.apply(x, y, y).dot(x) / den)
    };

    let mut pool: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        if let Some(k) = eval(&x, &y) {
            pool.push((k, x, y));
        }
    }
    if pool.is_empty() {
        return Err(CurvlieError::Computation(
            "all sampled planes were degenerate".into(),
        ));
    }
    pool.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("curvatures are finite"));
    let starts = pool.len().min(20);
    let mut best = pool[0].clone();

    let orthonormalize_frame = |x: &DVector<f64>, y: &DVector<f64>| {
        let xn = x / x.norm();
        let mut yn = y - &xn * xn.dot(y);
        let len = yn.norm();
        if len > 1e-12 {
            yn /= len;
        }
        (xn, yn)
    };

    for s in 0..starts {
        let (_, x0, y0) = &pool[s];
        let (mut x, mut y) = orthonormalize_frame(x0, y0);
        let mut k = match eval(&x, &y) {
            Some(k) => k,
            None => continue,
        };
        let step0 = 1e-2;
        let mut step = step0;
        let h = 1e-6;
        for _ in 0..200 {
            // finite-difference gradient over the 2n frame coordinates
            let mut grad = DVector::<f64>::zeros(2 * n);
            for c in 0..(2 * n) {
                let mut xp = x.clone();
                let mut yp = y.clone();
                let mut xm = x.clone();
                let mut ym = y.clone();
                if c < n {
                    xp[c] += h;
                    xm[c] -= h;
                } else {
                    yp[c - n] += h;
                    ym[c - n] -= h;
                }
                let kp = eval(&xp, &yp);
                let km = eval(&xm, &ym);
                grad[c] = match (kp, km) {
                    (Some(a), Some(b)) => (a - b) / (2.0 * h),
                    _ => 0.0,
                };
            }
            let gnorm = grad.norm();
            if gnorm < 1e-14 {
                break;
            }
            let xc = DVector::from_fn(n, |i, _| x[i] + step * grad[i] / gnorm);
            let yc = DVector::from_fn(n, |i, _| y[i] + step * grad[n + i] / gnorm);
            let (xc, yc) = orthonormalize_frame(&xc, &yc);
            match eval(&xc, &yc) {
                Some(kc) if kc > k => {
                    x = xc;
                    y = yc;
                    k = kc;
                }
                _ => {
                    step *= 0.5;
                    if step < 1e-12 {
                        step = step0;
                    }
                }
            }
        }
        if k > best.0 {
            best = (k, x, y);
        }
    }
    Ok(ScanResult {
        max_k: best.0,
        argmax: (best.1, best.2),
    })
}

/// Everything the curvature pipeline produces for one metric algebra, in
/// the orthonormalized basis.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    /// The orthonormal-basis metric algebra the tensors refer to.
    pub onb: MetricAlgebra,
    /// Change of basis from the input coordinates (columns = orthonormal
    /// basis vectors), identity when the input was already orthonormal.
    pub basis: DMatrix<f64>,
    pub u: Tensor3,
    pub connection: ConnectionTable,
    pub riemann: Tensor4,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub einstein: Option<f64>,
    pub nabla_r_norm: f64,
    pub symmetric_space: bool,
}

/// Orthonormalizes and assembles the full curvature report.
pub fn curvature_report(g: &MetricAlgebra, tols: &Tolerances) -> Result<CurvatureReport> {
    let (onb, basis) = g.orthonormalize()?;
    let u = u_table(&onb, tols)?;
    let connection = levi_civita(&onb, tols)?;
    let riemann = riemann_from(&onb.alg, &connection)?;
    let ricci = ricci_checked(&onb, &riemann, tols)?;
    let scalar = ricci.trace();
    let einstein = einstein_from(&ricci, tols);
    let (_, nabla_r_norm) = nabla_r(&onb, tols)?;
    let symmetric_space = nabla_r_norm <= tols.tol_curv;
    Ok(CurvatureReport {
        onb,
        basis,
        u,
        connection,
        riemann,
        ricci,
        scalar,
        einstein,
        nabla_r_norm,
        symmetric_space,
    })
}
