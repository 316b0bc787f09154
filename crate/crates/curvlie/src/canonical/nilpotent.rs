//! Recognition of the nilpotent algebras that occur as nilradicals in
//! dimensions 3 and 4, with construction of an adapted basis that realizes
//! the model bracket table exactly.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{basis, LieAlgebra};
use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

use super::{ChangeOfBasis, ConjugationDirection, NilpotentType};

/// Orthonormal basis of the range of `m`, chosen by greedy column pivoting
/// (largest residual first, lowest index on ties) so the result is
/// deterministic and reproduces standard bases exactly on model inputs.
fn greedy_range_basis(m: &DMatrix<f64>, k: usize, what: &str) -> Result<Vec<DVector<f64>>> {
    let mut residuals: Vec<DVector<f64>> =
        (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(k);
    for round in 0..k {
        let mut best = 0usize;
        let mut best_norm = residuals.first().map(|r| r.norm()).unwrap_or(0.0);
        for (j, r) in residuals.iter().enumerate().skip(1) {
            let nrm = r.norm();
            if nrm > best_norm + 1e-12 {
                best = j;
                best_norm = nrm;
            }
        }
        if best_norm <= 1e-9 {
            return Err(CurvlieError::Internal(format!(
                "{what}: needed {k} independent directions, found only {round}"
            )));
        }
        let v = residuals[best].clone() / best_norm;
        for r in residuals.iter_mut() {
            let c = v.dot(r);
            *r -= c * &v;
        }
        out.push(v);
    }
    Ok(out)
}

/// Orthonormal basis of the center `{x : [x, ·] = 0}`.
fn center_basis(alg: &LieAlgebra) -> Result<DMatrix<f64>> {
    let n = alg.dim();
    let mut stacked = DMatrix::<f64>::zeros(n * n, n);
    for i in 0..n {
        let ad = alg.ad(&basis(n, i))?;
        stacked.view_mut((i * n, 0), (n, n)).copy_from(&ad);
    }
    Ok(linalg::null_space(&stacked, 1e-9))
}

/// Projector onto the orthogonal complement of the columns of `q`
/// (assumed orthonormal).
fn complement_projector(n: usize, q: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::<f64>::identity(n, n) - q * q.transpose()
}

/// Largest structure-constant magnitude, floored at one, used to make the
/// degeneracy guards scale-invariant.
fn constant_scale(alg: &LieAlgebra) -> f64 {
    let n = alg.dim();
    let mut s = 1.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            s = s.max(linalg::max_abs_vec(&alg.bracket_basis(i, j)));
        }
    }
    s
}

fn columns_to_matrix(cols: &[DVector<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Worst entrywise difference between two bracket tables.
fn structure_distance(a: &LieAlgebra, b: &LieAlgebra) -> f64 {
    let n = a.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst
                .max(linalg::max_abs_vec(&(a.bracket_basis(i, j) - b.bracket_basis(i, j))));
        }
    }
    worst
}

/// Recognizes a nilpotent algebra of dimension 3 or 4 and returns its type
/// together with an adapted basis `T` (columns = new basis vectors) such
/// that the algebra expressed in that basis has exactly the model bracket
/// table of the type. The recorded direction is [`ConjugationDirection::POnRight`]:
/// a derivation `D` of the input becomes `T⁻¹·D·T` on the model.
///
/// Model inputs are recognized with the identity basis; scrambled inputs
/// get a freshly constructed adapted basis. Inputs that are not nilpotent
/// or have an unsupported dimension are rejected as input errors.
pub fn identify_nilpotent(
    alg: &LieAlgebra,
    tols: &Tolerances,
) -> Result<(NilpotentType, ChangeOfBasis)> {
    let n = alg.dim();
    if n != 3 && n != 4 {
        return Err(CurvlieError::Input(format!(
            "nilradical recognition covers dimensions 3 and 4, got dimension {n}"
        )));
    }
    if !alg.is_nilpotent(tols.tol_struct) {
        return Err(CurvlieError::Input(
            "the algebra is not nilpotent, so it cannot be the nilradical of a \
             negatively curved algebra of this kind"
                .into(),
        ));
    }
    let scale = constant_scale(alg);
    let derived = alg.derived_subalgebra(tols.tol_struct * scale);
    let d1 = derived.ncols();

    let (kind, t) = match (n, d1) {
        (3, 0) => (NilpotentType::A3, DMatrix::identity(3, 3)),
        (4, 0) => (NilpotentType::A4, DMatrix::identity(4, 4)),
        (3, 1) => (NilpotentType::H3, adapted_heisenberg3(alg, &derived)?),
        (4, 1) => (NilpotentType::C4, adapted_heisenberg_line(alg)?),
        (4, 2) => (NilpotentType::B4, adapted_filiform(alg, &derived, scale)?),
        _ => {
            return Err(CurvlieError::Input(format!(
                "no nilpotent algebra of dimension {n} with a {d1}-dimensional derived \
                 subalgebra occurs as a nilradical here"
            )));
        }
    };

    let model = kind.model();
    let transformed = alg.transform(&t)?;
    let dev = structure_distance(&transformed, &model);
    if dev > tols.tol_struct * scale.max(1.0) {
        return Err(CurvlieError::Internal(format!(
            "adapted basis fails to reproduce the {} bracket table \
             (deviation {dev:.3e} at scale {scale:.3e})",
            kind.tag()
        )));
    }
    Ok((
        kind,
        ChangeOfBasis {
            p: t,
            direction: ConjugationDirection::POnRight,
        },
    ))
}

/// Adapted basis for the Heisenberg algebra: pick an orthonormal pair
/// `f1, f2` spanning a complement of the derived line, then set
/// `f3 = [f1, f2]`, which is automatically nonzero and spans the derived
/// line. All model relations hold exactly by construction.
fn adapted_heisenberg3(alg: &LieAlgebra, derived: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let compl = complement_projector(3, derived);
    let f = greedy_range_basis(&compl, 2, "complement of the derived line")?;
    let f3 = alg.bracket(&f[0], &f[1])?;
    if f3.norm() <= 1e-9 * constant_scale(alg) {
        return Err(CurvlieError::Internal(
            "the bracket form on the complement of the derived line degenerated".into(),
        ));
    }
    Ok(columns_to_matrix(&[f[0].clone(), f[1].clone(), f3]))
}

/// Adapted basis for Heisenberg ⊕ line: the center is two-dimensional and
/// contains the derived line. Take an orthonormal pair `f1, f2` spanning a
/// complement of the center, set `f4 = [f1, f2]` (spans the derived line),
/// and complete with the central direction `f3` orthogonal to `f4`.
fn adapted_heisenberg_line(alg: &LieAlgebra) -> Result<DMatrix<f64>> {
    let center = center_basis(alg)?;
    if center.ncols() != 2 {
        return Err(CurvlieError::Internal(format!(
            "expected a 2-dimensional center, found dimension {}",
            center.ncols()
        )));
    }
    let compl = complement_projector(4, &center);
    let f = greedy_range_basis(&compl, 2, "complement of the center")?;
    let f4 = alg.bracket(&f[0], &f[1])?;
    if f4.norm() <= 1e-9 * constant_scale(alg) {
        return Err(CurvlieError::Internal(
            "the bracket form on the complement of the center degenerated".into(),
        ));
    }
    // Central direction orthogonal to f4, via the projector onto
    // center ∩ f4⊥ (rank one).
    let f4n = &f4 / f4.norm();
    let p_center = &center * center.transpose();
    let p_f4 = &f4n * f4n.transpose();
    let proj = &p_center - &p_center * &p_f4;
    let f3 = greedy_range_basis(&proj, 1, "central direction transverse to the bracket image")?
        .remove(0);
    Ok(columns_to_matrix(&[f[0].clone(), f[1].clone(), f3, f4]))
}

/// Adapted basis for the filiform algebra `[e1,e2] = e3`, `[e1,e3] = e4`.
///
/// The derived subalgebra is the plane `⟨e3, e4⟩` and the second lower
/// central term is the line `⟨e4⟩`. A spine vector `e1` is any complement
/// direction acting nontrivially on the derived plane; the complementary
/// direction is corrected to kill its action, and `e3 = [e1, e2]`,
/// `e4 = [e1, e3]` then satisfy the model table exactly.
fn adapted_filiform(
    alg: &LieAlgebra,
    derived: &DMatrix<f64>,
    scale: f64,
) -> Result<DMatrix<f64>> {
    let lcs = alg.lower_central_series(1e-9 * scale);
    // lcs[0] = algebra, lcs[1] = derived, lcs[2] = [g, g'].
    if lcs.len() < 3 || lcs[2].ncols() != 1 {
        return Err(CurvlieError::Internal(
            "filiform recognition expected a one-dimensional second lower central term".into(),
        ));
    }
    let w = lcs[2].column(0).into_owned();

    // Direction of the derived plane transverse to w.
    let p_derived = derived * derived.transpose();
    let p_w = &w * w.transpose();
    let proj = &p_derived - &p_derived * &p_w;
    let v3 = greedy_range_basis(&proj, 1, "derived direction transverse to the deep term")?
        .remove(0);

    // Complement pair and their actions on the derived plane.
    let compl = complement_projector(4, derived);
    let u = greedy_range_basis(&compl, 2, "complement of the derived plane")?;
    let a0 = w.dot(&alg.bracket(&u[0], &v3)?);
    let a1 = w.dot(&alg.bracket(&u[1], &v3)?);
    if a0.abs().max(a1.abs()) <= 1e-9 * scale {
        return Err(CurvlieError::Internal(
            "no complement direction acts on the derived plane; the algebra is not \
             the filiform one"
                .into(),
        ));
    }
    let (e1, other, a_spine) = if a0.abs() >= a1.abs() {
        (u[0].clone(), u[1].clone(), a0)
    } else {
        (u[1].clone(), u[0].clone(), a1)
    };
    // Correct the second generator so it acts trivially on the derived plane.
    let a_other = w.dot(&alg.bracket(&other, &v3)?);
    let e2 = &other - (a_other / a_spine) * &e1;

    let e3 = alg.bracket(&e1, &e2)?;
    let e4 = alg.bracket(&e1, &e3)?;
    if e4.norm() <= 1e-9 * scale {
        return Err(CurvlieError::Internal(
            "the spine action degenerated while building the filiform basis".into(),
        ));
    }
    Ok(columns_to_matrix(&[e1, e2, e3, e4]))
}
