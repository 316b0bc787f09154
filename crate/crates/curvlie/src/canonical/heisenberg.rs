//! Canonical forms of derivations of the Heisenberg nilradical
//! (families with a three-dimensional non-abelian nilradical).
//!
//! A derivation has the block form `[[X, 0], [l, tr X]]` with `X` the
//! action on the span of the two generators and `l` a shear into the
//! center. The canonical form normalizes the central eigenvalue `tr X` to
//! one, removes the shear, and puts `X` into its catalog layout; only the
//! structure of `X` (split, defective, or rotation) distinguishes the
//! three families.

use nalgebra::{DMatrix, DVector};

use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

use super::abelian::jordan_intertwiner;
use super::catalog::family_derivation;
use super::{
    eig_blocks, named_params, require_positive_derivation, CanonicalForm, Family, NilpotentType,
    TrailBuilder,
};

/// Embeds a 2×2 generator-plane map `s` as the Heisenberg automorphism
/// `blkdiag(s, det s)`.
fn generator_plane_automorphism(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(3, 3);
    a.view_mut((0, 0), (2, 2)).copy_from(s);
    a[(2, 2)] = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    a
}

/// Canonicalizes a positive-spectrum derivation of the Heisenberg algebra:
/// scale the central eigenvalue to one, shear away the center row, and
/// align the generator-plane block with its catalog layout.
pub fn canonicalize_heisenberg(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    if d.nrows() != 3 || d.ncols() != 3 {
        return Err(CurvlieError::Input(format!(
            "Heisenberg canonicalization expects a 3×3 derivation, got {}×{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let nt = NilpotentType::H3;
    let model = nt.model();
    require_positive_derivation(&model, d, tols, "Heisenberg canonicalization")?;

    // The central eigenvalue is the (2,2) entry (block-triangular form).
    let s = d[(2, 2)];
    if !(s > 0.0) {
        return Err(CurvlieError::Precondition(format!(
            "the central eigenvalue {s} is not positive, so the derivation cannot \
             define a negatively curved expansion"
        )));
    }

    let mut tb = TrailBuilder::new(nt, d.clone(), tols);
    tb.scale(1.0 / s, "rescale the central eigenvalue to one")?;

    // Shear: kill the center row. With the central eigenvalue at one the
    // row transforms as l ↦ l + w·(X − I), and X − I is invertible because
    // the eigenvalues of X sum to one with positive real parts.
    let current = tb.current().clone();
    let x = current.view((0, 0), (2, 2)).into_owned();
    let l = DVector::from_column_slice(&[current[(2, 0)], current[(2, 1)]]);
    if linalg::max_abs_vec(&l) > 0.0 {
        let xmi = &x - DMatrix::<f64>::identity(2, 2);
        let xmi_t_inv = linalg::try_inverse(&xmi.transpose(), "shear system")?;
        let w = xmi_t_inv * (-&l);
        let mut a1 = DMatrix::<f64>::identity(3, 3);
        a1[(2, 0)] = w[0];
        a1[(2, 1)] = w[1];
        let mut target = current.clone();
        target[(2, 0)] = 0.0;
        target[(2, 1)] = 0.0;
        tb.conjugate(a1, target, "shear the center row to zero")?;
    }

    // Family decision from the generator-plane block structure.
    let blocks = eig_blocks(&x, tols.tol_eig)?;
    let mut real_singles: Vec<f64> = Vec::new();
    let mut real_j2: Vec<f64> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    for (lam, sizes) in blocks {
        for size in sizes {
            match (lam.im == 0.0, size) {
                (true, 1) => real_singles.push(lam.re),
                (true, 2) => real_j2.push(lam.re),
                (false, 1) => rotations.push((lam.re, lam.im)),
                _ => {
                    return Err(CurvlieError::Internal(format!(
                        "impossible 2×2 block structure (eigenvalue {lam}, size {size})"
                    )))
                }
            }
        }
    }
    real_singles.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let (family, values) = match (real_singles.len(), real_j2.len(), rotations.len()) {
        (2, 0, 0) => (Family::F4B1, vec![real_singles[0]]),
        (0, 1, 0) => (Family::F4B2, vec![]),
        (0, 0, 1) => (Family::F4B3, vec![rotations[0].1]),
        sig => {
            return Err(CurvlieError::Internal(format!(
                "generator-plane signature {sig:?} has no catalog family"
            )))
        }
    };

    let target = family_derivation(family, &values)?;
    if linalg::max_abs(&(tb.current() - &target)) > 0.0 {
        let x_now = tb.current().view((0, 0), (2, 2)).into_owned();
        let x_cat = target.view((0, 0), (2, 2)).into_owned();
        let s2 = jordan_intertwiner(&x_now, &x_cat, tols)?;
        let a2 = generator_plane_automorphism(&s2);
        tb.conjugate(
            a2,
            target.clone(),
            "align the generator plane with the catalog layout",
        )?;
    }
    let trail = tb.finish(target, family.tag())?;

    Ok(CanonicalForm {
        family,
        params: named_params(family, &values),
        trail,
    })
}
