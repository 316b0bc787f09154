//! Canonical forms of derivations of the Heisenberg-line nilradical
//! (`[e1,e2] = e4`, with `e3` central).
//!
//! Derivations have a 2×2 generator-plane block `X`, a central eigenvalue
//! `x33`, a bracket eigenvalue tied to `tr X`, a free lower-left 2×2 block,
//! and a center-to-bracket coupling in the (4,3) slot. Two regimes exist:
//!
//! * **center-coupled** — the central eigenvalue equals `tr X` and the
//!   (4,3) coupling is genuinely nonzero. The coupling is an invariant and
//!   is normalized to one (families with the corner entry).
//! * **center-free** — otherwise. The (4,3) entry is removable, and the
//!   center row is either removable (diagonal-style families) or carries an
//!   eigenvalue coupling that is normalized to one.
//!
//! Each decision with a tolerance uses a guard band and refuses to choose
//! inside it, naming both candidate branches.

use nalgebra::{DMatrix, DVector};

use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

use super::abelian::jordan_intertwiner;
use super::catalog::family_derivation;
use super::{
    eig_blocks, named_params, require_positive_derivation, solve_unipotent_step, CanonicalForm,
    Family, NilpotentType, TrailBuilder,
};

fn unit(i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(4, 4);
    m[(i, j)] = 1.0;
    m
}

/// Directions in which `I + Σ t·g` is always an automorphism of the
/// Heisenberg-line algebra (the free lower-left block plus the center
/// column entry).
fn unipotent_generators() -> Vec<DMatrix<f64>> {
    vec![unit(2, 0), unit(2, 1), unit(3, 0), unit(3, 1), unit(3, 2)]
}

/// Block structure of the 2×2 generator plane.
#[derive(Debug, Clone, Copy)]
enum PlaneKind {
    /// Two real one-dimensional blocks, sorted ascending (equal when the
    /// plane is scalar).
    Split(f64, f64),
    /// One real defective block.
    Defective(f64),
    /// One complex pair `re ± im·i` with `im > 0`.
    Rotation(f64, f64),
}

fn plane_kind(x: &DMatrix<f64>, tol_eig: f64) -> Result<PlaneKind> {
    let mut singles: Vec<f64> = Vec::new();
    let mut defectives: Vec<f64> = Vec::new();
    let mut rotations: Vec<(f64, f64)> = Vec::new();
    for (lam, sizes) in eig_blocks(x, tol_eig)? {
        for size in sizes {
            match (lam.im == 0.0, size) {
                (true, 1) => singles.push(lam.re),
                (true, 2) => defectives.push(lam.re),
                (false, 1) => rotations.push((lam.re, lam.im)),
                _ => {
                    return Err(CurvlieError::Internal(format!(
                        "impossible 2×2 block structure (eigenvalue {lam}, size {size})"
                    )))
                }
            }
        }
    }
    match (singles.len(), defectives.len(), rotations.len()) {
        (2, 0, 0) => {
            singles.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            Ok(PlaneKind::Split(singles[0], singles[1]))
        }
        (0, 1, 0) => Ok(PlaneKind::Defective(defectives[0])),
        (0, 0, 1) => Ok(PlaneKind::Rotation(rotations[0].0, rotations[0].1)),
        sig => Err(CurvlieError::Internal(format!(
            "generator-plane signature {sig:?} has no catalog family"
        ))),
    }
}

/// Unit eigenvector of the 2×2 plane for a (numerically) real eigenvalue,
/// taken from the better-conditioned row of `X − λI`.
fn plane_eigenvector(x: &DMatrix<f64>, lam: f64) -> DVector<f64> {
    let m = x - DMatrix::<f64>::identity(2, 2) * lam;
    let n0 = m[(0, 0)].hypot(m[(0, 1)]);
    let n1 = m[(1, 0)].hypot(m[(1, 1)]);
    let (a, b) = if n0 >= n1 {
        (m[(0, 1)], -m[(0, 0)])
    } else {
        (m[(1, 1)], -m[(1, 0)])
    };
    let n = a.hypot(b);
    if n == 0.0 {
        // Scalar plane: every direction is an eigenvector.
        DVector::from_column_slice(&[1.0, 0.0])
    } else {
        DVector::from_column_slice(&[a / n, b / n])
    }
}

/// Conjugates so that the generator plane becomes exactly the catalog
/// block, leaving the central eigenvalue fixed and transforming the lower
/// rows along. Skips when the plane already matches.
fn align_generator_plane(
    tb: &mut TrailBuilder,
    catalog: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<()> {
    let current = tb.current().clone();
    let x_now = current.view((0, 0), (2, 2)).into_owned();
    let x_cat = catalog.view((0, 0), (2, 2)).into_owned();
    if linalg::max_abs(&(&x_now - &x_cat)) == 0.0 {
        return Ok(());
    }
    let sm = jordan_intertwiner(&x_now, &x_cat, tols)?;
    let det = sm.determinant();
    let sm_inv = linalg::try_inverse(&sm, "generator-plane alignment")?;
    let mut a = DMatrix::<f64>::zeros(4, 4);
    a.view_mut((0, 0), (2, 2)).copy_from(&sm);
    a[(2, 2)] = 1.0;
    a[(3, 3)] = det;
    let mut a_inv = DMatrix::<f64>::zeros(4, 4);
    a_inv.view_mut((0, 0), (2, 2)).copy_from(&sm_inv);
    a_inv[(2, 2)] = 1.0;
    a_inv[(3, 3)] = 1.0 / det;
    let mut after = &a * &current * &a_inv;
    after.view_mut((0, 0), (2, 2)).copy_from(&x_cat);
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        after[(i, j)] = 0.0;
    }
    after[(2, 2)] = current[(2, 2)];
    after[(3, 3)] = current[(3, 3)];
    tb.conjugate(a, after, "align the generator plane with the catalog layout")
}

/// Removes every lower entry except the kept coupling slot (if any) with
/// one unipotent automorphism. Skips when they already vanish.
fn clean_lower_rows(
    tb: &mut TrailBuilder,
    keep: Option<(usize, usize)>,
    tols: &Tolerances,
) -> Result<()> {
    let slots: Vec<(usize, usize)> = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]
        .into_iter()
        .filter(|slot| Some(*slot) != keep)
        .collect();
    let current = tb.current().clone();
    if slots.iter().all(|&(i, j)| current[(i, j)] == 0.0) {
        return Ok(());
    }
    let mut target = current.clone();
    for &(i, j) in &slots {
        target[(i, j)] = 0.0;
    }
    let a = solve_unipotent_step(
        &current,
        &target,
        &unipotent_generators(),
        tols.tol_struct,
        "lower-row cleanup",
    )?;
    tb.conjugate(a, target, "remove the removable lower entries")
}

/// Normalizes the kept coupling slot to one with a central rescaling
/// `diag(1,1,c,1)`. A row-2 coupling scales by `c`; the (4,3) coupling
/// scales by `1/c`.
fn normalize_coupling(tb: &mut TrailBuilder, slot: (usize, usize)) -> Result<()> {
    let v = tb.current()[slot];
    if v == 0.0 {
        return Err(CurvlieError::Internal(format!(
            "the coupling at {slot:?} vanished during cleanup"
        )));
    }
    if v == 1.0 {
        return Ok(());
    }
    let c = if slot.0 == 2 { 1.0 / v } else { v };
    let a = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1.0, c, 1.0]);
    let mut target = tb.current().clone();
    target[slot] = 1.0;
    tb.conjugate(a, target, "normalize the center coupling to one")
}

/// Canonicalizes a positive-spectrum derivation of the Heisenberg-line
/// algebra.
pub fn canonicalize_heisenberg_line(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    if d.nrows() != 4 || d.ncols() != 4 {
        return Err(CurvlieError::Input(format!(
            "Heisenberg-line canonicalization expects a 4×4 derivation, got {}×{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let nt = NilpotentType::C4;
    let model = nt.model();
    require_positive_derivation(&model, d, tols, "Heisenberg-line canonicalization")?;

    let scale = linalg::max_abs(d).max(1.0);
    let tol = tols.tol_struct * scale;
    let trace = d[(0, 0)] + d[(1, 1)];
    let center = d[(2, 2)];
    let coupling = d[(3, 2)];

    let gap_zero = Tolerances::is_zero_guarded(center - trace, tol);
    let coupling_zero = Tolerances::is_zero_guarded(coupling, tol);
    match (gap_zero, coupling_zero) {
        (Some(true), Some(false)) => center_coupled(d, tols),
        (Some(false), _) | (_, Some(true)) => center_free(d, tols),
        _ => Err(CurvlieError::Indeterminate(format!(
            "the pair (central eigenvalue − trace, center coupling) = \
             ({:.6e}, {:.6e}) sits in the guard band around ({tol:.1e}); candidate \
             branches: the center-coupled families 5C11–5C13 versus the \
             center-free families 5C1–5C8",
            center - trace,
            coupling
        ))),
    }
}

/// Center-coupled regime: the (4,3) coupling is an invariant; normalize it
/// to one after aligning the generator plane.
fn center_coupled(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    let xt = d.view((0, 0), (2, 2)).into_owned();
    let trace = xt[(0, 0)] + xt[(1, 1)];
    let (family, values, lambda, label) = match plane_kind(&xt, tols.tol_eig)? {
        PlaneKind::Split(d1, d2) => (
            Family::F5C11,
            vec![d1 / d2],
            1.0 / d2,
            "rescale the larger generator eigenvalue to one",
        ),
        PlaneKind::Defective(_) => (
            Family::F5C12,
            vec![],
            1.0 / trace,
            "rescale the generator-plane trace to one",
        ),
        PlaneKind::Rotation(_, b) => (
            Family::F5C13,
            vec![b / trace],
            1.0 / trace,
            "rescale the generator-plane trace to one",
        ),
    };
    let catalog = family_derivation(family, &values)?;
    let mut tb = TrailBuilder::new(NilpotentType::C4, d.clone(), tols);
    tb.scale(lambda, label)?;
    align_generator_plane(&mut tb, &catalog, tols)?;
    clean_lower_rows(&mut tb, Some((3, 2)), tols)?;
    normalize_coupling(&mut tb, (3, 2))?;
    let trail = tb.finish(catalog, family.tag())?;
    Ok(CanonicalForm {
        family,
        params: named_params(family, &values),
        trail,
    })
}

/// Center-free regime: decide whether the center row is removable, pick
/// the family and the kept coupling slot, then reduce.
fn center_free(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    let xt = d.view((0, 0), (2, 2)).into_owned();
    let center = d[(2, 2)];
    let row = DVector::from_column_slice(&[d[(2, 0)], d[(2, 1)]]);
    let scale = linalg::max_abs(d).max(1.0);
    let tol_gap = tols.tol_struct * scale;
    let tol_row = tols.tol_struct * scale.max(linalg::max_abs_vec(&row));

    struct Plan {
        family: Family,
        values: Vec<f64>,
        lambda: f64,
        label: &'static str,
        keep: Option<(usize, usize)>,
    }

    let plan = match plane_kind(&xt, tols.tol_eig)? {
        PlaneKind::Rotation(a, b) => Plan {
            // A real central eigenvalue never meets a complex pair, so the
            // center row is always removable here.
            family: Family::F5C3,
            values: vec![b / a, center / a],
            lambda: 1.0 / a,
            label: "rescale the rotation real part to one",
            keep: None,
        },
        PlaneKind::Split(d1, d2) if d1 == d2 => {
            // Scalar plane. When the central eigenvalue stays away from the
            // plane eigenvalue the shear system is invertible and the row is
            // removable whatever it contains; only on a collision does the
            // row itself decide between 5C1 and 5C4.
            let gap = Tolerances::is_zero_guarded(center - d1, tol_gap);
            let row_zero =
                Tolerances::is_zero_guarded(linalg::max_abs_vec(&row), tol_row);
            match (gap, row_zero) {
                (Some(false), _) | (_, Some(true)) => Plan {
                    family: Family::F5C1,
                    values: vec![1.0, center / d1],
                    lambda: 1.0 / d1,
                    label: "rescale the generator eigenvalue to one",
                    keep: None,
                },
                (Some(true), Some(false)) => Plan {
                    family: Family::F5C4,
                    values: vec![1.0],
                    lambda: 1.0 / d1,
                    label: "rescale the coupled eigenvalue to one",
                    keep: Some((2, 0)),
                },
                _ => {
                    return Err(CurvlieError::Indeterminate(format!(
                        "a scalar generator plane with center gap {:.6e} and center \
                         row magnitude {:.6e} sits inside a guard band (gap band \
                         {tol_gap:.1e}, row band {tol_row:.1e}); candidate branches: \
                         5C1 at x1 = 1 (row removable) or 5C4 at x = 1 (row coupled)",
                        center - d1,
                        linalg::max_abs_vec(&row)
                    )))
                }
            }
        }
        PlaneKind::Split(d1, d2) => {
            let g1 = Tolerances::is_zero_guarded(center - d1, tol_gap);
            let g2 = Tolerances::is_zero_guarded(center - d2, tol_gap);
            if g1 == Some(false) && g2 == Some(false) {
                Plan {
                    family: Family::F5C1,
                    values: vec![d1 / d2, center / d2],
                    lambda: 1.0 / d2,
                    label: "rescale the larger generator eigenvalue to one",
                    keep: None,
                }
            } else {
                let (gap, coupled, other) = if g1 != Some(false) {
                    (g1, d1, d2)
                } else {
                    (g2, d2, d1)
                };
                if (if coupled == d1 { g2 } else { g1 }) != Some(false) {
                    return Err(CurvlieError::Internal(format!(
                        "the central eigenvalue {center} is close to both generator \
                         eigenvalues {d1} and {d2}, which contradicts their cluster \
                         separation"
                    )));
                }
                let vhat = plane_eigenvector(&xt, coupled);
                let overlap = row.dot(&vhat).abs();
                match (gap, Tolerances::is_zero_guarded(overlap, tol_row)) {
                    // Row inside the row space: removable whether or not the
                    // eigenvalue actually collides.
                    (_, Some(true)) => Plan {
                        family: Family::F5C1,
                        values: vec![d1 / d2, center / d2],
                        lambda: 1.0 / d2,
                        label: "rescale the larger generator eigenvalue to one",
                        keep: None,
                    },
                    (Some(true), Some(false)) => {
                        let x = other / coupled;
                        if x >= 1.0 {
                            Plan {
                                family: Family::F5C4,
                                values: vec![x],
                                lambda: 1.0 / coupled,
                                label: "rescale the coupled eigenvalue to one",
                                keep: Some((2, 0)),
                            }
                        } else {
                            Plan {
                                family: Family::F5C6,
                                values: vec![x],
                                lambda: 1.0 / coupled,
                                label: "rescale the coupled eigenvalue to one",
                                keep: Some((2, 1)),
                            }
                        }
                    }
                    _ => {
                        return Err(CurvlieError::Indeterminate(format!(
                            "the central eigenvalue sits {:.6e} from a generator \
                             eigenvalue and the center row overlaps its eigenvector \
                             by {overlap:.6e}; one of the two falls in a guard band. \
                             Candidate branches: 5C1 (row removable) versus 5C4/5C6 \
                             (eigenvalue coupling kept)",
                            (center - coupled).abs()
                        )))
                    }
                }
            }
        }
        PlaneKind::Defective(mu) => {
            let gap = Tolerances::is_zero_guarded(center - mu, tol_gap);
            if gap == Some(false) {
                Plan {
                    family: Family::F5C2,
                    values: vec![center / mu],
                    lambda: 1.0 / mu,
                    label: "rescale the defective generator eigenvalue to one",
                    keep: None,
                }
            } else {
                let vhat = plane_eigenvector(&xt, mu);
                let overlap = row.dot(&vhat).abs();
                match (gap, Tolerances::is_zero_guarded(overlap, tol_row)) {
                    (Some(true), Some(true)) => Plan {
                        family: Family::F5C2,
                        values: vec![1.0],
                        lambda: 1.0 / mu,
                        label: "rescale the defective generator eigenvalue to one",
                        keep: None,
                    },
                    (None, Some(true)) => Plan {
                        family: Family::F5C2,
                        values: vec![center / mu],
                        lambda: 1.0 / mu,
                        label: "rescale the defective generator eigenvalue to one",
                        keep: None,
                    },
                    (Some(true), Some(false)) => Plan {
                        family: Family::F5C8,
                        values: vec![],
                        lambda: 1.0 / mu,
                        label: "rescale the defective generator eigenvalue to one",
                        keep: Some((2, 0)),
                    },
                    _ => {
                        return Err(CurvlieError::Indeterminate(format!(
                            "the central eigenvalue sits {:.6e} from the defective \
                             generator eigenvalue and the center row overlaps its \
                             eigenvector by {overlap:.6e}; one of the two falls in a \
                             guard band. Candidate branches: 5C2 (row removable) \
                             versus 5C8 (coupling kept)",
                            (center - mu).abs()
                        )))
                    }
                }
            }
        }
    };

    let catalog = family_derivation(plan.family, &plan.values)?;
    let mut tb = TrailBuilder::new(NilpotentType::C4, d.clone(), tols);
    tb.scale(plan.lambda, plan.label)?;
    align_generator_plane(&mut tb, &catalog, tols)?;
    if plan.family == Family::F5C4 && plan.values[0] == 1.0 {
        rotate_center_row(&mut tb)?;
    }
    clean_lower_rows(&mut tb, plan.keep, tols)?;
    if let Some(slot) = plan.keep {
        normalize_coupling(&mut tb, slot)?;
    }
    let trail = tb.finish(catalog, plan.family.tag())?;
    Ok(CanonicalForm {
        family: plan.family,
        params: named_params(plan.family, &plan.values),
        trail,
    })
}

/// For a scalar generator plane with a coupled center row: rotate the row
/// onto the first axis (determinant-one plane rotation), so the coupling
/// sits in the (3,1) slot.
fn rotate_center_row(tb: &mut TrailBuilder) -> Result<()> {
    let current = tb.current().clone();
    let (l0, l1) = (current[(2, 0)], current[(2, 1)]);
    if l1 == 0.0 && l0 >= 0.0 {
        return Ok(());
    }
    let r = l0.hypot(l1);
    if r == 0.0 {
        return Err(CurvlieError::Internal(
            "the coupled center row vanished before rotation".into(),
        ));
    }
    let (c, s) = (l0 / r, l1 / r);
    let mut a = DMatrix::<f64>::identity(4, 4);
    a[(0, 0)] = c;
    a[(0, 1)] = s;
    a[(1, 0)] = -s;
    a[(1, 1)] = c;
    let mut a_inv = DMatrix::<f64>::identity(4, 4);
    a_inv[(0, 0)] = c;
    a_inv[(0, 1)] = -s;
    a_inv[(1, 0)] = s;
    a_inv[(1, 1)] = c;
    let mut after = &a * &current * &a_inv;
    // The plane is scalar here, so the rotation fixes it exactly.
    after
        .view_mut((0, 0), (2, 2))
        .copy_from(&current.view((0, 0), (2, 2)));
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        after[(i, j)] = 0.0;
    }
    after[(2, 1)] = 0.0;
    after[(2, 2)] = current[(2, 2)];
    after[(3, 2)] = current[(3, 2)];
    after[(3, 3)] = current[(3, 3)];
    tb.conjugate(a, after, "rotate the center row onto the first axis")
}
