//! Canonical forms of derivations of the abelian nilradicals (dimensions
//! 3 and 4). Two positive-spectrum matrices define isomorphic expansions
//! exactly when they are similar up to a positive factor, so the canonical
//! form is a scaled real Jordan form with a normalization convention fixing
//! which eigenvalue becomes 1.

use nalgebra::{DMatrix, DVector};

use crate::error::{CurvlieError, Result};
use crate::jordan::real_jordan_form;
use crate::linalg;
use crate::tol::Tolerances;

use super::catalog::family_derivation;
use super::{
    eig_blocks, lex_min_tol, named_params, require_positive_derivation, CanonicalForm, Family,
    NilpotentType, TrailBuilder,
};

/// A similarity `a · s = t · a` between two matrices with (numerically)
/// equal spectra and Jordan structure, built from their real Jordan bases
/// and polished on the numerical intertwiner space so the residual reaches
/// machine precision even when the Jordan bases are ill-conditioned.
pub(crate) fn jordan_intertwiner(
    s: &DMatrix<f64>,
    t: &DMatrix<f64>,
    tols: &Tolerances,
) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let js = real_jordan_form(s, tols.tol_eig)?;
    let jt = real_jordan_form(t, tols.tol_eig)?;
    let jdev = linalg::max_abs(&(&js.j - &jt.j));
    let scale = linalg::max_abs(s).max(linalg::max_abs(t)).max(1.0);
    if jdev > 1e-6 * scale {
        return Err(CurvlieError::Internal(format!(
            "source and target Jordan forms disagree by {jdev:.3e}; the block \
             structures do not match"
        )));
    }
    let a0 = &jt.p * linalg::try_inverse(&js.p, "Jordan basis")?;

    let reference = scale.max(linalg::max_abs(&a0));
    let accept = |a: &DMatrix<f64>| -> bool {
        a.determinant().abs() > tols.tol_struct
            && linalg::max_abs(&(a * s - t * a)) <= tols.tol_struct * reference
    };

    // Polish: project onto the numerical solution space of a·s = t·a,
    // which is the kernel of sᵀ⊗I − I⊗t acting on column-major vec(a).
    let eye = DMatrix::<f64>::identity(n, n);
    let k = linalg::kron(&s.transpose(), &eye) - linalg::kron(&eye, t);
    let null = linalg::null_space(&k, 1e-12);
    if null.ncols() > 0 {
        let v = DVector::from_column_slice(a0.as_slice());
        let proj = &null * (null.transpose() * v);
        let refined = DMatrix::from_column_slice(n, n, proj.as_slice());
        if accept(&refined) {
            return Ok(refined);
        }
    }
    if accept(&a0) {
        return Ok(a0);
    }
    Err(CurvlieError::Internal(format!(
        "failed to build a verified similarity between the scaled derivation and \
         its canonical form (Jordan residuals {:.1e}/{:.1e}, basis condition \
         {:.1e}/{:.1e}); the spectrum is too close to a structure boundary for \
         the working tolerance",
        js.residual, jt.residual, js.condition, jt.condition
    )))
}

/// Spectral data collected from the Jordan block structure.
#[derive(Debug, Default)]
struct Blocks {
    real_singles: Vec<f64>,
    real_j2: Vec<f64>,
    real_j3: Vec<f64>,
    real_j4: Vec<f64>,
    cx_singles: Vec<(f64, f64)>,
    cx_j2: Vec<(f64, f64)>,
}

fn collect_blocks(d: &DMatrix<f64>, tols: &Tolerances) -> Result<Blocks> {
    let mut b = Blocks::default();
    for (lam, sizes) in eig_blocks(d, tols.tol_eig)? {
        for size in sizes {
            if lam.im == 0.0 {
                match size {
                    1 => b.real_singles.push(lam.re),
                    2 => b.real_j2.push(lam.re),
                    3 => b.real_j3.push(lam.re),
                    4 => b.real_j4.push(lam.re),
                    _ => {
                        return Err(CurvlieError::Internal(format!(
                            "unexpected Jordan block size {size}"
                        )))
                    }
                }
            } else {
                match size {
                    1 => b.cx_singles.push((lam.re, lam.im)),
                    2 => b.cx_j2.push((lam.re, lam.im)),
                    _ => {
                        return Err(CurvlieError::Internal(format!(
                            "unexpected complex Jordan block size {size}"
                        )))
                    }
                }
            }
        }
    }
    b.real_singles.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
    b.real_j2.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
    Ok(b)
}

/// Decides the family, parameter values, and normalizing scale for the
/// spectrum of an abelian-nilradical derivation.
fn decide(d: &DMatrix<f64>, tols: &Tolerances) -> Result<(Family, Vec<f64>, f64)> {
    let n = d.nrows();
    let b = collect_blocks(d, tols)?;
    let sig = (
        b.real_singles.len(),
        b.real_j2.len(),
        b.real_j3.len(),
        b.real_j4.len(),
        b.cx_singles.len(),
        b.cx_j2.len(),
    );
    Ok(match (n, sig) {
        (3, (3, 0, 0, 0, 0, 0)) => {
            let (m1, m2, m3) = (b.real_singles[0], b.real_singles[1], b.real_singles[2]);
            (Family::F4A1, vec![m1 / m3, m2 / m3], 1.0 / m3)
        }
        (3, (1, 1, 0, 0, 0, 0)) => {
            let j = b.real_j2[0];
            (Family::F4A2, vec![b.real_singles[0] / j], 1.0 / j)
        }
        (3, (0, 0, 1, 0, 0, 0)) => (Family::F4A3, vec![], 1.0 / b.real_j3[0]),
        (3, (1, 0, 0, 0, 1, 0)) => {
            let mu = b.real_singles[0];
            let (a, bb) = b.cx_singles[0];
            (Family::F4A4, vec![a / mu, bb / mu], 1.0 / mu)
        }
        (4, (4, 0, 0, 0, 0, 0)) => {
            let m = &b.real_singles;
            (
                Family::F5A1,
                vec![m[0] / m[3], m[1] / m[3], m[2] / m[3]],
                1.0 / m[3],
            )
        }
        (4, (2, 1, 0, 0, 0, 0)) => {
            let j = b.real_j2[0];
            (
                Family::F5A2,
                vec![b.real_singles[0] / j, b.real_singles[1] / j],
                1.0 / j,
            )
        }
        (4, (2, 0, 0, 0, 1, 0)) => {
            let (a, bb) = b.cx_singles[0];
            (
                Family::F5A3,
                vec![b.real_singles[0] / a, b.real_singles[1] / a, bb / a],
                1.0 / a,
            )
        }
        (4, (1, 0, 1, 0, 0, 0)) => {
            let j = b.real_j3[0];
            (Family::F5A4, vec![b.real_singles[0] / j], 1.0 / j)
        }
        (4, (0, 2, 0, 0, 0, 0)) => {
            let (small, large) = (b.real_j2[0], b.real_j2[1]);
            (Family::F5A5, vec![small / large], 1.0 / large)
        }
        (4, (0, 1, 0, 0, 1, 0)) => {
            let (a, bb) = b.cx_singles[0];
            (Family::F5A6, vec![b.real_j2[0] / a, bb / a], 1.0 / a)
        }
        (4, (0, 0, 0, 0, 2, 0)) => {
            let (r1, s1) = b.cx_singles[0];
            let (r2, s2) = b.cx_singles[1];
            // Two rescalings reach a unit real part; take the
            // lexicographically smallest parameter tuple.
            let cands = vec![
                vec![r1 / r2, s1 / r2, s2 / r2],
                vec![r2 / r1, s2 / r1, s1 / r1],
            ];
            let pick = lex_min_tol(&cands, tols.tol_eig);
            let lambda = if pick == 0 { 1.0 / r2 } else { 1.0 / r1 };
            (Family::F5A7, cands[pick].clone(), lambda)
        }
        (4, (0, 0, 0, 1, 0, 0)) => (Family::F5A8, vec![], 1.0 / b.real_j4[0]),
        (4, (0, 0, 0, 0, 0, 1)) => {
            let (r, s) = b.cx_j2[0];
            (Family::F5A9, vec![s / r, s / r], 1.0 / r)
        }
        _ => {
            return Err(CurvlieError::Internal(format!(
                "spectrum signature {sig:?} has no catalog family in dimension {}",
                n + 1
            )))
        }
    })
}

/// Canonicalizes a positive-spectrum derivation of the abelian nilradical
/// of dimension 3 or 4: rescales the distinguished eigenvalue to one and
/// conjugates onto the catalog layout, recording a two-step trail.
pub fn canonicalize_abelian(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    let n = d.nrows();
    let nt = match n {
        3 => NilpotentType::A3,
        4 => NilpotentType::A4,
        _ => {
            return Err(CurvlieError::Input(format!(
                "abelian canonicalization covers nilradical dimensions 3 and 4, got {n}"
            )))
        }
    };
    let model = nt.model();
    require_positive_derivation(&model, d, tols, "abelian canonicalization")?;

    let (family, values, lambda) = decide(d, tols)?;
    let target = family_derivation(family, &values)?;

    let mut tb = TrailBuilder::new(nt, d.clone(), tols);
    tb.scale(lambda, "rescale the distinguished eigenvalue to one")?;
    let a = jordan_intertwiner(tb.current(), &target, tols)?;
    tb.conjugate(a, target.clone(), "align the eigenstructure with the catalog layout")?;
    let trail = tb.finish(target, family.tag())?;

    Ok(CanonicalForm {
        family,
        params: named_params(family, &values),
        trail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    /// Conjugates the catalog matrix by a random well-conditioned map and
    /// checks that canonicalization recovers family and parameters.
    fn round_trip(family: Family, params: &[f64], seed: u64) {
        let d0 = family_derivation(family, params).unwrap();
        let n = d0.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for variant in 0..3 {
            let d = match variant {
                0 => d0.clone(),
                1 => &d0 * 2.3,
                _ => {
                    let p = loop {
                        let cand = DMatrix::<f64>::from_fn(n, n, |_, _| {
                            rng.sample(rand_distr::StandardNormal)
                        });
                        if linalg::condition_number(&cand) < 30.0 {
                            break cand;
                        }
                    };
                    &p * &d0 * linalg::try_inverse(&p, "p").unwrap()
                }
            };
            let form = canonicalize_abelian(&d, &tols()).unwrap();
            assert_eq!(form.family, family, "variant {variant}");
            let got = form.param_values();
            for (g, w) in got.iter().zip(params) {
                assert!(
                    (g - w).abs() < 1e-9,
                    "{family} variant {variant}: params {got:?} vs {params:?}"
                );
            }
            let worst = form.trail.verify(&tols()).unwrap();
            assert!(worst <= 1e-9, "{family} variant {variant}: trail residual {worst:.2e}");
        }
    }

    #[test]
    fn diagonal_three_by_three_matches_the_pinned_example() {
        // diag(2,4,2) → eigenvalue ratios (1/2, 1/2) with scale 1/4.
        let d = DMatrix::from_diagonal(&nalgebra::dvector![2.0, 4.0, 2.0]);
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F4A1);
        assert!((form.param("x").unwrap() - 0.5).abs() < 1e-12);
        assert!((form.param("y").unwrap() - 0.5).abs() < 1e-12);
        match form.trail.steps[0].action {
            super::super::StepAction::Scale(l) => assert!((l - 0.25).abs() < 1e-12),
            _ => panic!("first step must be the rescaling"),
        }
    }

    #[test]
    fn identity_is_the_isotropic_point() {
        let form = canonicalize_abelian(&DMatrix::identity(3, 3), &tols()).unwrap();
        assert_eq!(form.family, Family::F4A1);
        assert_eq!(form.param("x").unwrap(), 1.0);
        assert_eq!(form.param("y").unwrap(), 1.0);
    }

    #[test]
    fn full_jordan_block_in_dimension_four() {
        // A conjugated J4 lands on the single defective family.
        let j4 = family_derivation(Family::F5A8, &[]).unwrap();
        let p = dmatrix![
            1.0, 0.3, -0.2, 0.5;
            0.0, 1.0, 0.7, -0.4;
            0.2, 0.0, 1.0, 0.6;
            -0.3, 0.1, 0.0, 1.0
        ];
        let d = &p * (2.0 * &j4) * linalg::try_inverse(&p, "p").unwrap();
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A8);
        form.trail.verify(&tols()).unwrap();
    }

    #[test]
    fn dimension_three_families_round_trip() {
        round_trip(Family::F4A1, &[0.4, 0.8], 21);
        round_trip(Family::F4A2, &[2.0], 22);
        round_trip(Family::F4A2, &[0.6], 23);
        round_trip(Family::F4A3, &[], 24);
        round_trip(Family::F4A4, &[0.8, 1.3], 25);
    }

    #[test]
    fn dimension_four_families_round_trip() {
        round_trip(Family::F5A1, &[0.3, 0.5, 0.8], 31);
        round_trip(Family::F5A2, &[0.4, 0.9], 32);
        round_trip(Family::F5A3, &[0.4, 0.9, 0.7], 33);
        round_trip(Family::F5A4, &[1.2], 34);
        round_trip(Family::F5A5, &[0.5], 35);
        round_trip(Family::F5A6, &[0.9, 1.1], 36);
        round_trip(Family::F5A7, &[0.5, 0.3, 0.7], 37);
        round_trip(Family::F5A9, &[0.8, 0.8], 39);
    }

    #[test]
    fn coincident_eigenvalues_snap_to_exact_ties() {
        // Two equal Jordan pairs: the ratio parameter is exactly one.
        let d = family_derivation(Family::F5A5, &[1.0]).unwrap();
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A5);
        assert_eq!(form.param("y1").unwrap(), 1.0);
        // A double rotation with one cluster classifies as the two-rotation
        // family at the exact tie.
        let r = family_derivation(Family::F5A7, &[1.0, 0.7, 0.7]).unwrap();
        let form = canonicalize_abelian(&r, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A7);
        assert_eq!(form.param("a").unwrap(), 1.0);
        assert!((form.param("b").unwrap() - 0.7).abs() < 1e-12);
        assert!((form.param("bp").unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn swapped_rotation_pairs_take_the_lexicographically_smaller_form() {
        // rot(2, 1.4) ⊕ rot(1, 0.6) rescales by 1/2 onto (0.5, 0.3, 0.7).
        let d = family_derivation(Family::F5A7, &[2.0, 1.4, 0.6]).unwrap();
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A7);
        let got = form.param_values();
        for (g, w) in got.iter().zip(&[0.5, 0.3, 0.7]) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn oversized_jordan_pair_rescales_below_one() {
        let d = family_derivation(Family::F5A5, &[2.0]).unwrap();
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A5);
        assert!((form.param("y1").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distinct_coupled_rotations_reduce_to_the_two_rotation_family() {
        // The coupled layout with b ≠ bp is diagonalizable: 5A7(1, b, bp).
        let d = family_derivation(Family::F5A9, &[0.5, 1.5]).unwrap();
        let form = canonicalize_abelian(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5A7);
        let got = form.param_values();
        for (g, w) in got.iter().zip(&[1.0, 0.5, 1.5]) {
            assert!((g - w).abs() < 1e-9, "{got:?}");
        }
        form.trail.verify(&tols()).unwrap();
    }

    #[test]
    fn rejects_wrong_dimension_and_non_positive_spectrum() {
        assert!(matches!(
            canonicalize_abelian(&DMatrix::identity(5, 5), &tols()),
            Err(CurvlieError::Input(_))
        ));
        let neg = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -2.0, 3.0]);
        assert!(matches!(
            canonicalize_abelian(&neg, &tols()),
            Err(CurvlieError::Precondition(_))
        ));
        let boundary = DMatrix::from_diagonal(&nalgebra::dvector![1.0, 1e-12, 3.0]);
        assert!(matches!(
            canonicalize_abelian(&boundary, &tols()),
            Err(CurvlieError::Indeterminate(_))
        ));
    }

    #[test]
    fn intertwiner_is_machine_precision_on_defective_input() {
        let j = family_derivation(Family::F4A3, &[]).unwrap();
        let p = dmatrix![1.0, 2.0, 0.0; 0.5, 1.0, 1.0; 0.0, -0.5, 1.0];
        let s = &p * &j * linalg::try_inverse(&p, "p").unwrap();
        let a = jordan_intertwiner(&s, &j, &tols()).unwrap();
        let resid = linalg::max_abs(&(&a * &s - &j * &a));
        assert!(resid < 1e-11, "residual {resid:.2e}");
        assert!(a.determinant().abs() > 1e-9);
    }
}
