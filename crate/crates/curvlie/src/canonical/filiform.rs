//! Canonical forms of derivations of the filiform nilradical
//! (`[e1,e2] = e3`, `[e1,e3] = e4`).
//!
//! Derivations are lower triangular with diagonal
//! `(x11, x22, x11+x22, 2·x11+x22)`, a free `(1,0)` coupling, and four
//! lower entries that unipotent automorphisms always remove. After scaling
//! the spine eigenvalue to one, the family is decided by whether the two
//! generator eigenvalues coincide and, if they do, whether the coupling
//! survives: distinct eigenvalues (or a trivial coupling) give the diagonal
//! family, a tied diagonal with a genuine coupling gives the defective one.

use nalgebra::DMatrix;

use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

use super::catalog::family_derivation;
use super::{
    guarded_is_zero, named_params, require_positive_derivation, solve_unipotent_step,
    CanonicalForm, Family, NilpotentType, TrailBuilder,
};

fn unit(i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(4, 4);
    m[(i, j)] = 1.0;
    m
}

/// Directions in which `I + Σ t·g` is always a filiform automorphism.
/// The (2,1) and (3,2) entries of an automorphism coincide, hence the
/// shared generator.
fn unipotent_generators() -> Vec<DMatrix<f64>> {
    vec![unit(2, 0), unit(2, 1) + unit(3, 2), unit(3, 0), unit(3, 1)]
}

/// Canonicalizes a positive-spectrum derivation of the filiform algebra.
pub fn canonicalize_filiform(d: &DMatrix<f64>, tols: &Tolerances) -> Result<CanonicalForm> {
    if d.nrows() != 4 || d.ncols() != 4 {
        return Err(CurvlieError::Input(format!(
            "filiform canonicalization expects a 4×4 derivation, got {}×{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let nt = NilpotentType::B4;
    let model = nt.model();
    require_positive_derivation(&model, d, tols, "filiform canonicalization")?;

    // Lower-triangular structure: the spine eigenvalue is the (0,0) entry.
    let spine = d[(0, 0)];
    if !(spine > 0.0) {
        return Err(CurvlieError::Precondition(format!(
            "the spine eigenvalue {spine} is not positive, so the derivation cannot \
             define a negatively curved expansion"
        )));
    }

    let mut tb = TrailBuilder::new(nt, d.clone(), tols);
    tb.scale(1.0 / spine, "rescale the spine eigenvalue to one")?;

    // Remove the four deep entries; the coupling (1,0) and the diagonal are
    // untouched by these generators.
    let lower_slots = [(2usize, 0usize), (2, 1), (3, 0), (3, 1), (3, 2)];
    let current = tb.current().clone();
    if lower_slots.iter().any(|&(i, j)| current[(i, j)] != 0.0) {
        let mut target = current.clone();
        for &(i, j) in &lower_slots {
            target[(i, j)] = 0.0;
        }
        let a = solve_unipotent_step(
            &current,
            &target,
            &unipotent_generators(),
            tols.tol_struct,
            "filiform deep-entry removal",
        )?;
        tb.conjugate(a, target, "remove the deep lower entries")?;
    }

    let current = tb.current().clone();
    let scale = linalg::max_abs(&current).max(1.0);
    let x = current[(1, 1)];
    let coupling = current[(1, 0)];

    let tied = guarded_is_zero(
        (x - 1.0).abs(),
        tols.tol_struct * scale,
        "the gap between the two generator eigenvalues",
        "the diagonal family 5B1 with distinct ratios, or the tied forms \
         (5B1 at x = 1 when the coupling vanishes, 5B2 when it does not)",
    )?;

    let (family, values) = if !tied {
        // Distinct eigenvalues: the coupling is always removable.
        if coupling != 0.0 {
            let a2 = coupling / (x - current[(0, 0)]);
            let mut a = DMatrix::<f64>::identity(4, 4);
            a[(1, 0)] = a2;
            let mut target = current.clone();
            target[(1, 0)] = 0.0;
            tb.conjugate(a, target, "remove the generator coupling")?;
        }
        (Family::F5B1, vec![x])
    } else {
        let coupled = !guarded_is_zero(
            coupling.abs(),
            tols.tol_struct * scale,
            "the generator coupling at a tied diagonal",
            "the diagonal family 5B1 at x = 1 (coupling negligible), or the \
             defective family 5B2 (coupling normalized to one)",
        )?;
        if coupled {
            if coupling != 1.0 {
                // Normalize the coupling to one by the diagonal automorphism
                // diag(1, c, c, c).
                let c = 1.0 / coupling;
                let a = DMatrix::from_diagonal(&nalgebra::dvector![1.0, c, c, c]);
                let mut target = current.clone();
                target[(1, 0)] = 1.0;
                tb.conjugate(a, target, "normalize the generator coupling to one")?;
            }
            (Family::F5B2, vec![])
        } else {
            (Family::F5B1, vec![1.0])
        }
    };

    let catalog = family_derivation(family, &values)?;
    let trail = tb.finish(catalog, family.tag())?;
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

    /// A filiform derivation from its seven free coordinates.
    fn derivation(
        x11: f64,
        x21: f64,
        x22: f64,
        x31: f64,
        x32: f64,
        x41: f64,
        x42: f64,
    ) -> DMatrix<f64> {
        dmatrix![
            x11, 0.0, 0.0, 0.0;
            x21, x22, 0.0, 0.0;
            x31, x32, x11 + x22, 0.0;
            x41, x42, x32, 2.0 * x11 + x22
        ]
    }

    fn random_b4_automorphism(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let nz = |rng: &mut ChaCha8Rng| loop {
            let v: f64 = rng.sample(rand_distr::StandardNormal);
            if v.abs() > 0.3 {
                break v;
            }
        };
        let g = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(rand_distr::StandardNormal) };
        let (a1, b2) = (nz(rng), nz(rng));
        let (a2, a3, b3, a4, b4) = (g(rng), g(rng), g(rng), g(rng), g(rng));
        dmatrix![
            a1, 0.0, 0.0, 0.0;
            a2, b2, 0.0, 0.0;
            a3, b3, a1 * b2, 0.0;
            a4, b4, a1 * b3, a1 * a1 * b2
        ]
    }

    #[test]
    fn the_automorphism_generators_are_genuine() {
        let model = NilpotentType::B4.model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let a = random_b4_automorphism(&mut rng);
            assert!(model.is_automorphism(&a, 1e-9).unwrap());
            let mut u = DMatrix::<f64>::identity(4, 4);
            for g in unipotent_generators() {
                u += g * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            assert!(model.is_automorphism(&u, 1e-9).unwrap());
        }
    }

    #[test]
    fn generic_distinct_diagonal_lands_on_the_diagonal_family() {
        let d = derivation(2.0, 0.7, 3.0, -1.2, 0.4, 2.2, -0.3);
        let form = canonicalize_filiform(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5B1);
        assert!((form.param("x").unwrap() - 1.5).abs() < 1e-12);
        let worst = form.trail.verify(&tols()).unwrap();
        assert!(worst < 1e-10, "trail residual {worst:.2e}");
    }

    #[test]
    fn tied_diagonal_with_coupling_is_the_defective_family() {
        let d = derivation(2.0, 5.0, 2.0, 1.0, -0.5, 0.25, 3.0);
        let form = canonicalize_filiform(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5B2);
        assert!(form.params.is_empty());
        form.trail.verify(&tols()).unwrap();
    }

    #[test]
    fn tied_diagonal_without_coupling_is_the_isotropic_diagonal_point() {
        let d = derivation(2.0, 0.0, 2.0, 1.0, -0.5, 0.25, 3.0);
        let form = canonicalize_filiform(&d, &tols()).unwrap();
        assert_eq!(form.family, Family::F5B1);
        assert_eq!(form.param("x").unwrap(), 1.0);
        form.trail.verify(&tols()).unwrap();
    }

    #[test]
    fn round_trips_under_automorphisms_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for (family, params) in [
            (Family::F5B1, vec![1.5]),
            (Family::F5B1, vec![0.3]),
            (Family::F5B1, vec![1.0]),
            (Family::F5B2, vec![]),
        ] {
            let d0 = family_derivation(family, &params).unwrap();
            for variant in 0..4 {
                let d = match variant {
                    0 => d0.clone(),
                    1 => &d0 * 2.3,
                    _ => {
                        let a = random_b4_automorphism(&mut rng);
                        let ainv = linalg::try_inverse(&a, "a").unwrap();
                        &a * &d0 * ainv * if variant == 3 { 0.41 } else { 1.0 }
                    }
                };
                let form = canonicalize_filiform(&d, &tols()).unwrap();
                assert_eq!(form.family, family, "{family} variant {variant}");
                let got = form.param_values();
                for (g, w) in got.iter().zip(&params) {
                    assert!(
                        (g - w).abs() < 1e-9,
                        "{family} variant {variant}: {got:?} vs {params:?}"
                    );
                }
                form.trail.verify(&tols()).unwrap();
            }
        }
    }

    #[test]
    fn guard_band_gaps_refuse_to_decide() {
        // Eigenvalue gap inside the guard band.
        let d = derivation(1.0, 0.5, 1.0 + 1e-8, 0.0, 0.0, 0.0, 0.0);
        let err = canonicalize_filiform(&d, &tols()).unwrap_err();
        match &err {
            CurvlieError::Indeterminate(msg) => {
                assert!(msg.contains("5B1") && msg.contains("5B2"), "got: {msg}");
            }
            other => panic!("expected indeterminate, got {other:?}"),
        }
        // Coupling inside the guard band at a tied diagonal.
        let d = derivation(1.0, 1e-8, 1.0, 0.0, 0.0, 0.0, 0.0);
        let err = canonicalize_filiform(&d, &tols()).unwrap_err();
        match &err {
            CurvlieError::Indeterminate(msg) => {
                assert!(msg.contains("5B1") && msg.contains("5B2"), "got: {msg}");
            }
            other => panic!("expected indeterminate, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_derivations_and_bad_spectra() {
        assert!(matches!(
            canonicalize_filiform(&DMatrix::identity(3, 3), &tols()),
            Err(CurvlieError::Input(_))
        ));
        // Upper entry violates the derivation law.
        let mut bad = derivation(1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0);
        bad[(0, 1)] = 1.0;
        assert!(matches!(
            canonicalize_filiform(&bad, &tols()),
            Err(CurvlieError::Precondition(_))
        ));
        // Negative spine.
        let neg = derivation(-1.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            canonicalize_filiform(&neg, &tols()),
            Err(CurvlieError::Precondition(_))
        ));
    }

    #[test]
    fn catalog_points_need_only_the_scale_step() {
        let d = family_derivation(Family::F5B1, &[1.5]).unwrap();
        let form = canonicalize_filiform(&d, &tols()).unwrap();
        assert_eq!(form.trail.steps.len(), 1);
        let d = family_derivation(Family::F5B2, &[]).unwrap();
        let form = canonicalize_filiform(&d, &tols()).unwrap();
        assert_eq!(form.trail.steps.len(), 1);
    }
}
