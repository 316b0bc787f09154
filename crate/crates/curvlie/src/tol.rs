//! Tolerance configuration shared by every numerical decision in the crate.
//!
//! Three tolerances cover three kinds of question:
//!
//! * `tol_struct` — structural identities that should hold to machine
//!   accuracy after a handful of floating-point operations (Jacobi sums,
//!   derivation constraints, conjugation residuals, rank decisions).
//! * `tol_eig` — eigenvalue sign guards. Eigenvalues of small dense
//!   matrices carry more noise than structural residuals, and strict
//!   inequalities (`Re λ > 0`) need a guard band: values inside the band
//!   are reported as indeterminate rather than silently signed.
//! * `tol_curv` — curvature table matching (Ricci entries, `∇R` norms,
//!   closed-form comparisons).
//!
//! Branch predicates in the canonicalizers ("is this entry zero?") use
//! `tol_struct` with a multiplicative guard band [`GUARD_FACTOR`]: values
//! below the tolerance count as zero, values above `GUARD_FACTOR` times the
//! tolerance count as nonzero, and anything in between is refused as
//! indeterminate so that a noisy input cannot silently flip a branch.

use serde::{Deserialize, Serialize};

/// Default tolerance for structural identities and rank decisions.
pub const TOL_STRUCT: f64 = 1e-9;

/// Default guard band for eigenvalue sign decisions.
pub const TOL_EIG: f64 = 1e-7;

/// Default tolerance for curvature comparisons.
pub const TOL_CURV: f64 = 1e-9;

/// Width of the indeterminate band around branch predicates, as a multiple
/// of the deciding tolerance.
pub const GUARD_FACTOR: f64 = 10.0;

/// Condition-number threshold above which a change of basis is flagged.
pub const COND_WARN: f64 = 1e12;

/// Tolerance bundle threaded through every operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Structural identities (Jacobi, derivation constraints, ranks).
    pub tol_struct: f64,
    /// Eigenvalue sign guard band.
    pub tol_eig: f64,
    /// Curvature table matching.
    pub tol_curv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_struct: TOL_STRUCT,
            tol_eig: TOL_EIG,
            tol_curv: TOL_CURV,
        }
    }
}

impl Tolerances {
    /// Classifies a predicate value against a tolerance with the guard
    /// band: `Some(true)` = zero, `Some(false)` = nonzero, `None` =
    /// indeterminate (inside the guard band).
    pub fn is_zero_guarded(value: f64, tol: f64) -> Option<bool> {
        let v = value.abs();
        if v <= tol {
            Some(true)
        } else if v > GUARD_FACTOR * tol {
            Some(false)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_strictly_positive() {
        let t = Tolerances::default();
        assert!(t.tol_struct > 0.0 && t.tol_eig > 0.0 && t.tol_curv > 0.0);
    }

    #[test]
    fn guard_band_splits_three_ways() {
        let tol = 1e-9;
        assert_eq!(Tolerances::is_zero_guarded(1e-10, tol), Some(true));
        assert_eq!(Tolerances::is_zero_guarded(1e-7, tol), Some(false));
        assert_eq!(
            Tolerances::is_zero_guarded(5e-9, tol),
            None,
            "values between tol and GUARD_FACTOR*tol are indeterminate"
        );
    }
}
