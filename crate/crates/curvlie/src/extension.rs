//! Rank-one solvable extensions 𝔫(D) and the strict-negative-curvature
//! criterion.
//!
//! Every algebra in the dimension-4/5 catalog is an *expanded algebra*: a
//! nilpotent 𝔫 extended by one generator A_D acting as a derivation D,
//!
//! ```text
//! 𝔫(D) = 𝔫 ⊕ ℝ·A_D,   [A_D, x] = D(x)  for x ∈ 𝔫.
//! ```
//!
//! Such an algebra admits a left-invariant metric of strictly negative
//! sectional curvature exactly when the derived subalgebra has codimension
//! one and some A orthogonal to it has `ad A|𝔤′` with spectrum entirely in
//! the open right half-plane (flipping A ↦ −A when the spectrum sits in
//! the left half-plane). [`snc_test`] decides that criterion; expansions by
//! two derivations are isomorphic exactly when an [`OEquivWitness`]
//! relates them, which [`o_equivalence_check`] verifies.

use nalgebra::{DMatrix, DVector};

pub use crate::algebra::milnor_algebra;
use crate::algebra::{self, LieAlgebra, MetricAlgebra};
use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::Tolerances;

/// A nilpotent algebra together with its rank-one solvable extension.
///
/// Basis layout: the first `n − 1` basis vectors are 𝔫's basis, the last
/// one is A_D.
#[derive(Debug, Clone)]
pub struct ExpandedAlgebra {
    pub nil: LieAlgebra,
    pub d: DMatrix<f64>,
    pub total: LieAlgebra,
}

/// Builds 𝔫(D). Fails when `d` is not a derivation of `nil`.
pub fn expand(nil: &LieAlgebra, d: &DMatrix<f64>, tols: &Tolerances) -> Result<ExpandedAlgebra> {
    let n = nil.dim();
    if d.nrows() != n || d.ncols() != n {
        return Err(CurvlieError::Input(format!(
            "derivation is {}×{}, nilpotent part has dimension {n}",
            d.nrows(),
            d.ncols()
        )));
    }
    let defect = nil.derivation_defect(d)?;
    if defect > tols.tol_struct {
        return Err(CurvlieError::Precondition(format!(
            "map is not a derivation (Leibniz defect {defect:.3e})"
        )));
    }
    let mut total = LieAlgebra::abelian(n + 1)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut coeffs = vec![0.0; n + 1];
            for k in 0..n {
                coeffs[k] = nil.c(i, j, k);
            }
            total.set_bracket(i, j, &coeffs);
        }
        // [A_D, e_j] = D e_j, stored as [e_j, A_D] = −D e_j
        let mut coeffs = vec![0.0; n + 1];
        for k in 0..n {
            coeffs[k] = -d[(k, i)];
        }
        total.set_bracket(i, n, &coeffs);
    }
    debug_assert!(
        total.jacobi_defect() <= 1e-9,
        "expansion by a derivation satisfies Jacobi automatically"
    );
    Ok(ExpandedAlgebra {
        nil: nil.clone(),
        d: d.clone(),
        total,
    })
}

/// Outcome of the strict-negative-curvature criterion.
#[derive(Debug, Clone)]
pub struct SncVerdict {
    /// Codimension-one derived subalgebra AND right-half-plane spectrum.
    pub is_snc: bool,
    /// Whether dim 𝔤′ = dim 𝔤 − 1.
    pub codim_ok: bool,
    /// The element A (possibly sign-flipped) whose adjoint action
    /// witnesses the criterion; absent when the verdict is negative.
    pub witness_a: Option<DVector<f64>>,
    /// Real parts of the spectrum of ad A|𝔤′, ascending; for the flipped
    /// A when a flip occurred, and empty when the codimension check fails.
    pub eigen_real_parts: Vec<f64>,
}

/// Tests the negative-curvature criterion with a caller-supplied A.
///
/// When every real part is negative, −A is taken instead (the criterion is
/// symmetric under that flip); mixed signs fail. Real parts within
/// `tol_eig` of zero make the verdict indeterminate.
pub fn snc_test(g: &LieAlgebra, a: &DVector<f64>, tols: &Tolerances) -> Result<SncVerdict> {
    let n = g.dim();
    if a.len() != n {
        return Err(CurvlieError::Input(format!(
            "witness vector has dimension {}, algebra has {n}",
            a.len()
        )));
    }
    if linalg::max_abs_vec(a) == 0.0 {
        return Err(CurvlieError::Input("witness vector is zero".into()));
    }
    if !g.is_solvable(tols.tol_struct) {
        return Err(CurvlieError::Precondition(
            "algebra is not solvable".into(),
        ));
    }
    let span = g.derived_subalgebra(tols.tol_struct);
    let residual = a - linalg::project_onto(&span, a);
    if linalg::max_abs_vec(&residual) <= tols.tol_struct * linalg::max_abs_vec(a).max(1.0) {
        return Err(CurvlieError::Input(
            "witness vector lies in the derived subalgebra".into(),
        ));
    }
    let codim_ok = span.ncols() + 1 == n;
    if !codim_ok {
        return Ok(SncVerdict {
            is_snc: false,
            codim_ok: false,
            witness_a: None,
            eigen_real_parts: Vec::new(),
        });
    }
    // restriction of ad A to the invariant subspace 𝔤′
    let ada = g.ad(a)?;
    let restricted = span.transpose() * &ada * &span;
    let mut parts: Vec<f64> = algebra::eigenvalues(&restricted)?
        .iter()
        .map(|ev| ev.re)
        .collect();
    let (mut a, flipped) = if parts.iter().all(|&r| r < -tols.tol_eig) {
        (-a.clone(), true)
    } else {
        (a.clone(), false)
    };
    if flipped {
        for r in parts.iter_mut() {
            *r = -*r;
        }
    }
    if let Some(&r) = parts.iter().find(|r| r.abs() <= tols.tol_eig) {
        return Err(CurvlieError::Indeterminate(format!(
            "spectrum real part {r:.3e} inside the sign guard band"
        )));
    }
    parts.sort_by(|x, y| x.partial_cmp(y).expect("real parts are finite"));
    let is_snc = parts.iter().all(|&r| r > tols.tol_eig);
    if !is_snc {
        a = DVector::zeros(0); // unused
    }
    Ok(SncVerdict {
        is_snc,
        codim_ok: true,
        witness_a: if is_snc { Some(a) } else { None },
        eigen_real_parts: parts,
    })
}

/// Runs [`snc_test`] with A spanning the metric orthogonal complement of
/// the derived subalgebra. A codimension other than one yields a negative
/// verdict with no witness.
pub fn snc_test_auto(g: &MetricAlgebra, tols: &Tolerances) -> Result<SncVerdict> {
    let n = g.dim();
    let span = g.alg.derived_subalgebra(tols.tol_struct);
    if span.ncols() + 1 != n {
        return Ok(SncVerdict {
            is_snc: false,
            codim_ok: false,
            witness_a: None,
            eigen_real_parts: Vec::new(),
        });
    }
    // A ⊥ 𝔤′ in the metric: Bᵀ·gram·A = 0
    let ker = linalg::null_space(&(span.transpose() * &g.gram), tols.tol_struct);
    if ker.ncols() != 1 {
        return Err(CurvlieError::Computation(
            "metric complement of the derived subalgebra is not a line".into(),
        ));
    }
    let mut a = ker.column(0).into_owned();
    // normalize to unit metric length with a deterministic sign
    let len = (a.dot(&(&g.gram * &a))).sqrt();
    a /= len;
    let lead = a
        .iter()
        .cloned()
        .max_by(|x, y| x.abs().partial_cmp(&y.abs()).expect("finite entries"))
        .expect("dimension is positive");
    if lead < 0.0 {
        a = -a;
    }
    snc_test(&g.alg, &a, tols)
}

/// Witness for equivalence of expansions: D₁ = g⁻¹·ad(x)·g + λ·g⁻¹·D₂·g.
#[derive(Debug, Clone)]
pub struct OEquivWitness {
    /// Automorphism of the nilpotent algebra.
    pub g: DMatrix<f64>,
    /// Element of the nilpotent algebra.
    pub x: DVector<f64>,
    /// Nonzero rescaling of the derivation.
    pub lambda: f64,
}

impl OEquivWitness {
    /// The identity witness (g = id, x = 0, λ = 1).
    pub fn identity(dim: usize) -> Self {
        OEquivWitness {
            g: DMatrix::identity(dim, dim),
            x: DVector::zeros(dim),
            lambda: 1.0,
        }
    }

    /// The witness for the reversed pair: if this witness relates
    /// (d₁, d₂), the returned one relates (d₂, d₁). Derivation of the
    /// formula: conjugating the defining relation by g and dividing by λ
    /// gives d₂ = g·d₁·g⁻¹/λ − ad(x)/λ, and ad(x)/λ = h⁻¹·ad(−g⁻¹x/λ)·h
    /// for h = g⁻¹ because conjugation by an automorphism transports
    /// adjoint maps.
    pub fn reversed(&self, nil: &LieAlgebra) -> Result<OEquivWitness> {
        let ginv = linalg::try_inverse(&self.g, "witness automorphism")?;
        let _ = nil; // the formula is basis-free; nil fixes the context
        Ok(OEquivWitness {
            g: ginv.clone(),
            x: -(&ginv * &self.x) / self.lambda,
            lambda: 1.0 / self.lambda,
        })
    }
}

/// Verifies `d1 = g⁻¹·ad(x)·g + λ·g⁻¹·d2·g` to structural tolerance.
///
/// This is witness *verification* only; constructing witnesses is the
/// canonicalization module's job.
pub fn o_equivalence_check(
    nil: &LieAlgebra,
    d1: &DMatrix<f64>,
    d2: &DMatrix<f64>,
    w: &OEquivWitness,
    tols: &Tolerances,
) -> Result<bool> {
    for (name, d) in [("first", d1), ("second", d2)] {
        if !nil.is_derivation(d, tols.tol_struct)? {
            return Err(CurvlieError::Precondition(format!(
                "{name} map is not a derivation"
            )));
        }
    }
    if !nil.is_automorphism(&w.g, tols.tol_struct)? {
        return Err(CurvlieError::Precondition(
            "witness map is not an automorphism".into(),
        ));
    }
    if w.lambda.abs() <= tols.tol_struct {
        return Err(CurvlieError::Input("witness scale is zero".into()));
    }
    let ginv = linalg::try_inverse(&w.g, "witness automorphism")?;
    let adx = nil.ad(&w.x)?;
    let rhs = &ginv * &adx * &w.g + (&ginv * d2 * &w.g) * w.lambda;
    Ok(linalg::max_abs(&(d1 - rhs)) <= tols.tol_struct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::basis;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn diag(entries: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(entries))
    }

    #[test]
    fn expanding_abelian_by_identity_gives_milnor_algebra() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let ext = expand(&a3, &DMatrix::identity(3, 3), &tols()).unwrap();
        let (milnor, _) =
            milnor_algebra(&DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(ext.total, milnor);
    }

    #[test]
    fn expanding_heisenberg_by_half_half_one_matches_bracket_table() {
        let ext = expand(
            &LieAlgebra::heisenberg3(),
            &diag(&[0.5, 0.5, 1.0]),
            &tols(),
        )
        .unwrap();
        let t = &ext.total;
        assert_eq!(t.dim(), 4);
        assert_eq!(t.jacobi_defect(), 0.0);
        // [e4, e1] = e1/2, [e4, e3] = e3, nilpotent bracket kept
        assert_eq!(t.c(3, 0, 0), 0.5);
        assert_eq!(t.c(3, 2, 2), 1.0);
        assert_eq!(t.c(0, 1, 2), 1.0);
    }

    #[test]
    fn expanding_filiform_by_weight_ladder_matches_bracket_table() {
        let mut b4 = LieAlgebra::abelian(4).unwrap();
        b4.set_bracket(0, 1, &[0.0, 0.0, 1.0, 0.0]);
        b4.set_bracket(0, 2, &[0.0, 0.0, 0.0, 1.0]);
        let x = 0.7;
        let ext = expand(&b4, &diag(&[1.0, x, 1.0 + x, 2.0 + x]), &tols()).unwrap();
        // [e5, e4] = (2+x) e4
        assert!((ext.total.c(4, 3, 3) - (2.0 + x)).abs() < 1e-12);
        assert_eq!(ext.total.jacobi_defect(), 0.0);
    }

    #[test]
    fn expansion_rejects_non_derivations() {
        let err = expand(&LieAlgebra::heisenberg3(), &DMatrix::identity(3, 3), &tols());
        assert!(matches!(err, Err(CurvlieError::Precondition(_))));
    }

    #[test]
    fn expansion_by_invertible_derivation_has_full_nilpotent_derived_algebra() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let ext = expand(&a3, &diag(&[1.0, 2.0, 3.0]), &tols()).unwrap();
        let span = ext.total.derived_subalgebra(1e-9);
        assert_eq!(span.ncols(), 3);
        // the span is 𝔫 itself: no A_D component
        for c in 0..3 {
            assert!(span[(3, c)].abs() < 1e-12);
        }
    }

    #[test]
    fn snc_holds_for_diagonal_positive_weights() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let ext = expand(&a3, &diag(&[0.5, 2.0, 1.0]), &tols()).unwrap();
        let v = snc_test(&ext.total, &basis(4, 3), &tols()).unwrap();
        assert!(v.is_snc && v.codim_ok);
        assert_eq!(v.eigen_real_parts.len(), 3);
        let expect = [0.5, 1.0, 2.0];
        for (got, want) in v.eigen_real_parts.iter().zip(expect) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn snc_fails_on_abelian_codimension() {
        let a4 = LieAlgebra::abelian(4).unwrap();
        let v = snc_test(&a4, &basis(4, 3), &tols()).unwrap();
        assert!(!v.is_snc && !v.codim_ok);
        assert!(v.witness_a.is_none());
    }

    #[test]
    fn snc_fails_on_mixed_signs() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let ext = expand(&a3, &diag(&[1.0, -1.0, 1.0]), &tols()).unwrap();
        let v = snc_test(&ext.total, &basis(4, 3), &tols()).unwrap();
        assert!(!v.is_snc && v.codim_ok);
        assert!(v.witness_a.is_none());
    }

    #[test]
    fn snc_flips_the_witness_when_spectrum_is_negative() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let ext = expand(&a3, &diag(&[-1.0, -2.0, -1.0]), &tols()).unwrap();
        let v = snc_test(&ext.total, &basis(4, 3), &tols()).unwrap();
        assert!(v.is_snc);
        let w = v.witness_a.unwrap();
        assert!((w[3] + 1.0).abs() < 1e-12, "witness is −e4");
        assert_eq!(v.eigen_real_parts, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn snc_rejects_witness_inside_derived_algebra() {
        let ext = expand(
            &LieAlgebra::heisenberg3(),
            &diag(&[0.5, 0.5, 1.0]),
            &tols(),
        )
        .unwrap();
        let err = snc_test(&ext.total, &basis(4, 2), &tols());
        assert!(matches!(err, Err(CurvlieError::Input(_))));
    }

    #[test]
    fn snc_auto_picks_the_metric_complement() {
        // double eigenvalue 1/2 on the plane, 1 on the center
        let d = DMatrix::from_row_slice(
            3,
            3,
            &[0.5, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.0],
        );
        let ext = expand(&LieAlgebra::heisenberg3(), &d, &tols()).unwrap();
        let v = snc_test_auto(&MetricAlgebra::standard(ext.total), &tols()).unwrap();
        assert!(v.is_snc);
        let expect = [0.5, 0.5, 1.0];
        for (got, want) in v.eigen_real_parts.iter().zip(expect) {
            assert!((got - want).abs() < 1e-7);
        }
    }

    #[test]
    fn snc_auto_rejects_nilpotent_input_by_codimension() {
        let v = snc_test_auto(
            &MetricAlgebra::standard(LieAlgebra::heisenberg3()),
            &tols(),
        )
        .unwrap();
        assert!(!v.is_snc && !v.codim_ok);
    }

    #[test]
    fn snc_auto_on_rotation_coupled_block_form() {
        // [e1,e2] = e4 with D = rotation(1/2, ±1) ⊕ lower-2-chain(1)
        let mut c4 = LieAlgebra::abelian(4).unwrap();
        c4.set_bracket(0, 1, &[0.0, 0.0, 0.0, 1.0]);
        let d = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 1.0, 0.0, 0.0, //
                -1.0, 0.5, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, 1.0,
            ],
        );
        let ext = expand(&c4, &d, &tols()).unwrap();
        let v = snc_test_auto(&MetricAlgebra::standard(ext.total), &tols()).unwrap();
        assert!(v.is_snc);
        let expect = [0.5, 0.5, 1.0, 1.0];
        for (got, want) in v.eigen_real_parts.iter().zip(expect) {
            assert!((got - want).abs() < 1e-7);
        }
    }

    #[test]
    fn o_equivalence_is_reflexive_and_respects_scaling() {
        let h3 = LieAlgebra::heisenberg3();
        let d1 = diag(&[0.5, 0.5, 1.0]);
        let w = OEquivWitness::identity(3);
        assert!(o_equivalence_check(&h3, &d1, &d1, &w, &tols()).unwrap());
        let d2 = &d1 * 2.0;
        let half = OEquivWitness {
            lambda: 0.5,
            ..OEquivWitness::identity(3)
        };
        assert!(o_equivalence_check(&h3, &d1, &d2, &half, &tols()).unwrap());
    }

    #[test]
    fn o_equivalence_rejects_distinct_eigenvalue_ratios() {
        let a3 = LieAlgebra::abelian(3).unwrap();
        let d1 = diag(&[1.0, 2.0, 3.0]);
        let d2 = DMatrix::identity(3, 3);
        for lambda in [1.0, 2.0, 0.5] {
            let w = OEquivWitness {
                lambda,
                ..OEquivWitness::identity(3)
            };
            assert!(!o_equivalence_check(&a3, &d1, &d2, &w, &tols()).unwrap());
        }
    }

    #[test]
    fn reversed_witness_validates_the_swapped_pair() {
        let h3 = LieAlgebra::heisenberg3();
        let d2 = diag(&[0.5, 0.5, 1.0]);
        let g = diag(&[2.0, 3.0, 6.0]); // automorphism of the Heisenberg algebra
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let lambda = 1.7;
        let ginv = linalg::try_inverse(&g, "g").unwrap();
        let d1 = &ginv * h3.ad(&x).unwrap() * &g + (&ginv * &d2 * &g) * lambda;
        let w = OEquivWitness {
            g: g.clone(),
            x,
            lambda,
        };
        assert!(o_equivalence_check(&h3, &d1, &d2, &w, &tols()).unwrap());
        let back = w.reversed(&h3).unwrap();
        assert!(o_equivalence_check(&h3, &d2, &d1, &back, &tols()).unwrap());
    }
}
