//! End-to-end verification suite.
//!
//! Nine numbered behavioral criteria exercise the full pipeline — curvature
//! closed forms, Einstein and locally-symmetric detection, the structural
//! symmetric-space conditions, constant-curvature models, the Milnor frame
//! law, classification round-trips, tensor identities, and a randomized
//! negativity scan. Each criterion reports a pass/fail verdict, the worst
//! numeric deviation it saw, and notes on known discrepancies in the printed
//! source tables it checks against.
//!
//! Criterion 9 is *soft*: it documents instances whose sampled maximal
//! sectional curvature is positive. Those are honest findings, reported as a
//! soft failure together with weak-coupling representatives of the same
//! classified families that do scan negative; the suite as a whole passes on
//! the hard criteria alone.

use crate::algebra::{milnor_algebra, LieAlgebra, MetricAlgebra};
use crate::tol::Tolerances;
use crate::canonical::{
    catalog_entries, catalog_instantiate, classify, family_derivation, CanonicalForm, Family,
    NilpotentType,
};
use crate::error::{CurvlieError, Result};
use crate::extension::expand;
use crate::geometry::{
    heintze_check, is_einstein, levi_civita, nabla_r, negativity_scan, ricci, ricci_direct,
    riemann, sectional_from, u_map,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Outcome of one verification criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    /// Criterion number, 1–9.
    pub id: usize,
    /// Short behavioral name.
    pub name: &'static str,
    /// Hard criteria gate the suite; soft ones only report.
    pub hard: bool,
    /// True when every check inside the criterion held.
    pub pass: bool,
    /// Worst deviation observed across the criterion's numeric checks.
    pub max_dev: f64,
    /// Number of individual checks performed.
    pub checks: usize,
    /// Known-discrepancy annotations and informational findings.
    pub notes: Vec<String>,
    /// Descriptions of every check that failed.
    pub failures: Vec<String>,
}

impl CriterionResult {
    /// One-word status for report lines.
    pub fn status(&self) -> &'static str {
        match (self.pass, self.hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "SOFT FAIL",
        }
    }
}

/// Accumulates checks for one criterion.
struct Crit {
    id: usize,
    name: &'static str,
    hard: bool,
    max_dev: f64,
    checks: usize,
    notes: Vec<String>,
    failures: Vec<String>,
}

impl Crit {
    fn new(id: usize, name: &'static str, hard: bool) -> Self {
        Crit {
            id,
            name,
            hard,
            max_dev: 0.0,
            checks: 0,
            notes: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// Records a numeric deviation that must stay within `limit`.
    fn dev(&mut self, value: f64, limit: f64, what: &str) {
        self.checks += 1;
        if value.is_nan() || value > self.max_dev {
            self.max_dev = if value.is_nan() { f64::INFINITY } else { value.max(self.max_dev) };
        }
        if !(value <= limit) {
            self.failures
                .push(format!("{what}: deviation {value:.3e} exceeds {limit:.1e}"));
        }
    }

    /// Records a boolean check.
    fn ensure(&mut self, ok: bool, what: &str) {
        self.checks += 1;
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn fail(&mut self, text: String) {
        self.checks += 1;
        self.failures.push(text);
    }

    fn finish(self) -> CriterionResult {
        CriterionResult {
            id: self.id,
            name: self.name,
            hard: self.hard,
            pass: self.failures.is_empty(),
            max_dev: self.max_dev,
            checks: self.checks,
            notes: self.notes,
            failures: self.failures,
        }
    }
}

/// Runs a criterion body, converting an abort into an explicit failure.
fn guarded(c: &mut Crit, body: impl FnOnce(&mut Crit) -> Result<()>) {
    if let Err(e) = body(c) {
        c.fail(format!("criterion aborted: {e}"));
    }
}

/// Runs all nine criteria with the given tolerances and scan seed.
pub fn run_all(tols: &Tolerances, seed: u64) -> Vec<CriterionResult> {
    vec![
        criterion_1(tols),
        criterion_2(tols),
        criterion_3(tols),
        criterion_4(tols),
        criterion_5(tols),
        criterion_6(tols, seed),
        criterion_7(tols, seed),
        criterion_8(tols, seed),
        criterion_9(tols, seed),
    ]
}

/// True when every hard criterion passed.
pub fn suite_passes(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.pass || !r.hard)
}

fn inst(family: Family, params: &[f64], tols: &Tolerances) -> Result<MetricAlgebra> {
    catalog_instantiate(family, params, tols)
}

/// Standard basis vector.
fn ev(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

fn fmt_params(params: &[f64]) -> String {
    if params.is_empty() {
        String::new()
    } else {
        let inner: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
        format!("({})", inner.join(", "))
    }
}

fn case_label(family: Family, params: &[f64]) -> String {
    format!("{}{}", family.tag(), fmt_params(params))
}

// ---------------------------------------------------------------------------
// Criterion 1: closed-form Ricci tensors in dimension 4.
// ---------------------------------------------------------------------------

fn criterion_1(tols: &Tolerances) -> CriterionResult {
    let mut c = Crit::new(1, "closed-form Ricci tensors", true);
    guarded(&mut c, |c| {
        let lim = tols.tol_curv;

        // Family 4A1: diagonal derivation (x, y, 1) on the abelian part.
        for &x in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for &y in &[0.2, 0.4, 0.6, 0.8, 1.0] {
                if x > y {
                    continue;
                }
                let g = inst(Family::F4A1, &[x, y], tols)?;
                let ric = ricci(&g, tols)?;
                let t = x + y + 1.0;
                let want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                    -x * t,
                    -y * t,
                    -t,
                    -(x * x + y * y + 1.0),
                ]));
                c.dev(
                    max_abs_diff(&ric, &want),
                    lim,
                    &format!("Ricci closed form on 4A1({x}, {y})"),
                );
            }
        }
        // Symmetric-part pin: U(e1, e1) = x·e4.
        {
            let (x, y) = (0.3, 0.8);
            let g = inst(Family::F4A1, &[x, y], tols)?;
            let u = u_map(&g, &ev(4, 0), &ev(4, 0), tols)?;
            let want = x * ev(4, 3);
            c.dev(
                (u - want).abs().max(),
                lim,
                "connection symmetric part U(e1, e1) on 4A1(0.3, 0.8)",
            );
        }

        // Family 4A2: eigenvalue z plus a Jordan pair at 1.
        for &z in &[0.3, 0.9, 1.0, 1.7, 2.5] {
            let g = inst(Family::F4A2, &[z], tols)?;
            let ric = ricci(&g, tols)?;
            let mut want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                -z * (z + 2.0),
                -z - 1.5,
                -z - 2.5,
                -z * z - 2.5,
            ]));
            want[(1, 2)] = -0.5 * z - 1.0;
            want[(2, 1)] = -0.5 * z - 1.0;
            c.dev(
                max_abs_diff(&ric, &want),
                lim,
                &format!("Ricci closed form on 4A2({z})"),
            );
        }

        // Family 4A3: a single Jordan block of size 3 at eigenvalue 1.
        {
            let g = inst(Family::F4A3, &[], tols)?;
            let ric = ricci(&g, tols)?;
            let mut want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                -2.5, -3.0, -3.5, -4.0,
            ]));
            want[(0, 1)] = -1.5;
            want[(1, 0)] = -1.5;
            want[(1, 2)] = -1.5;
            want[(2, 1)] = -1.5;
            c.dev(max_abs_diff(&ric, &want), lim, "Ricci closed form on 4A3");
        }

        // Family 4A4: rotation block (a, b) plus eigenvalue 1. The Ricci
        // tensor is independent of the rotation speed b.
        for &a in &[0.4, 0.7, 1.0, 1.6, 2.2] {
            for &b in &[0.5, 0.9, 1.0, 1.7, 2.2] {
                let g = inst(Family::F4A4, &[a, b], tols)?;
                let ric = ricci(&g, tols)?;
                let want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                    -2.0 * a * a - a,
                    -2.0 * a * a - a,
                    -2.0 * a - 1.0,
                    -2.0 * a * a - 1.0,
                ]));
                c.dev(
                    max_abs_diff(&ric, &want),
                    lim,
                    &format!("Ricci closed form on 4A4({a}, {b})"),
                );
            }
        }

        // Family 4B1: diagonal derivation (1−x, x, 1) on the Heisenberg part.
        for &x in &[0.1, 0.25, 0.4, 0.5, 0.75] {
            let g = inst(Family::F4B1, &[x], tols)?;
            let ric = ricci(&g, tols)?;
            let want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                -2.0 * (1.0 - x) - 0.5,
                -2.0 * x - 0.5,
                -1.5,
                -((1.0 - x) * (1.0 - x) + x * x + 1.0),
            ]));
            c.dev(
                max_abs_diff(&ric, &want),
                lim,
                &format!("Ricci closed form on 4B1({x})"),
            );
        }
        // Symmetric-part pin: U(e1, e3) = −½·e2.
        {
            let g = inst(Family::F4B1, &[0.25], tols)?;
            let u = u_map(&g, &ev(4, 0), &ev(4, 2), tols)?;
            let want = -0.5 * ev(4, 1);
            c.dev(
                (u - want).abs().max(),
                lim,
                "connection symmetric part U(e1, e3) on 4B1(0.25)",
            );
        }

        // Family 4B2: Jordan pair at ½ plus eigenvalue 1 on the Heisenberg
        // part. The printed closed form for this family is garbled in the
        // source table, so the authoritative check here is the agreement of
        // two independent computational paths; the values asserted below were
        // cross-validated against that agreement.
        {
            let g = inst(Family::F4B2, &[], tols)?;
            let ric = ricci(&g, tols)?;
            let rd = ricci_direct(&g, tols)?;
            let r = riemann(&g, tols)?;
            let mut contracted = DMatrix::zeros(4, 4);
            for x in 0..4 {
                for y in 0..4 {
                    let mut s = 0.0;
                    for i in 0..4 {
                        s += r.get(i, x, y, i);
                    }
                    contracted[(x, y)] = s;
                }
            }
            c.dev(
                max_abs_diff(&contracted, &rd),
                lim,
                "two-path Ricci agreement on 4B2 (curvature contraction vs direct formula)",
            );
            let mut want = DMatrix::from_diagonal(&DVector::from_vec(vec![
                -1.0, -2.0, -1.5, -2.0,
            ]));
            want[(0, 1)] = -1.0;
            want[(1, 0)] = -1.0;
            c.dev(max_abs_diff(&ric, &want), lim, "Ricci values on 4B2");
            let u = u_map(&g, &ev(4, 0), &ev(4, 3), tols)?;
            let want_u = -0.25 * ev(4, 0) - 0.5 * ev(4, 1);
            c.dev(
                (u - want_u).abs().max(),
                lim,
                "connection symmetric part U(e1, e4) on 4B2",
            );
            c.note(
                "4B2: the printed source table garbles this family's mixed connection \
                 entry; the asserted Ricci and U values are confirmed by the two-path \
                 agreement above"
                    .to_string(),
            );
        }

        // Family 4B3: rotation at real part ½ plus eigenvalue 1; the Ricci
        // tensor is constantly −3/2 times the metric.
        for &a in &[0.3, 0.8, 1.0, 2.0, 5.0] {
            let g = inst(Family::F4B3, &[a], tols)?;
            let ric = ricci(&g, tols)?;
            let want = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.5; 4]));
            c.dev(
                max_abs_diff(&ric, &want),
                lim,
                &format!("Ricci closed form on 4B3({a})"),
            );
        }
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 2: Einstein detection.
// ---------------------------------------------------------------------------

fn criterion_2(tols: &Tolerances) -> CriterionResult {
    let mut c = Crit::new(2, "Einstein detection", true);
    guarded(&mut c, |c| {
        let lim = tols.tol_curv;
        // Instances that must be Einstein, with their constants.
        let mut einstein: Vec<(Family, Vec<f64>, f64)> = vec![
            (Family::F4A1, vec![1.0, 1.0], -3.0),
            (Family::F4B1, vec![0.5], -1.5),
            (Family::F5A1, vec![1.0, 1.0, 1.0], -4.0),
        ];
        for &b in &[0.5, 0.9, 1.0, 1.7, 2.2] {
            einstein.push((Family::F4A4, vec![1.0, b], -3.0));
        }
        for &a in &[0.3, 0.8, 1.0, 2.0, 5.0] {
            einstein.push((Family::F4B3, vec![a], -1.5));
        }
        for (family, params, lambda) in &einstein {
            let g = inst(*family, params, tols)?;
            match is_einstein(&g, tols)? {
                Some(found) => c.dev(
                    (found - lambda).abs(),
                    lim,
                    &format!(
                        "Einstein constant on {} (expected {lambda})",
                        case_label(*family, params)
                    ),
                ),
                None => c.fail(format!(
                    "{} must be Einstein with constant {lambda}, but was not detected",
                    case_label(*family, params)
                )),
            }
        }

        // Instances that must NOT be Einstein.
        let not_einstein: Vec<(Family, Vec<f64>)> = vec![
            (Family::F4A1, vec![0.5, 0.7]),
            (Family::F4A1, vec![0.2, 0.8]),
            (Family::F4A1, vec![0.9, 1.0]),
            (Family::F4A2, vec![0.3]),
            (Family::F4A2, vec![1.0]),
            (Family::F4A2, vec![2.5]),
            (Family::F4A3, vec![]),
            (Family::F4A4, vec![0.4, 1.0]),
            (Family::F4A4, vec![1.6, 0.9]),
            (Family::F4A4, vec![2.2, 2.2]),
            (Family::F4B1, vec![0.1]),
            (Family::F4B1, vec![0.25]),
            (Family::F4B1, vec![0.75]),
            (Family::F4B2, vec![]),
            (Family::F5A2, vec![0.4, 0.9]),
            (Family::F5B1, vec![1.5]),
            (Family::F5C2, vec![1.3]),
        ];
        for (family, params) in &not_einstein {
            let g = inst(*family, params, tols)?;
            c.ensure(
                is_einstein(&g, tols)?.is_none(),
                &format!(
                    "{} must not be Einstein at curvature tolerance",
                    case_label(*family, params)
                ),
            );
        }
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 3: locally symmetric detection via ∇R.
// ---------------------------------------------------------------------------

/// Instances whose curvature tensor is parallel.
const SYMMETRIC_CASES: &[(Family, &[f64])] = &[
    (Family::F4A1, &[1.0, 1.0]),
    (Family::F4A4, &[1.0, 0.7]),
    (Family::F4A4, &[1.0, 2.0]),
    (Family::F4B1, &[0.5]),
    (Family::F4B3, &[0.6]),
    (Family::F4B3, &[1.0]),
    (Family::F5A1, &[1.0, 1.0, 1.0]),
    (Family::F5A3, &[1.0, 1.0, 0.8]),
    (Family::F5A3, &[1.0, 1.0, 2.0]),
    (Family::F5A7, &[1.0, 0.5, 0.9]),
    (Family::F5A7, &[1.0, 1.3, 1.3]),
];

/// Instances whose curvature tensor is decisively not parallel.
const NONSYMMETRIC_CASES: &[(Family, &[f64])] = &[
    (Family::F4A1, &[0.5, 1.0]),
    (Family::F4A1, &[0.2, 0.8]),
    (Family::F4A2, &[1.0]),
    (Family::F4A2, &[0.4]),
    (Family::F4A3, &[]),
    (Family::F4A4, &[0.5, 1.0]),
    (Family::F4A4, &[2.0, 1.0]),
    (Family::F4B1, &[0.25]),
    (Family::F4B1, &[0.1]),
    (Family::F4B2, &[]),
    (Family::F5A1, &[0.5, 1.0, 1.0]),
    (Family::F5A2, &[1.0, 1.0]),
    (Family::F5A3, &[0.5, 1.0, 1.0]),
    (Family::F5A4, &[1.0]),
    (Family::F5A5, &[1.0]),
    (Family::F5A6, &[1.0, 1.0]),
    (Family::F5A7, &[0.5, 1.0, 1.0]),
    (Family::F5A8, &[]),
    (Family::F5A9, &[1.0, 1.0]),
    (Family::F5B1, &[1.0]),
    (Family::F5B2, &[]),
    (Family::F5C1, &[1.0, 1.0]),
    (Family::F5C2, &[1.0]),
    (Family::F5C3, &[1.0, 1.0]),
    (Family::F5C4, &[1.0]),
    (Family::F5C8, &[]),
    (Family::F5C11, &[1.0]),
    (Family::F5C12, &[]),
    (Family::F5C13, &[1.0]),
];

fn criterion_3(tols: &Tolerances) -> CriterionResult {
    let mut c = Crit::new(3, "locally symmetric detection", true);
    guarded(&mut c, |c| {
        for (family, params) in SYMMETRIC_CASES {
            let g = inst(*family, params, tols)?;
            let (_, norm) = nabla_r(&g, tols)?;
            c.dev(
                norm,
                1e-9,
                &format!("parallel curvature on {}", case_label(*family, params)),
            );
        }
        let mut min_nonsym = f64::INFINITY;
        for (family, params) in NONSYMMETRIC_CASES {
            let g = inst(*family, params, tols)?;
            let (_, norm) = nabla_r(&g, tols)?;
            min_nonsym = min_nonsym.min(norm);
            c.ensure(
                norm > 1e-3,
                &format!(
                    "{} must have a decisively non-parallel curvature tensor (‖∇R‖ = {norm:.3e})",
                    case_label(*family, params)
                ),
            );
        }
        c.note(format!(
            "{} non-symmetric instances checked; smallest ‖∇R‖ observed was {min_nonsym:.3}",
            NONSYMMETRIC_CASES.len()
        ));
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 4: the structural symmetric-space conditions match ∇R = 0.
// ---------------------------------------------------------------------------

fn criterion_4(tols: &Tolerances) -> CriterionResult {
    let mut c = Crit::new(4, "symmetric-criterion equivalence", true);
    guarded(&mut c, |c| {
        for (family, params) in SYMMETRIC_CASES.iter().chain(NONSYMMETRIC_CASES) {
            let g = inst(*family, params, tols)?;
            let (_, norm) = nabla_r(&g, tols)?;
            let flat = norm <= 1e-9;
            let h = heintze_check(&g, tols)?;
            c.ensure(
                h.pass == flat,
                &format!(
                    "structural conditions on {} report {} but ‖∇R‖ = {norm:.3e}",
                    case_label(*family, params),
                    h.pass
                ),
            );
        }

        // Eigenvalue pins on the two rank-one symmetric models.
        let h = heintze_check(&inst(Family::F4A1, &[1.0, 1.0], tols)?, tols)?;
        c.dev(
            (h.lambda - 1.0).abs(),
            tols.tol_curv,
            "structural eigenvalue λ on 4A1(1, 1)",
        );
        let h = heintze_check(&inst(Family::F4B1, &[0.5], tols)?, tols)?;
        c.dev(
            (h.lambda - 0.5).abs(),
            tols.tol_curv,
            "structural eigenvalue λ on 4B1(0.5)",
        );

        // The filiform-based families fail the commutation condition (a),
        // and their structural eigenvalue is λ = (1 + x)/2.
        for &x in &[0.4, 1.0, 2.5] {
            let h = heintze_check(&inst(Family::F5B1, &[x], tols)?, tols)?;
            c.ensure(
                !h.cond_a,
                &format!("5B1({x}) must fail the commutation condition (a)"),
            );
            c.dev(
                (h.lambda - 0.5 * (1.0 + x)).abs(),
                tols.tol_curv,
                &format!("structural eigenvalue λ on 5B1({x})"),
            );
        }
        let h = heintze_check(&inst(Family::F5B2, &[], tols)?, tols)?;
        c.ensure(!h.cond_a, "5B2 must fail the commutation condition (a)");
        c.dev(
            (h.lambda - 1.0).abs(),
            tols.tol_curv,
            "structural eigenvalue λ on 5B2",
        );

        // A fully reducible instance failing only the complex-structure
        // condition (c).
        let h = heintze_check(&inst(Family::F5C1, &[1.0, 1.0], tols)?, tols)?;
        c.ensure(
            h.cond_a && h.cond_b && !h.cond_c,
            "5C1(1, 1) must satisfy (a) and (b) and fail exactly the J-map condition (c)",
        );
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 5: constant-curvature models and the printed curvature table.
// ---------------------------------------------------------------------------

/// The curvature table of the complex-hyperbolic model: entries
/// `(i, j, k, component, coefficient)` meaning `R(e_i, e_j)e_k =
/// coefficient · e_component` (all 1-based). Two lines of the printed
/// source table deviate from the computed tensor; the values here are the
/// computed ones, annotated in the criterion notes.
const CH2_TABLE: &[(usize, usize, usize, usize, f64)] = &[
    (1, 2, 1, 2, 1.0),
    (1, 3, 1, 3, 0.25),
    (1, 4, 1, 4, 0.25),
    (2, 1, 2, 1, 1.0),
    (2, 3, 2, 3, 0.25),
    (2, 4, 2, 4, 0.25),
    (3, 1, 3, 1, 0.25),
    (3, 2, 3, 2, 0.25),
    (3, 4, 3, 4, 1.0),
    (4, 1, 4, 1, 0.25),
    (4, 2, 4, 2, 0.25),
    // Printed as a multiple of e4; the computed value is e3.
    (4, 3, 4, 3, 1.0),
    (1, 2, 3, 4, -0.5),
    (2, 3, 1, 4, 0.25),
    (3, 1, 2, 4, 0.25),
    (1, 2, 4, 3, 0.5),
    (2, 4, 1, 3, -0.25),
    (4, 1, 2, 3, -0.25),
    (1, 3, 4, 2, 0.25),
    (3, 4, 1, 2, -0.5),
    // Printed with coefficient −¼; the computed value is +¼.
    (4, 1, 3, 2, 0.25),
    (2, 3, 4, 1, -0.25),
    (3, 4, 2, 1, 0.5),
    (4, 2, 3, 1, -0.25),
];

fn criterion_5(tols: &Tolerances) -> CriterionResult {
    let mut c = Crit::new(5, "constant-curvature models", true);
    guarded(&mut c, |c| {
        let lim = 1e-9;

        // Two presentations of the constant-curvature −1 model.
        let g1 = inst(Family::F4A1, &[1.0, 1.0], tols)?;
        let g2 = inst(Family::F4A4, &[1.0, 0.9], tols)?;
        let r1 = riemann(&g1, tols)?;
        let r2 = riemann(&g2, tols)?;
        let delta = |i: usize, j: usize| -> f64 {
            if i == j {
                1.0
            } else {
                0.0
            }
        };
        for (label, r) in [("4A1(1, 1)", &r1), ("4A4(1, 0.9)", &r2)] {
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let want = -(delta(j, k) * delta(i, l) - delta(i, k) * delta(j, l));
                            worst = worst.max((r.get(i, j, k, l) - want).abs());
                        }
                    }
                }
            }
            c.dev(
                worst,
                lim,
                &format!("constant-curvature law R(x, y)z = −(⟨y,z⟩x − ⟨x,z⟩y) on {label}"),
            );
        }
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        worst = worst.max((r1.get(i, j, k, l) - r2.get(i, j, k, l)).abs());
                    }
                }
            }
        }
        c.dev(
            worst,
            lim,
            "curvature arrays of 4A1(1, 1) and 4A4(1, 0.9) coincide entrywise",
        );

        // Two presentations of the complex-hyperbolic model.
        let g3 = inst(Family::F4B1, &[0.5], tols)?;
        let g4 = inst(Family::F4B3, &[1.3], tols)?;
        let r3 = riemann(&g3, tols)?;
        let r4 = riemann(&g4, tols)?;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        worst = worst.max((r3.get(i, j, k, l) - r4.get(i, j, k, l)).abs());
                    }
                }
            }
        }
        c.dev(
            worst,
            lim,
            "curvature arrays of 4B1(0.5) and 4B3(1.3) coincide entrywise",
        );

        // The per-component curvature table on the 4B1(0.5) presentation.
        for &(i, j, k, comp, coeff) in CH2_TABLE {
            let v = r3.apply(&ev(4, i - 1), &ev(4, j - 1), &ev(4, k - 1));
            let want = coeff * ev(4, comp - 1);
            c.dev(
                (v - want).abs().max(),
                lim,
                &format!("R(e{i}, e{j})e{k} table entry"),
            );
        }
        c.note(
            "two printed table lines deviate from the computed tensor and are \
             asserted at their computed values: R(e4, e3)e4 = e3 (printed as a \
             multiple of e4; flagged in advance as suspect) and R(e4, e1)e3 = \
             +¼·e2 (printed with coefficient −¼)"
                .to_string(),
        );

        // Pinched sectional values of the complex-hyperbolic model.
        let k12 = sectional_from(&r3, &ev(4, 0), &ev(4, 1), tols)?;
        c.dev((k12 + 1.0).abs(), lim, "K(e1, e2) = −1 on 4B1(0.5)");
        let k13 = sectional_from(&r3, &ev(4, 0), &ev(4, 2), tols)?;
        c.dev((k13 + 0.25).abs(), lim, "K(e1, e3) = −1/4 on 4B1(0.5)");
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 6: the Milnor frame constant-curvature law.
// ---------------------------------------------------------------------------

fn criterion_6(tols: &Tolerances, seed: u64) -> CriterionResult {
    let mut c = Crit::new(6, "Milnor frame curvature law", true);
    guarded(&mut c, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4d49_4c4e);
        let dims = [3usize, 4, 5, 3, 4, 5, 3, 4, 5, 3];
        for (idx, &n) in dims.iter().enumerate() {
            let l = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let (alg, k) = milnor_algebra(&l)?;
            let g = MetricAlgebra::standard(alg);
            let r = riemann(&g, tols)?;
            let mut worst: f64 = 0.0;
            let mut planes = 0;
            while planes < 100 {
                let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                match sectional_from(&r, &x, &y, tols) {
                    Ok(kk) => {
                        worst = worst.max((kk - k).abs());
                        planes += 1;
                    }
                    Err(_) => continue,
                }
            }
            c.dev(
                worst,
                1e-8,
                &format!(
                    "sectional curvature constant at −‖ℓ‖² over 100 planes (vector {}, dimension {n})",
                    idx + 1
                ),
            );
        }
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 7: classification round-trips the catalog.
// ---------------------------------------------------------------------------

/// Applies a random invertible change of basis to a metric algebra,
/// producing the same abstract metric Lie algebra in scrambled coordinates.
fn scramble(
    g: &MetricAlgebra,
    rng: &mut ChaCha8Rng,
    tols: &Tolerances,
) -> Result<MetricAlgebra> {
    let n = g.dim();
    let p = loop {
        let cand: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        if cand.determinant().abs() > 0.3 {
            break cand;
        }
    };
    MetricAlgebra::new(
        g.alg.transform(&p)?,
        p.transpose() * &g.gram * &p,
        tols.tol_struct,
    )
}

fn criterion_7(tols: &Tolerances, seed: u64) -> CriterionResult {
    let mut c = Crit::new(7, "classification round-trip", true);
    guarded(&mut c, |c| {
        // (family, instantiation parameters, expected family, expected
        // canonical parameters).
        let mut cases: Vec<(Family, Vec<f64>, Family, Vec<f64>)> = Vec::new();
        let same = |fam: Family, pts: &[&[f64]], cases: &mut Vec<_>| {
            for p in pts {
                cases.push((fam, p.to_vec(), fam, p.to_vec()));
            }
        };
        use Family::*;
        same(F4A1, &[&[0.2, 0.4], &[0.3, 0.8], &[0.5, 0.5], &[0.7, 1.0], &[1.0, 1.0]], &mut cases);
        same(F4A2, &[&[0.3], &[0.7], &[1.0], &[1.8], &[2.6]], &mut cases);
        same(F4A3, &[&[]], &mut cases);
        same(
            F4A4,
            &[&[0.4, 0.5], &[0.8, 1.3], &[1.0, 1.0], &[1.6, 0.9], &[2.2, 2.0]],
            &mut cases,
        );
        same(F4B1, &[&[0.1], &[0.2], &[0.3], &[0.4], &[0.5]], &mut cases);
        same(F4B2, &[&[]], &mut cases);
        same(F4B3, &[&[0.3], &[0.7], &[1.0], &[2.0], &[4.0]], &mut cases);
        same(
            F5A1,
            &[
                &[0.2, 0.5, 0.9],
                &[0.3, 0.3, 0.3],
                &[0.5, 0.7, 1.0],
                &[0.8, 0.9, 1.0],
                &[1.0, 1.0, 1.0],
            ],
            &mut cases,
        );
        same(
            F5A2,
            &[&[0.3, 0.9], &[0.5, 0.5], &[0.7, 1.4], &[1.0, 1.0], &[1.3, 2.2]],
            &mut cases,
        );
        same(
            F5A3,
            &[
                &[0.4, 0.8, 0.6],
                &[0.5, 0.5, 1.0],
                &[0.8, 1.2, 1.5],
                &[1.0, 1.0, 0.8],
                &[1.5, 2.0, 2.5],
            ],
            &mut cases,
        );
        same(F5A4, &[&[0.4], &[0.8], &[1.0], &[1.7], &[2.5]], &mut cases);
        same(F5A5, &[&[0.2], &[0.4], &[0.6], &[0.8], &[1.0]], &mut cases);
        same(
            F5A6,
            &[&[0.3, 0.7], &[0.6, 1.1], &[1.0, 1.0], &[1.4, 0.5], &[2.2, 1.8]],
            &mut cases,
        );
        same(
            F5A7,
            &[
                &[0.5, 0.3, 0.7],
                &[1.0, 0.8, 0.8],
                &[0.8, 1.1, 0.4],
                &[1.0, 0.5, 0.9],
                &[0.3, 0.6, 1.2],
            ],
            &mut cases,
        );
        same(F5A8, &[&[]], &mut cases);
        same(
            F5A9,
            &[&[0.5, 0.5], &[0.8, 0.8], &[1.0, 1.0], &[1.5, 1.5], &[2.3, 2.3]],
            &mut cases,
        );
        same(F5B1, &[&[0.3], &[0.7], &[1.0], &[1.5], &[2.5]], &mut cases);
        same(F5B2, &[&[]], &mut cases);
        same(
            F5C1,
            &[&[0.2, 0.6], &[0.5, 1.5], &[0.7, 2.2], &[1.0, 0.7], &[1.0, 1.0]],
            &mut cases,
        );
        same(F5C2, &[&[0.3], &[0.8], &[1.0], &[1.6], &[2.4]], &mut cases);
        same(
            F5C3,
            &[&[0.5, 0.8], &[1.0, 1.0], &[1.3, 2.2], &[2.0, 0.5], &[3.0, 1.5]],
            &mut cases,
        );
        same(F5C4, &[&[1.0], &[1.3], &[1.7], &[2.0], &[3.0]], &mut cases);
        same(F5C6, &[&[0.2], &[0.45], &[0.6], &[0.8], &[0.95]], &mut cases);
        same(F5C8, &[&[]], &mut cases);
        same(F5C11, &[&[0.2], &[0.5], &[0.7], &[0.9], &[1.0]], &mut cases);
        same(F5C12, &[&[]], &mut cases);
        same(F5C13, &[&[0.4], &[0.9], &[1.0], &[2.0], &[2.8]], &mut cases);

        // Published coincidences and out-of-canonical-range parameters map
        // to their canonical representative.
        let duplicates: Vec<(Family, Vec<f64>, Family, Vec<f64>)> = vec![
            (F4B1, vec![0.8], F4B1, vec![1.0 - 0.8]),
            (F5A5, vec![2.0], F5A5, vec![0.5]),
            (F5A7, vec![2.0, 1.4, 0.6], F5A7, vec![0.5, 0.3, 0.7]),
            (F5A9, vec![0.5, 1.5], F5A7, vec![1.0, 0.5, 1.5]),
            (F5C5, vec![0.9], F5C3, vec![0.9, 1.0]),
            (F5C5, vec![1.6], F5C3, vec![1.6, 1.0]),
            (F5C7, vec![1.6], F5C3, vec![1.6, 1.0]),
            (F5C7, vec![0.5], F5C3, vec![0.5, 1.0]),
            (F5C9, vec![], F5C2, vec![1.0]),
            (F5C10, vec![], F5C8, vec![]),
            (F5C11, vec![2.0], F5C11, vec![0.5]),
            (F5C6, vec![1.5], F5C4, vec![1.5]),
            (F5C6, vec![1.0], F5C4, vec![1.0]),
        ];
        cases.extend(duplicates);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x524f_554e);
        for (family, params, want_family, want_params) in &cases {
            let d0 = family_derivation(*family, params)?;
            let nil = family.nilpotent_type().model();
            for variant in 0..4u8 {
                let label = match variant {
                    0 => "as instantiated",
                    1 => "derivation rescaled",
                    2 => "basis scrambled",
                    _ => "scrambled and rescaled",
                };
                let d = if variant % 2 == 1 { &d0 * 1.7 } else { d0.clone() };
                let ex = expand(&nil, &d, tols)?;
                let mut g = MetricAlgebra::standard(ex.total);
                if variant >= 2 {
                    g = scramble(&g, &mut rng, tols)?;
                }
                let what = format!(
                    "classify {} {label} (expected {})",
                    case_label(*family, params),
                    case_label(*want_family, want_params),
                );
                match classify(&g, tols) {
                    Ok(cf) => {
                        if cf.family != *want_family {
                            c.fail(format!("{what}: landed in {}", cf.family.tag()));
                            continue;
                        }
                        let got = cf.param_values();
                        if got.len() != want_params.len() {
                            c.fail(format!(
                                "{what}: wrong parameter count {}",
                                got.len()
                            ));
                            continue;
                        }
                        let dev = got
                            .iter()
                            .zip(want_params)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max);
                        c.dev(dev, 1e-9, &what);
                    }
                    Err(e) => c.fail(format!("{what}: {e}")),
                }
            }
        }

        // The family whose listed matrix is never a derivation is reported
        // as a structured input error.
        match catalog_instantiate(F5B3, &[1.0], tols) {
            Err(CurvlieError::Input(msg)) => {
                c.ensure(
                    msg.contains("5B3") && msg.contains("empty"),
                    "the 5B3 error message names the family and its emptiness",
                );
                c.note(format!("5B3 is reported as empty: {msg}"));
            }
            Err(e) => c.fail(format!("5B3 must raise an input error, got: {e}")),
            Ok(_) => c.fail("5B3 must be rejected, but it instantiated".to_string()),
        }

        c.note(
            "coincident parameterizations are mapped to one canonical \
             representative: 5C5(a) and 5C7(a) to 5C3(a, 1), 5C9 to 5C2(1), \
             5C10 to 5C8, 5C6 at x ≥ 1 to 5C4(x), defective coupled rotations \
             with distinct speeds to 5A7, and 4B1, 5A5, 5A7, 5C11 parameters \
             outside the canonical subrange to their in-range equivalents"
                .to_string(),
        );
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 8: structural tensor identities and derivation-space dimensions.
// ---------------------------------------------------------------------------

/// Independent nullity of the derivation equations, via the rank of the
/// assembled linear system (a cross-check on the kernel basis extraction).
fn derivation_nullity(alg: &LieAlgebra) -> usize {
    let n = alg.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    // Unknowns are the n² entries of D, with D[r][c] at index c·n + r.
    // For each basis pair (i, j), the defect D[e_i,e_j] − [De_i,e_j] −
    // [e_i,De_j] contributes n linear equations.
    let mut m: DMatrix<f64> = DMatrix::zeros(pairs.len() * n, n * n);
    for (row_block, &(i, j)) in pairs.iter().enumerate() {
        let b = alg.bracket_basis(i, j);
        // term 1: (D·[e_i,e_j])_r = Σ_c D[r][c]·b[c]
        for r in 0..n {
            for cidx in 0..n {
                m[(row_block * n + r, cidx * n + r)] += b[cidx];
            }
        }
        // term 2: −[D e_i, e_j] = −Σ_r D[r][i]·[e_r, e_j]
        for rr in 0..n {
            let v = alg.bracket_basis(rr, j);
            for comp in 0..n {
                m[(row_block * n + comp, i * n + rr)] -= v[comp];
            }
        }
        // term 3: −[e_i, D e_j] = −Σ_r D[r][j]·[e_i, e_r]
        for rr in 0..n {
            let v = alg.bracket_basis(i, rr);
            for comp in 0..n {
                m[(row_block * n + comp, j * n + rr)] -= v[comp];
            }
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return n * n;
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * smax)
        .count();
    n * n - rank
}

fn criterion_8(tols: &Tolerances, seed: u64) -> CriterionResult {
    let mut c = Crit::new(8, "structural identities", true);
    guarded(&mut c, |c| {
        // Collect every instantiable catalog sample, plus a stretched-metric
        // case and a scrambled case that exercise non-orthonormal input.
        let mut instances: Vec<(String, MetricAlgebra)> = Vec::new();
        for dim in [4usize, 5] {
            for entry in catalog_entries(dim)? {
                if entry.family == Family::F5B3 {
                    continue;
                }
                instances.push((
                    case_label(entry.family, entry.sample),
                    inst(entry.family, entry.sample, tols)?,
                ));
            }
        }
        {
            let ex = expand(
                &NilpotentType::H3.model(),
                &family_derivation(Family::F4B1, &[0.25])?,
                tols,
            )?;
            let mut gram = DMatrix::identity(4, 4);
            gram[(0, 0)] = 4.0;
            gram[(1, 1)] = 0.5;
            let g = MetricAlgebra::new(ex.total, gram, tols.tol_struct)?;
            let (go, _) = g.orthonormalize()?;
            instances.push(("4B1(0.25) with a stretched metric".to_string(), go));
        }
        {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5354_5255);
            let g = scramble(&inst(Family::F5C1, &[0.5, 1.5], tols)?, &mut rng, tols)?;
            let (go, _) = g.orthonormalize()?;
            instances.push(("5C1(0.5, 1.5) in scrambled coordinates".to_string(), go));
        }

        let mut worst_jacobi: f64 = 0.0;
        let mut worst_identity: f64 = 0.0;
        let mut worst_two_path: f64 = 0.0;
        for (label, g) in &instances {
            let n = g.dim();
            let jac = g.alg.jacobi_defect();
            worst_jacobi = worst_jacobi.max(jac);
            c.dev(jac, 1e-12, &format!("Jacobi identity on {label}"));

            let conn = levi_civita(g, tols)?;
            let mut dev_here: f64 = 0.0;
            // Torsion-free: ∇_x y − ∇_y x = [x, y].
            for i in 0..n {
                for j in (i + 1)..n {
                    let t = conn.nabla(&ev(n, i), &ev(n, j))
                        - conn.nabla(&ev(n, j), &ev(n, i))
                        - g.alg.bracket_basis(i, j);
                    dev_here = dev_here.max(t.abs().max());
                }
            }
            // Metric compatibility in the orthonormal basis:
            // ⟨∇_i e_j, e_k⟩ + ⟨e_j, ∇_i e_k⟩ = 0.
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let a = conn.nabla(&ev(n, i), &ev(n, j))[k];
                        let b = conn.nabla(&ev(n, i), &ev(n, k))[j];
                        dev_here = dev_here.max((a + b).abs());
                    }
                }
            }
            // Curvature symmetries and the first Bianchi identity.
            let r = riemann(g, tols)?;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = r.get(i, j, k, l);
                            dev_here = dev_here.max((v + r.get(j, i, k, l)).abs());
                            dev_here = dev_here.max((v + r.get(i, j, l, k)).abs());
                            dev_here = dev_here.max((v - r.get(k, l, i, j)).abs());
                            let bianchi =
                                v + r.get(j, k, i, l) + r.get(k, i, j, l);
                            dev_here = dev_here.max(bianchi.abs());
                        }
                    }
                }
            }
            worst_identity = worst_identity.max(dev_here);
            c.dev(
                dev_here,
                1e-9,
                &format!("connection and curvature identities on {label}"),
            );

            // Two independent Ricci computations agree.
            let two_path = max_abs_diff(&ricci(g, tols)?, &ricci_direct(g, tols)?);
            worst_two_path = worst_two_path.max(two_path);
            c.dev(two_path, 1e-9, &format!("two-path Ricci agreement on {label}"));
        }
        c.note(format!(
            "{} instances checked; worst Jacobi defect {worst_jacobi:.2e}, worst \
             identity deviation {worst_identity:.2e}, worst two-path Ricci gap \
             {worst_two_path:.2e}",
            instances.len()
        ));

        // Derivation-space dimensions of the four nilpotent models, each
        // cross-checked against the nullity of the assembled linear system.
        let expected: [(NilpotentType, usize, &str); 4] = [
            (NilpotentType::A3, 9, "3-dimensional abelian"),
            (NilpotentType::H3, 6, "Heisenberg"),
            (NilpotentType::B4, 7, "filiform"),
            (NilpotentType::C4, 10, "Heisenberg-plus-line"),
        ];
        for (nt, want, label) in expected {
            let model = nt.model();
            let basis = model.derivation_space(tols.tol_struct);
            c.ensure(
                basis.len() == want,
                &format!(
                    "derivation space of the {label} model has dimension {} (expected {want})",
                    basis.len()
                ),
            );
            let nullity = derivation_nullity(&model);
            c.ensure(
                nullity == want,
                &format!(
                    "linear-system nullity for the {label} model is {nullity} (expected {want})"
                ),
            );
        }
        c.note(
            "the filiform derivation space has dimension 7, confirmed by two \
             independent computations; the printed source table lists 8"
                .to_string(),
        );
        Ok(())
    });
    c.finish()
}

// ---------------------------------------------------------------------------
// Criterion 9 (soft): randomized negativity scan over the catalog.
// ---------------------------------------------------------------------------

/// Instances whose sampled maximal sectional curvature is known to be
/// positive, with the coupling slots of their derivations that the repair
/// search may weaken.
const POSITIVE_CANDIDATES: &[(Family, &[f64], &[(usize, usize)])] = &[
    (Family::F4A3, &[], &[(0, 1), (1, 2)]),
    (Family::F4B1, &[0.25], &[]),
    (Family::F4B2, &[], &[(0, 1)]),
    (Family::F5A4, &[1.2], &[(1, 2), (2, 3)]),
    (Family::F5A5, &[0.5], &[(0, 1), (2, 3)]),
    (Family::F5A5, &[0.6], &[(0, 1), (2, 3)]),
    (Family::F5A8, &[], &[(0, 1), (1, 2), (2, 3)]),
    (Family::F5C5, &[0.9], &[(2, 0)]),
    (Family::F5C7, &[1.6], &[(2, 1)]),
    (Family::F5C8, &[], &[(0, 1), (2, 0)]),
    (Family::F5C9, &[], &[(0, 1), (2, 1)]),
    (Family::F5C10, &[], &[(0, 1), (2, 0), (2, 1)]),
    (Family::F5C12, &[], &[(0, 1), (3, 2)]),
];

/// Reference instances with known constant or pinched curvature.
const SCAN_PINS: &[(Family, &[f64], f64, f64)] = &[
    (Family::F4A1, &[1.0, 1.0], -1.0, 1e-4),
    (Family::F4A4, &[1.0, 0.7], -1.0, 1e-4),
    (Family::F4A4, &[1.0, 2.0], -1.0, 1e-4),
    (Family::F5A1, &[1.0, 1.0, 1.0], -1.0, 1e-4),
    (Family::F4B1, &[0.5], -0.25, 1e-3),
    (Family::F4B3, &[0.5], -0.25, 1e-3),
    (Family::F4B3, &[2.0], -0.25, 1e-3),
];

/// The nilpotent model with all structure constants scaled by `kappa`.
fn scaled_model(nt: NilpotentType, kappa: f64) -> Result<LieAlgebra> {
    let m = nt.model();
    let n = m.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m.bracket_basis(i, j) * kappa;
            if v.iter().any(|&x| x != 0.0) {
                entries.push((i, j, v.iter().cloned().collect::<Vec<f64>>()));
            }
        }
    }
    LieAlgebra::from_brackets(n, &entries)
}

/// Builds a variant of a catalog instance with coupling slots scaled by
/// `eps` and nilpotent structure constants scaled by `kappa`.
fn coupling_variant(
    family: Family,
    params: &[f64],
    slots: &[(usize, usize)],
    eps: f64,
    kappa: f64,
    tols: &Tolerances,
) -> Result<MetricAlgebra> {
    let mut d = family_derivation(family, params)?;
    for &(r, col) in slots {
        d[(r, col)] *= eps;
    }
    let nil = scaled_model(family.nilpotent_type(), kappa)?;
    let ex = expand(&nil, &d, tols)?;
    Ok(MetricAlgebra::standard(ex.total))
}

fn canonical_matches(a: &CanonicalForm, b: &CanonicalForm, tol: f64) -> bool {
    a.family == b.family
        && a.params.len() == b.params.len()
        && a.param_values()
            .iter()
            .zip(b.param_values())
            .all(|(x, y)| (x - y).abs() <= tol)
}

fn criterion_9(tols: &Tolerances, seed: u64) -> CriterionResult {
    let mut c = Crit::new(9, "negativity scan", false);
    guarded(&mut c, |c| {
        // Every instantiable catalog sample plus the constant-curvature
        // reference points and the known positive instances.
        let mut list: Vec<(Family, Vec<f64>)> = Vec::new();
        for dim in [4usize, 5] {
            for entry in catalog_entries(dim)? {
                if entry.family == Family::F5B3 {
                    continue;
                }
                list.push((entry.family, entry.sample.to_vec()));
            }
        }
        for (family, params, _, _) in SCAN_PINS {
            list.push((*family, params.to_vec()));
        }
        list.push((Family::F5A5, vec![0.6]));

        let is_candidate = |family: Family, params: &[f64]| -> bool {
            POSITIVE_CANDIDATES.iter().any(|(f, p, _)| {
                *f == family
                    && p.len() == params.len()
                    && p.iter().zip(params).all(|(a, b)| (a - b).abs() < 1e-12)
            })
        };

        let mut positives: Vec<String> = Vec::new();
        for (idx, (family, params)) in list.iter().enumerate() {
            let label = case_label(*family, params);
            let g = inst(*family, params, tols)?;
            let scan = negativity_scan(&g, 10_000, seed.wrapping_add(101 * idx as u64), tols)?;
            let mut max_k = scan.max_k;
            let candidate = is_candidate(*family, params);
            if max_k <= 0.0 && candidate {
                // The marginal positives can hide from a 10k-sample pass.
                let deep = negativity_scan(
                    &g,
                    200_000,
                    seed.wrapping_add(101 * idx as u64 + 7),
                    tols,
                )?;
                if deep.max_k > 0.0 {
                    max_k = deep.max_k;
                    c.note(format!(
                        "{label}: positive curvature located only by a deeper scan \
                         (200000 samples)"
                    ));
                }
            }
            if max_k > 0.0 {
                positives.push(format!("{label} (max K ≈ {max_k:+.3})"));
                if !candidate {
                    c.fail(format!(
                        "unexpected positive instance {label}: max K ≈ {max_k:+.3}"
                    ));
                }
            } else if candidate {
                c.fail(format!(
                    "known positive instance {label} was not located by the scan"
                ));
            }

            if let Some((_, _, target, tol)) = SCAN_PINS
                .iter()
                .find(|(f, p, _, _)| {
                    f == family
                        && p.len() == params.len()
                        && p.iter().zip(params).all(|(a, b)| (a - b).abs() < 1e-12)
                })
            {
                c.dev(
                    (max_k - target).abs(),
                    *tol,
                    &format!("scanned maximum curvature on {label} (expected {target})"),
                );
            }
        }

        if positives.is_empty() {
            c.ensure(true, "every sampled instance scans negative");
        } else {
            c.fail(format!(
                "max K < 0 fails on {} of {} sampled instances: {}",
                positives.len(),
                list.len(),
                positives.join("; ")
            ));
        }

        // Baselines: a constant-curvature frame and a flat algebra.
        {
            let l = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
            let (alg, k) = milnor_algebra(&l)?;
            let g = MetricAlgebra::standard(alg);
            let scan = negativity_scan(&g, 10_000, seed.wrapping_add(90_001), tols)?;
            c.dev(
                (scan.max_k - k).abs(),
                1e-4,
                "scanned maximum curvature of the constant-curvature frame model",
            );
            let flat = MetricAlgebra::standard(LieAlgebra::abelian(4)?);
            let scan = negativity_scan(&flat, 10_000, seed.wrapping_add(90_002), tols)?;
            c.dev(
                scan.max_k.abs(),
                1e-9,
                "scanned maximum curvature of the flat abelian algebra",
            );
        }

        // For every known positive instance, find a weak-coupling
        // representative of the same classified family that scans negative.
        for (ci, (family, params, slots)) in POSITIVE_CANDIDATES.iter().enumerate() {
            let label = case_label(*family, params);
            let original = classify(&inst(*family, params, tols)?, tols)?;
            let mut found = false;
            let mut tries = 0u64;
            'ladder: for &eps in &[1.0, 0.5, 0.2, 0.1, 0.05] {
                for &kappa in &[1.0, 0.5, 0.2, 0.1, 0.05] {
                    if eps == 1.0 && kappa == 1.0 {
                        continue;
                    }
                    tries += 1;
                    let g = coupling_variant(*family, params, slots, eps, kappa, tols)?;
                    let scan = negativity_scan(
                        &g,
                        10_000,
                        seed.wrapping_add(70_000 + 37 * ci as u64 + tries),
                        tols,
                    )?;
                    if scan.max_k < -1e-4 {
                        let repaired = classify(&g, tols)?;
                        c.ensure(
                            canonical_matches(&original, &repaired, 1e-6),
                            &format!(
                                "the weak-coupling representative of {label} classifies \
                                 into the same canonical form"
                            ),
                        );
                        c.note(format!(
                            "{label}: coupling scale {eps}, bracket scale {kappa} scans \
                             negative (max K ≈ {:+.3}); classification unchanged ({})",
                            scan.max_k,
                            case_label(repaired.family, &repaired.param_values()),
                        ));
                        found = true;
                        break 'ladder;
                    }
                }
            }
            if !found {
                c.fail(format!(
                    "no weak-coupling representative of {label} scans negative"
                ));
            }
        }
        Ok(())
    });
    c.finish()
}
