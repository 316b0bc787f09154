//! Real Jordan canonical forms of small dense matrices.
//!
//! [`real_jordan_form`] returns `(J, P)` with `P⁻¹ M P = J`, where J is
//! block diagonal with real Jordan blocks
//!
//! ```text
//! ⎡λ 1    ⎤         ⎡C I    ⎤        ⎡a −b⎤
//! ⎢  λ ⋱  ⎥   and   ⎢  C ⋱  ⎥ ,  C = ⎣b  a⎦  (b > 0)
//! ⎣     λ ⎦         ⎣     C ⎦
//! ```
//!
//! for real and complex-pair eigenvalues respectively. Blocks are ordered
//! deterministically by (real part asc, |imaginary part| asc, size asc).
//!
//! Floating-point Jordan forms are ill-posed at exact eigenvalue
//! collisions, so eigenvalues are first *clustered*: a defective eigenvalue
//! of multiplicity k splits under rounding by roughly eps^(1/k), and the
//! clustering tolerance is floored accordingly before nearby values are
//! merged to their mean.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::algebra::eigenvalues;
use crate::error::{CurvlieError, Result};
use crate::linalg;
use crate::tol::COND_WARN;

type CMat = DMatrix<Complex<f64>>;

/// Absolute clustering tolerance for the spectrum of `m`: the caller's
/// relative tolerance floored by the defective-eigenvalue splitting scale
/// `10·eps^(1/n)`, times the spectral magnitude.
pub fn cluster_tolerance(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    let n = m.nrows();
    let scale = eigenvalues(m)?
        .iter()
        .fold(1.0_f64, |a, ev| a.max(ev.norm()));
    Ok(scale * tol.max(10.0 * f64::EPSILON.powf(1.0 / n as f64)))
}

/// Greedy clustering of eigenvalues at absolute tolerance `tau`; returns
/// `(mean, count)` per cluster keeping only Im ≥ 0 representatives
/// (conjugates merged away), with near-real means snapped to the axis.
pub fn cluster_eigs(vals: &[Complex<f64>], tau: f64) -> Vec<(Complex<f64>, usize)> {
    let mut vals = vals.to_vec();
    vals.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("eigenvalues are finite")
    });
    let mut groups: Vec<(Complex<f64>, usize)> = Vec::new();
    for v in vals {
        match groups
            .iter_mut()
            .find(|(sum, count)| (v - *sum / *count as f64).norm() <= tau)
        {
            Some((sum, count)) => {
                *sum += v;
                *count += 1;
            }
            None => groups.push((v, 1)),
        }
    }
    let mut out: Vec<(Complex<f64>, usize)> = Vec::new();
    for (sum, count) in groups {
        let mut mean = sum / count as f64;
        if mean.im.abs() <= tau {
            mean.im = 0.0;
        }
        if mean.im < 0.0 {
            continue;
        }
        // a near-real eigenvalue may split into ± conjugate groups: re-merge
        match out.iter_mut().find(|(w, _)| (mean - *w).norm() <= tau) {
            Some((w, cw)) => {
                *w = (*w * *cw as f64 + mean * count as f64) / (*cw + count) as f64;
                *cw += count;
            }
            None => out.push((mean, count)),
        }
    }
    out
}

/// Jordan block sizes (ascending) for the eigenvalue `lam` of `m`, from
/// the rank sequence of `(m − λI)^k`.
pub fn jordan_structure(m: &DMatrix<f64>, lam: Complex<f64>, tol: f64) -> Vec<usize> {
    let n = m.nrows();
    let a = shifted(m, lam);
    let mut ranks = vec![n];
    let mut p = CMat::identity(n, n);
    for _ in 1..=(n + 1) {
        p = &p * &a;
        let r = crank(&p, tol);
        let prev = *ranks.last().expect("ranks is nonempty");
        ranks.push(r);
        if r == prev {
            break;
        }
    }
    // blocks of size ≥ k: ranks[k−1] − ranks[k]
    let diff = |k: usize| -> isize {
        if k + 1 <= ranks.len() - 1 {
            ranks[k - 1] as isize - ranks[k] as isize
        } else {
            0
        }
    };
    let mut sizes = Vec::new();
    for k in 1..ranks.len() {
        let cnt = diff(k) - diff(k + 1);
        for _ in 0..cnt {
            sizes.push(k);
        }
    }
    sizes.sort_unstable();
    sizes
}

/// Result of [`real_jordan_form`]: `p⁻¹ · m · p = j`.
#[derive(Debug, Clone)]
pub struct RealJordan {
    pub j: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// `‖M·P − P·J‖_max / max(1, ‖M‖_max)` — the self-check of the
    /// decomposition.
    pub residual: f64,
    /// 2-norm condition number of the basis `p`; values above
    /// [`COND_WARN`] mean the form is numerically fragile.
    pub condition: f64,
}

impl RealJordan {
    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > COND_WARN
    }
}

/// Computes the real Jordan form with deterministic block ordering.
///
/// `tol` is the relative eigenvalue-clustering and rank tolerance
/// (`tol_eig` in practice). Chains are chosen greedily from kernel bases
/// of `(M − λI)^k`, preferring candidates farthest from the span already
/// consumed.
pub fn real_jordan_form(m: &DMatrix<f64>, tol: f64) -> Result<RealJordan> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(CurvlieError::Input(
            "Jordan form of a non-square matrix".into(),
        ));
    }
    let vals = eigenvalues(m)?;
    let tau = cluster_tolerance(m, tol)?;
    let spectral_scale = vals.iter().fold(1.0_f64, |a, ev| a.max(ev.norm()));
    let clusters = cluster_eigs(&vals, tau);

    // entry: (re, |im|, size, chain columns as a complex matrix)
    let mut entries: Vec<(f64, f64, usize, CMat)> = Vec::new();
    for (lam, _mult) in &clusters {
        let a = shifted(m, *lam);
        let sizes = jordan_structure(m, *lam, tol * spectral_scale);
        if sizes.is_empty() {
            return Err(CurvlieError::Computation(format!(
                "eigenvalue cluster {lam} yields no Jordan blocks; \
                 clustering tolerance may be inconsistent"
            )));
        }
        let kmax = *sizes.last().expect("sizes is nonempty");
        // kers[k] = orthonormal kernel basis of A^k
        let mut kers: Vec<CMat> = vec![CMat::zeros(n, 0)];
        let mut pk = CMat::identity(n, n);
        for _ in 1..=kmax {
            pk = &pk * &a;
            kers.push(ckernel(&pk, tol.max(1e-9)));
        }
        let mut used = CMat::zeros(n, 0);
        for k in (1..=kmax).rev() {
            let want = sizes.iter().filter(|&&s| s == k).count();
            for _ in 0..want {
                // candidate in ker A^k far from ker A^{k−1} ∪ used chains
                let avoid = hstack(&kers[k - 1], &used);
                let avoid_q = cspan(&avoid, 1e-9);
                let cand = &kers[k];
                let mut best: Option<(f64, usize)> = None;
                for c in 0..cand.ncols() {
                    let v = cand.column(c);
                    let resid = if avoid_q.ncols() > 0 {
                        let proj = &avoid_q * (avoid_q.adjoint() * v);
                        (v - proj).norm()
                    } else {
                        v.norm()
                    };
                    if best.map(|(b, _)| resid > b).unwrap_or(true) {
                        best = Some((resid, c));
                    }
                }
                let (resid, idx) = best.ok_or_else(|| {
                    CurvlieError::Computation(
                        "Jordan chain selection ran out of kernel vectors".into(),
                    )
                })?;
                if resid <= 1e-9 {
                    return Err(CurvlieError::Computation(format!(
                        "Jordan chain candidate collapses (residual {resid:.1e}); \
                         eigenvalue clustering is inconsistent with the rank structure"
                    )));
                }
                let mut v = cand.column(idx).into_owned();
                if avoid_q.ncols() > 0 {
                    v -= &avoid_q * (avoid_q.adjoint() * &v);
                }
                v /= Complex::new(v.norm(), 0.0);
                // chain [A^{k−1}v, …, Av, v]
                let mut chain = vec![v];
                for _ in 1..k {
                    let next = &a * chain.last().expect("chain is nonempty");
                    chain.push(next);
                }
                chain.reverse();
                let cols: Vec<_> = chain.iter().cloned().collect();
                let chain_m = CMat::from_columns(&cols);
                used = hstack(&used, &chain_m);
                entries.push((lam.re, lam.im.abs(), k, chain_m));
            }
        }
    }
    // Deterministic block order, robust to rounding in the cluster means:
    // real parts (and then |imaginary| parts) that agree within the
    // clustering tolerance count as ties, so a double real eigenvalue and a
    // conjugate pair sharing its real part keep the same relative order no
    // matter which side the last bits fall on.
    let band = |x: f64, y: f64| -> std::cmp::Ordering {
        if (x - y).abs() <= tau {
            std::cmp::Ordering::Equal
        } else {
            x.partial_cmp(&y).expect("sort keys are finite")
        }
    };
    entries.sort_by(|a, b| {
        band(a.0, b.0)
            .then_with(|| band(a.1, b.1))
            .then_with(|| a.2.cmp(&b.2))
    });

    let mut j = DMatrix::zeros(n, n);
    let mut p = DMatrix::zeros(n, n);
    let mut offset = 0;
    for (re, im, k, chain) in &entries {
        let (re, im, k) = (*re, *im, *k);
        if im == 0.0 {
            if offset + k > n {
                return Err(block_overflow());
            }
            for (c, col) in chain.column_iter().enumerate() {
                for r in 0..n {
                    p[(r, offset + c)] = col[r].re;
                }
            }
            for i in 0..k {
                j[(offset + i, offset + i)] = re;
                if i + 1 < k {
                    j[(offset + i, offset + i + 1)] = 1.0;
                }
            }
            offset += k;
        } else {
            if offset + 2 * k > n {
                return Err(block_overflow());
            }
            for (c, col) in chain.column_iter().enumerate() {
                for r in 0..n {
                    p[(r, offset + 2 * c)] = col[r].im;
                    p[(r, offset + 2 * c + 1)] = col[r].re;
                }
            }
            for i in 0..k {
                let o = offset + 2 * i;
                j[(o, o)] = re;
                j[(o, o + 1)] = -im;
                j[(o + 1, o)] = im;
                j[(o + 1, o + 1)] = re;
                if i + 1 < k {
                    j[(o, o + 2)] = 1.0;
                    j[(o + 1, o + 3)] = 1.0;
                }
            }
            offset += 2 * k;
        }
    }
    if offset != n {
        return Err(CurvlieError::Computation(format!(
            "Jordan blocks cover dimension {offset} of {n}; \
             eigenvalue clustering is inconsistent"
        )));
    }
    let residual = linalg::max_abs(&(m * &p - &p * &j)) / linalg::max_abs(m).max(1.0);
    let condition = linalg::condition_number(&p);
    if residual > 1e-6 {
        return Err(CurvlieError::Computation(format!(
            "Jordan decomposition residual {residual:.3e} exceeds sanity bound"
        )));
    }
    Ok(RealJordan {
        j,
        p,
        residual,
        condition,
    })
}

fn block_overflow() -> CurvlieError {
    CurvlieError::Computation(
        "Jordan blocks exceed the matrix dimension; eigenvalue clustering is inconsistent"
            .into(),
    )
}

fn shifted(m: &DMatrix<f64>, lam: Complex<f64>) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, n, |r, c| {
        let mut v = Complex::new(m[(r, c)], 0.0);
        if r == c {
            v -= lam;
        }
        v
    })
}

/// Rank of a complex matrix relative to its largest singular value.
fn crank(m: &CMat, tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let cutoff = tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal kernel basis of a square complex matrix.
fn ckernel(m: &CMat, tol: f64) -> CMat {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("SVD with v_t requested");
    let sv = &svd.singular_values;
    let cutoff = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > cutoff).count();
    vt.rows(r, n - r).adjoint()
}

/// Orthonormal basis of the column space of a complex matrix.
fn cspan(m: &CMat, tol: f64) -> CMat {
    if m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("SVD with u requested");
    let sv = &svd.singular_values;
    let cutoff = tol * sv.max().max(1.0);
    let r = sv.iter().filter(|&&s| s > cutoff).count();
    u.columns(0, r).into_owned()
}

fn hstack(a: &CMat, b: &CMat) -> CMat {
    if a.ncols() == 0 {
        return b.clone();
    }
    if b.ncols() == 0 {
        return a.clone();
    }
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-7;

    fn conjugation_residual(m: &DMatrix<f64>, rj: &RealJordan) -> f64 {
        linalg::max_abs(&(m * &rj.p - &rj.p * &rj.j))
    }

    #[test]
    fn diagonal_matrix_sorts_ascending() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let rj = real_jordan_form(&m, TOL).unwrap();
        let expect =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(linalg::max_abs(&(&rj.j - expect)) < 1e-9);
    }

    #[test]
    fn lower_triangular_defective_pair_becomes_upper_jordan_block() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 4.0, 1.0]);
        let rj = real_jordan_form(&m, TOL).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(linalg::max_abs(&(&rj.j - expect)) < 1e-9);
        assert!(conjugation_residual(&m, &rj) < 1e-9);
    }

    #[test]
    fn companion_of_complex_quadratic_becomes_rotation_block() {
        // t² − 2t + 5 has roots 1 ± 2i
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -5.0, 1.0, 2.0]);
        let rj = real_jordan_form(&m, TOL).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 2.0, 1.0]);
        assert!(linalg::max_abs(&(&rj.j - expect)) < 1e-9);
        assert!(conjugation_residual(&m, &rj) < 1e-9);
    }

    #[test]
    fn full_size_nilpotent_chain_is_recovered() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 2)] = 1.0;
        m[(2, 3)] = 1.0;
        let rj = real_jordan_form(&m, TOL).unwrap();
        assert!(linalg::max_abs(&(&rj.j - &m)) < 1e-7, "J4(1) is its own form");
    }

    #[test]
    fn defective_complex_pair_gets_identity_coupling() {
        let b = 0.8;
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, -b, 1.0, 0.0, //
                b, 1.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, -b, //
                0.0, 0.0, b, 1.0,
            ],
        );
        let rj = real_jordan_form(&m, TOL).unwrap();
        assert!(linalg::max_abs(&(&rj.j - &m)) < 1e-7);
        assert!(conjugation_residual(&m, &rj) < 1e-7);
    }

    #[test]
    fn mixed_spectrum_blocks_are_ordered_by_real_then_imaginary_part() {
        // eigenvalues 2, 1 ± 3i, 0.5
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, -3.0, 0.0, //
                0.0, 3.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 0.5,
            ],
        );
        let rj = real_jordan_form(&m, TOL).unwrap();
        assert!((rj.j[(0, 0)] - 0.5).abs() < 1e-9);
        assert!((rj.j[(1, 1)] - 1.0).abs() < 1e-9 && (rj.j[(2, 1)] - 3.0).abs() < 1e-9);
        assert!((rj.j[(3, 3)] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn random_matrices_conjugate_back_with_small_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..12 {
            let n = rng.gen_range(2..6);
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let rj = real_jordan_form(&m, TOL).unwrap();
            let rel = conjugation_residual(&m, &rj) / linalg::max_abs(&m).max(1.0);
            assert!(rel < 1e-8, "residual {rel:.2e} for a random {n}×{n} matrix");
        }
    }

    #[test]
    fn clustering_heals_defective_eigenvalue_splitting() {
        // conjugated J4: eigenvalues split by ~eps^(1/4) ≈ 1e-4 under rounding
        let mut j4 = DMatrix::<f64>::identity(4, 4);
        j4[(0, 1)] = 1.0;
        j4[(1, 2)] = 1.0;
        j4[(2, 3)] = 1.0;
        let p = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.3, -0.2, 0.5, //
                0.0, 1.0, 0.7, -0.4, //
                0.2, 0.0, 1.0, 0.6, //
                -0.3, 0.1, 0.0, 1.0,
            ],
        );
        let m = &p * &j4 * linalg::try_inverse(&p, "p").unwrap();
        let rj = real_jordan_form(&m, TOL).unwrap();
        assert!(
            linalg::max_abs(&(&rj.j - &j4)) < 1e-3,
            "single size-4 block with eigenvalue near 1, got {}",
            rj.j
        );
        assert!((rj.j[(0, 1)] - 1.0).abs() < 1e-9, "superdiagonal coupling kept");
    }

    #[test]
    fn structure_of_semisimple_plus_nilpotent_parts() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 2.0,
            ],
        );
        assert_eq!(
            jordan_structure(&m, Complex::new(1.0, 0.0), 1e-7),
            vec![1, 2]
        );
        assert_eq!(
            jordan_structure(&m, Complex::new(2.0, 0.0), 1e-7),
            vec![1]
        );
    }

    #[test]
    fn cluster_eigs_merges_conjugates_and_near_real_pairs() {
        let vals = vec![
            Complex::new(1.0, 2.0),
            Complex::new(1.0, -2.0),
            Complex::new(3.0, 1e-12),
            Complex::new(3.0, -1e-12),
        ];
        let clusters = cluster_eigs(&vals, 1e-7);
        assert_eq!(clusters.len(), 2);
        let real_cluster = clusters
            .iter()
            .find(|(m, _)| m.im == 0.0)
            .expect("the near-real pair collapses to the axis");
        assert_eq!(real_cluster.1, 2);
    }
}
