// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex eigendecomposition.
//!
//! Householder reduction to upper Hessenberg form followed by explicit
//! single-shift QR iteration with Givens rotations (the classic COMQR
//! scheme), accumulating the unitary transform. Eigenvectors come from
//! back-substitution on the triangular factor. No balancing pass; the
//! superoperators this crate builds are already well scaled, and callers
//! gate on the eigenbasis condition number anyway.

use super::{identity, lu, C64, CMat};
use crate::error::{CoreError, Result};

pub struct Eigen {
    /// Eigenvalues, sorted by descending real part, then ascending imaginary.
    pub values: Vec<C64>,
    /// Right eigenvectors as columns, unit 2-norm, same order as `values`.
    pub vectors: CMat,
}

fn householder_hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut z = identity(n);
    if n < 3 {
        return (h, z);
    }
    for k in 0..(n - 2) {
        // reflector for column k, rows k+1..n
        let mut xnorm2 = 0.0;
        for i in (k + 1)..n {
            xnorm2 += h[(i, k)].norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in (k + 1)..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // H <- (I - tau v v^dag) H
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in (k + 1)..n {
                dot += v[i].conj() * h[(i, j)];
            }
            dot *= tau;
            for i in (k + 1)..n {
                let sub = v[i] * dot;
                h[(i, j)] -= sub;
            }
        }
        // H <- H (I - tau v v^dag)
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += h[(i, j)] * v[j];
            }
            dot *= tau;
            for j in (k + 1)..n {
                let sub = dot * v[j].conj();
                h[(i, j)] -= sub;
            }
        }
        // Z <- Z (I - tau v v^dag)
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += z[(i, j)] * v[j];
            }
            dot *= tau;
            for j in (k + 1)..n {
                let sub = dot * v[j].conj();
                z[(i, j)] -= sub;
            }
        }
        // clean the annihilated entries
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, z)
}

/// Complex Givens rotation zeroing b: returns (c, s, r) with c real,
/// [c, s; -conj(s), c] [a; b] = [r; 0].
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    if a.norm() == 0.0 {
        return (0.0, b.conj() / b.norm(), C64::new(b.norm(), 0.0));
    }
    let h = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / h;
    let phase = a / a.norm();
    let s = phase * b.conj() / h;
    (c, s, phase * h)
}

fn wilkinson_shift(h: &CMat, hi: usize) -> C64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let mu1 = tr_half + disc;
    let mu2 = tr_half - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Schur decomposition A = Z T Z^dag (T upper triangular) for complex A.
fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    let (mut h, mut z) = householder_hessenberg(a);
    if n <= 1 {
        return Ok((h, z));
    }
    let eps = f64::EPSILON;
    let max_total = 60 * n;
    let mut total_iters = 0usize;
    let mut hi = n - 1;
    let mut stall = 0usize;
    while hi > 0 {
        // find the active block [lo..=hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local.max(1e-300) {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            stall = 0;
            continue;
        }
        total_iters += 1;
        stall += 1;
        if total_iters > max_total {
            return Err(CoreError::Convergence(format!(
                "QR iteration exceeded {max_total} sweeps"
            )));
        }
        let mu = if stall.is_multiple_of(12) {
            // exceptional shift to break stagnation
            let mag = h[(hi, hi - 1)].norm()
                + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + C64::new(mag, 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        // QR by Givens on the Hessenberg band
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s, r) = givens(h[(i, i)], h[(i + 1, i)]);
            h[(i, i)] = r;
            h[(i + 1, i)] = C64::new(0.0, 0.0);
            for j in (i + 1)..n {
                let t1 = h[(i, j)];
                let t2 = h[(i + 1, j)];
                h[(i, j)] = c * t1 + s * t2;
                h[(i + 1, j)] = -s.conj() * t1 + c * t2;
            }
            rots.push((c, s));
        }
        // H <- R G1^dag G2^dag ..., Z <- Z G^dag
        for (idx, (c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            for row in 0..=(i + 1).min(hi) {
                let t1 = h[(row, i)];
                let t2 = h[(row, i + 1)];
                h[(row, i)] = *c * t1 + s.conj() * t2;
                h[(row, i + 1)] = -*s * t1 + *c * t2;
            }
            for row in 0..n {
                let t1 = z[(row, i)];
                let t2 = z[(row, i + 1)];
                z[(row, i)] = *c * t1 + s.conj() * t2;
                z[(row, i + 1)] = -*s * t1 + *c * t2;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    // zero out the strict lower triangle (converged noise)
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((h, z))
}

/// Full eigendecomposition with right eigenvectors.
pub fn eig(a: &CMat) -> Result<Eigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(CoreError::Dimension("eig needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: identity(0) });
    }
    let (t, z) = schur(a)?;
    let tnorm = super::frobenius(&t);
    // floor keeps complex division by the guard value well away from
    // denormal underflow in norm_sqr
    let smlnum = (f64::EPSILON * tnorm).max(1e-150);

    // eigenvectors of T by back-substitution, then rotate by Z
    let mut y = identity(n);
    for idx in 0..n {
        let lambda = t[(idx, idx)];
        for j in (0..idx).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for m in (j + 1)..=idx {
                acc += t[(j, m)] * y[(m, idx)];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < smlnum {
                den = C64::new(smlnum, 0.0);
            }
            y[(j, idx)] = -acc / den;
        }
    }
    let mut v = z.dot(&y);
    for j in 0..n {
        let norm: f64 = v.column(j).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= C64::new(norm, 0.0);
            }
        }
    }
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    // sort: descending real part, then ascending imaginary part
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .re
            .partial_cmp(&values[i].re)
            .unwrap()
            .then(values[i].im.partial_cmp(&values[j].im).unwrap())
    });
    let sorted_values: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let mut sorted_v = CMat::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for row in 0..n {
            sorted_v[(row, col)] = v[(row, i)];
        }
    }
    Ok(Eigen { values: sorted_values, vectors: sorted_v })
}

/// Eigendecomposition plus the inverse eigenvector matrix and its 1-norm
/// condition number.
pub fn eig_full(a: &CMat) -> Result<(Eigen, CMat, f64)> {
    let e = eig(a)?;
    let lu = lu::Lu::new(&e.vectors)?;
    if lu.is_singular() {
        return Err(CoreError::NonDiagonalizable(
            "eigenvector matrix is exactly singular".into(),
        ));
    }
    let vinv = lu.inverse()?;
    let cond = super::one_norm(&e.vectors) * super::one_norm(&vinv);
    Ok((e, vinv, cond))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use ndarray::Array2;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn reconstruct(e: &Eigen, vinv: &CMat) -> CMat {
        let n = e.values.len();
        let mut lam = Array2::zeros((n, n));
        for i in 0..n {
            lam[(i, i)] = e.values[i];
        }
        e.vectors.dot(&lam).dot(vinv)
    }

    #[test]
    fn random_complex_matrix_reconstructs() {
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..6 {
            let n = 3 + 2 * (trial % 4);
            let a = Array2::from_shape_fn((n, n), |_| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let (e, vinv, cond) = eig_full(&a).unwrap();
            let resid = frobenius(&(&reconstruct(&e, &vinv) - &a)) / frobenius(&a);
            assert!(resid < 1e-11, "n={n} resid={resid:.3e} cond={cond:.3e}");
        }
    }

    #[test]
    fn larger_random_matrices_reconstruct() {
        // superoperator sizes for d = 4 and d = 5
        let mut rng = StdRng::seed_from_u64(19);
        for n in [16usize, 25] {
            let a = Array2::from_shape_fn((n, n), |_| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let (e, vinv, cond) = eig_full(&a).unwrap();
            let resid = frobenius(&(&reconstruct(&e, &vinv) - &a)) / frobenius(&a);
            assert!(resid < 1e-10, "n={n} resid={resid:.3e} cond={cond:.3e}");
        }
    }

    #[test]
    fn zero_matrix() {
        let a = CMat::zeros((4, 4));
        let e = eig(&a).unwrap();
        for v in &e.values {
            assert_eq!(*v, C64::new(0.0, 0.0));
        }
        assert!(frobenius(&(&e.vectors - &identity(4))) < 1e-14);
    }

    #[test]
    fn triangular_eigenvalues_exact() {
        let mut a = CMat::zeros((3, 3));
        a[(0, 0)] = C64::new(2.0, 1.0);
        a[(1, 1)] = C64::new(-1.0, 0.0);
        a[(2, 2)] = C64::new(0.5, -3.0);
        a[(0, 1)] = C64::new(5.0, 0.0);
        a[(1, 2)] = C64::new(-2.0, 2.0);
        let e = eig(&a).unwrap();
        let mut got: Vec<C64> = e.values.clone();
        got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((got[0] - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((got[1] - C64::new(0.5, -3.0)).norm() < 1e-12);
        assert!((got[2] - C64::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn repeated_eigenvalues_diagonalizable_case() {
        // A = diag(1,1,2) conjugated by a random similarity stays diagonalizable
        let mut rng = StdRng::seed_from_u64(3);
        let mut d = CMat::zeros((3, 3));
        d[(0, 0)] = C64::new(1.0, 0.0);
        d[(1, 1)] = C64::new(1.0, 0.0);
        d[(2, 2)] = C64::new(2.0, 0.0);
        let w = Array2::from_shape_fn((3, 3), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let winv = crate::linalg::lu::inverse(&w).unwrap();
        let a = w.dot(&d).dot(&winv);
        let (e, vinv, _) = eig_full(&a).unwrap();
        let resid = frobenius(&(&reconstruct(&e, &vinv) - &a)) / frobenius(&a);
        assert!(resid < 1e-10, "resid={resid:.3e}");
    }
}
