// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra kit.
//!
//! Everything in this crate works on matrices of dimension d^2 x d^2 with
//! d <= ~16, so plain dense O(n^3) routines are the right tool. The kit is
//! self-contained (no LAPACK binding) which keeps the crate portable,
//! including to wasm targets.

pub mod eig;
pub mod expm;
pub mod lu;
pub mod qr;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

pub fn identity(n: usize) -> CMat {
    Array2::eye(n)
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// 1-norm (maximum absolute column sum).
pub fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = frobenius(a).max(1.0);
    frobenius(&(a - &dagger(a))) <= tol * scale
}
