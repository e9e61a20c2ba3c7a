// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scalar nested exponential kernels
//!
//! ```text
//!   h_k(t; g1, ..., gk) = int_0^t dt1 int_0^t1 dt2 ... int_0^t(k-1) dtk
//!                         e^{-(g1 t1 + ... + gk tk)}
//! ```
//!
//! evaluated as entry (0, k) of e^{t B}, where B is the (k+1) x (k+1)
//! upper bidiagonal matrix with diagonal (0, -g1, -(g1+g2), ...) and unit
//! superdiagonal. That entry is the confluent divided difference of
//! x -> e^{t x} at the partial-sum nodes, so coinciding or near-coinciding
//! nodes (the limit cases of the closed form) need no branching and no
//! cancellation-prone alternating sums.

use crate::error::{CoreError, Result};
use crate::linalg::{expm::expm, C64, CMat};

/// A single kernel evaluation request.
#[derive(Debug, Clone)]
pub struct KernelQuery {
    pub t: f64,
    pub gammas: Vec<C64>,
}

impl KernelQuery {
    pub fn new(t: f64, gammas: Vec<C64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(CoreError::Validation("kernel order k must be >= 1".into()));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(CoreError::Validation(format!("kernel time {t} must be >= 0")));
        }
        Ok(KernelQuery { t, gammas })
    }

    pub fn order(&self) -> usize {
        self.gammas.len()
    }
}

/// Bidiagonal generator for the divided-difference evaluation.
fn bidiagonal(gammas: &[C64]) -> CMat {
    let k = gammas.len();
    let mut b = CMat::zeros((k + 1, k + 1));
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..=k {
        if m > 0 {
            acc += gammas[m - 1];
        }
        b[(m, m)] = -acc;
        if m < k {
            b[(m, m + 1)] = C64::new(1.0, 0.0);
        }
    }
    b
}

/// Evaluate h_k. Handles all degenerate gamma configurations uniformly.
pub fn h_k(query: &KernelQuery) -> Result<C64> {
    let k = query.order();
    let b = bidiagonal(&query.gammas);
    let e = expm(&(b * C64::new(query.t, 0.0)));
    Ok(e[(0, k)])
}

/// Convenience: h_k with h_0 == 1 for an empty gamma list (the convention
/// used by the derivative moment formulas).
pub fn h_k_or_one(t: f64, gammas: &[C64]) -> Result<C64> {
    if gammas.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    h_k(&KernelQuery::new(t, gammas.to_vec())?)
}

const QUAD_MAX_DEPTH: usize = 28;
const QUAD_MAX_EVALS: usize = 16_000_000;

/// 15-point Gauss-Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
const XGK: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const WGK: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const WG: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gk15<F: Fn(f64) -> Result<C64>>(
    f: &F,
    a: f64,
    b: f64,
    budget: &std::cell::Cell<usize>,
) -> Result<(C64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc_k = C64::new(0.0, 0.0);
    let mut acc_g = C64::new(0.0, 0.0);
    budget.set(budget.get() + 15);
    if budget.get() > QUAD_MAX_EVALS {
        return Err(CoreError::Convergence(
            "nested quadrature exceeded its evaluation budget".into(),
        ));
    }
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let v = f(mid + half * x)?;
        acc_k += v * wk;
        if i % 2 == 1 {
            acc_g += v * WG[i / 2];
        }
    }
    let ik = acc_k * half;
    let ig = acc_g * half;
    Ok((ik, (ik - ig).norm()))
}

fn adaptive<F: Fn(f64) -> Result<C64>>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    budget: &std::cell::Cell<usize>,
) -> Result<C64> {
    let (whole, err) = gk15(f, a, b, budget)?;
    // accept on the requested absolute tolerance or on a relative floor:
    // squeezing much below ~1e-11 of the local magnitude is futile in f64
    // once the integrand spans many orders of magnitude
    if err <= tol || err <= 1e-11 * whole.norm() || b - a < 1e-14 {
        return Ok(whole);
    }
    if depth >= QUAD_MAX_DEPTH {
        return Err(CoreError::Convergence(format!(
            "quadrature failed to reach tol {tol:.1e} on [{a}, {b}] (err {err:.1e})"
        )));
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, a, mid, 0.5 * tol, depth + 1, budget)?;
    let right = adaptive(f, mid, b, 0.5 * tol, depth + 1, budget)?;
    Ok(left + right)
}

/// Direct adaptive nested quadrature of the defining integral. Test oracle:
/// independent of the divided-difference path. Cost grows geometrically
/// with k, hence the k <= 4 guard.
pub fn h_k_quadrature(query: &KernelQuery, abs_tol: f64) -> Result<C64> {
    let k = query.order();
    if k > 4 {
        return Err(CoreError::Validation(
            "quadrature oracle is limited to k <= 4".into(),
        ));
    }
    if query.t == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let budget = std::cell::Cell::new(0usize);
    nested_level(&query.gammas, 0, query.t, abs_tol, &budget)
}

fn nested_level(
    gammas: &[C64],
    level: usize,
    upper: f64,
    tol: f64,
    budget: &std::cell::Cell<usize>,
) -> Result<C64> {
    let gamma = gammas[level];
    let last = level + 1 == gammas.len();
    // inner levels get a proportionally tighter tolerance, relative to the
    // magnitude scale the decaying/growing exponential can reach
    let f = |s: f64| -> Result<C64> {
        let w = (-gamma * s).exp();
        if last {
            Ok(w)
        } else {
            let inner_tol = tol / (3.0 * w.norm().max(1.0) * upper.max(1.0));
            Ok(w * nested_level(gammas, level + 1, s, inner_tol, budget)?)
        }
    };
    adaptive(&f, 0.0, upper, tol, 0, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn q(t: f64, gs: &[C64]) -> KernelQuery {
        KernelQuery::new(t, gs.to_vec()).unwrap()
    }

    #[test]
    fn h1_closed_form() {
        // h1(t; g) = (1 - e^{-g t})/g at g = 1, t = 1
        let v = h_k(&q(1.0, &[c(1.0, 0.0)])).unwrap();
        let expect = 1.0 - (-1.0f64).exp();
        assert!((v - c(expect, 0.0)).norm() < 1e-14);
        assert!((v.re - 0.6321205588).abs() < 1e-9);
    }

    #[test]
    fn h1_at_zero_gamma_is_t() {
        let v = h_k(&q(2.3, &[c(0.0, 0.0)])).unwrap();
        assert!((v - c(2.3, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn h2_case_table() {
        let t = 1.4;
        let g1 = c(0.8, 0.0);
        let g2 = c(0.5, 0.0);
        // generic: (1/g2)[(1 - e^{-g1 t})/g1 - (1 - e^{-(g1+g2) t})/(g1+g2)]
        let v = h_k(&q(t, &[g1, g2])).unwrap();
        let f = |g: C64| (C64::new(1.0, 0.0) - (-g * t).exp()) / g;
        let expect = (f(g1) - f(g1 + g2)) / g2;
        assert!((v - expect).norm() < 1e-12);

        // g1 = 0: -(1 - g2 t - e^{-g2 t})/g2^2
        let v = h_k(&q(t, &[c(0.0, 0.0), g2])).unwrap();
        let expect = -(C64::new(1.0, 0.0) - g2 * t - (-g2 * t).exp()) / (g2 * g2);
        assert!((v - expect).norm() < 1e-12);

        // g2 = -g1 != 0: the confluent limit -(1 - g1 t - e^{-g1 t})/g1^2,
        // i.e. the previous row's expression in the first argument (the
        // limit of the generic formula as the partial sum g1 + g2 -> 0)
        let g1b = -g2;
        let v = h_k(&q(t, &[g1b, g2])).unwrap();
        let expect = -(C64::new(1.0, 0.0) - g1b * t - (-g1b * t).exp()) / (g1b * g1b);
        assert!((v - expect).norm() < 1e-12);
        let oracle = h_k_quadrature(&q(t, &[g1b, g2]), 1e-12).unwrap();
        assert!((v - oracle).norm() < 1e-10);

        // g2 = 0: (1 - (1 + g1 t) e^{-g1 t})/g1^2
        let v = h_k(&q(t, &[g1, c(0.0, 0.0)])).unwrap();
        let expect = (C64::new(1.0, 0.0) - (C64::new(1.0, 0.0) + g1 * t) * (-g1 * t).exp())
            / (g1 * g1);
        assert!((v - expect).norm() < 1e-12);

        // both zero: t^2/2
        let v = h_k(&q(t, &[c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!((v - c(t * t / 2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn quadrature_matches_divided_difference_complex() {
        let query = q(1.0, &[c(0.3, 0.0), c(-0.1, 0.2), c(0.7, 0.0)]);
        let a = h_k(&query).unwrap();
        let b = h_k_quadrature(&query, 1e-11).unwrap();
        assert!((a - b).norm() < 1e-9, "diff = {:.3e}", (a - b).norm());
    }

    #[test]
    fn quadrature_zero_gamma_is_t() {
        let v = h_k_quadrature(&q(1.9, &[c(0.0, 0.0)]), 1e-12).unwrap();
        assert!((v - c(1.9, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn invalid_queries_rejected() {
        assert!(KernelQuery::new(1.0, vec![]).is_err());
        assert!(KernelQuery::new(-0.5, vec![c(1.0, 0.0)]).is_err());
        assert!(h_k_quadrature(&q(1.0, &[c(1.0, 0.0); 5]), 1e-8).is_err());
    }

    #[test]
    fn monotone_bound_real_nonnegative() {
        // 0 <= h_k(t; g) <= t^k/k! for real g >= 0, equality at g = 0
        let t = 1.3;
        for k in 1..=4usize {
            let gs = vec![c(0.4, 0.0); k];
            let v = h_k(&q(t, &gs)).unwrap();
            let mut fact = 1.0;
            for m in 1..=k {
                fact *= m as f64;
            }
            let bound = t.powi(k as i32) / fact;
            assert!(v.im.abs() < 1e-14);
            assert!(v.re > 0.0 && v.re <= bound + 1e-14, "k={k} v={v}");
            let at_zero = h_k(&q(t, &vec![c(0.0, 0.0); k])).unwrap();
            assert!((at_zero.re - bound).abs() < 1e-12 * bound);
        }
    }

    #[test]
    fn derivative_recursion_by_finite_differences() {
        // d/dt h_k(t; g1..gk) = e^{-g1 t} h_{k-1}(t; g2..gk)
        let gs = [c(0.6, -0.3), c(-0.2, 0.1), c(0.9, 0.4)];
        let t = 1.1;
        let h = 1e-6;
        for k in 1..=3usize {
            let g = &gs[..k];
            let plus = h_k(&q(t + h, g)).unwrap();
            let minus = h_k(&q(t - h, g)).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let analytic = (-g[0] * t).exp() * h_k_or_one(t, &g[1..]).unwrap();
            assert!((fd - analytic).norm() < 1e-5, "k={k} diff={:.2e}", (fd - analytic).norm());
        }
    }

    #[test]
    fn large_t_limit_for_decaying_gammas() {
        // partial sums all have positive real part:
        // h_k -> 1 / prod_n (g1 + ... + gn)
        let gs = [c(0.9, 0.2), c(-0.3, -0.1), c(0.6, 0.0)];
        let mut partial = C64::new(0.0, 0.0);
        let mut prod = C64::new(1.0, 0.0);
        let mut min_re = f64::INFINITY;
        for g in gs {
            partial += g;
            prod *= partial;
            min_re = min_re.min(partial.re);
        }
        let t = 50.0 / min_re;
        let v = h_k(&q(t, &gs)).unwrap();
        assert!((v - prod.inv()).norm() < 1e-8);
    }

    #[test]
    fn degeneracy_continuity() {
        // perturbing one gamma by 1e-7 moves h_k by O(1e-7): no branch cliffs
        let base = [c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.3), c(0.2, -0.3)];
        let t = 2.0;
        for k in 1..=4usize {
            let gs = &base[..k];
            let v0 = h_k(&q(t, gs)).unwrap();
            for j in 0..k {
                let mut pert = gs.to_vec();
                pert[j] += c(1e-7, 0.0);
                let v1 = h_k(&q(t, &pert)).unwrap();
                assert!(
                    (v1 - v0).norm() <= 50.0 * 1e-7,
                    "k={k} j={j} jump={:.3e}",
                    (v1 - v0).norm()
                );
            }
        }
    }
}
