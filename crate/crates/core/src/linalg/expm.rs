// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with Pade approximants.
//!
//! Follows Higham, "The scaling and squaring method for the matrix
//! exponential revisited", SIAM J. Matrix Anal. Appl. 26 (2005): the
//! approximant degree is chosen from the 1-norm against the theta table,
//! with degree 13 plus squaring for everything larger.

use super::{identity, lu::Lu, one_norm, C64, CMat};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn pade_uv(a: &CMat, powers: &[CMat], b: &[f64]) -> (CMat, CMat) {
    // powers[k] = A^{2k+2}, so powers[0] = A^2 etc.
    let n = a.nrows();
    let mut u_inner: CMat = identity(n) * C64::new(b[1], 0.0);
    let mut v: CMat = identity(n) * C64::new(b[0], 0.0);
    for (k, p) in powers.iter().enumerate() {
        let odd = b[2 * k + 3];
        let even = b[2 * k + 2];
        u_inner = u_inner + p * C64::new(odd, 0.0);
        v = v + p * C64::new(even, 0.0);
    }
    (a.dot(&u_inner), v)
}

fn pade_eval(a: &CMat, degree: usize) -> (CMat, CMat) {
    let a2 = a.dot(a);
    match degree {
        3 => pade_uv(a, &[a2], &B3),
        5 => {
            let a4 = a2.dot(&a2);
            pade_uv(a, &[a2, a4], &B5)
        }
        7 => {
            let a4 = a2.dot(&a2);
            let a6 = a4.dot(&a2);
            pade_uv(a, &[a2, a4, a6], &B7)
        }
        9 => {
            let a4 = a2.dot(&a2);
            let a6 = a4.dot(&a2);
            let a8 = a6.dot(&a2);
            pade_uv(a, &[a2, a4, a6, a8], &B9)
        }
        _ => unreachable!(),
    }
}

/// e^A for a square complex matrix.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return identity(0);
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return identity(n);
    }

    let b = &B13;
    let (u, v): (CMat, CMat);
    let mut squarings = 0u32;
    if norm <= THETA_9 {
        let degree = if norm <= THETA_3 {
            3
        } else if norm <= THETA_5 {
            5
        } else if norm <= THETA_7 {
            7
        } else {
            9
        };
        let (uu, vv) = pade_eval(a, degree);
        u = uu;
        v = vv;
    } else {
        squarings = ((norm / THETA_13).log2().ceil()).max(0.0) as u32;
        let scale = C64::new(0.5f64.powi(squarings as i32), 0.0);
        let a_s: CMat = a * scale;
        let a2 = a_s.dot(&a_s);
        let a4 = a2.dot(&a2);
        let a6 = a4.dot(&a2);
        // degree-13: U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
        let w1 = &a6 * C64::new(b[13], 0.0) + &a4 * C64::new(b[11], 0.0) + &a2 * C64::new(b[9], 0.0);
        let w2 = &a6 * C64::new(b[7], 0.0)
            + &a4 * C64::new(b[5], 0.0)
            + &a2 * C64::new(b[3], 0.0)
            + identity(n) * C64::new(b[1], 0.0);
        let z1 = &a6 * C64::new(b[12], 0.0) + &a4 * C64::new(b[10], 0.0) + &a2 * C64::new(b[8], 0.0);
        let z2 = &a6 * C64::new(b[6], 0.0)
            + &a4 * C64::new(b[4], 0.0)
            + &a2 * C64::new(b[2], 0.0)
            + identity(n) * C64::new(b[0], 0.0);
        u = a_s.dot(&(a6.dot(&w1) + w2));
        v = a6.dot(&z1) + z2;
    }

    // r = (V - U)^{-1} (V + U)
    let vm = &v - &u;
    let vp = &v + &u;
    let lu = Lu::new(&vm).expect("square");
    let mut r = lu.solve_mat(&vp).expect("Pade denominator is nonsingular");
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

/// e^{A t}.
pub fn expm_t(a: &CMat, t: f64) -> CMat {
    expm(&(a * C64::new(t, 0.0)))
}

/// phi1(A t) * t = integral_0^t e^{A s} ds, evaluated through the augmented
/// block matrix exp([[A, I], [0, 0]] t); well defined for singular A.
pub fn expm_integral(a: &CMat, t: f64) -> CMat {
    let n = a.nrows();
    let mut blk: CMat = CMat::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            blk[(i, j)] = a[(i, j)];
        }
        blk[(i, n + i)] = C64::new(1.0, 0.0);
    }
    let e = expm_t(&blk, t);
    let mut out = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = e[(i, n + j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use ndarray::array;

    #[test]
    fn exp_of_diagonal() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-2.0, 0.5)]
        ];
        let e = expm(&a);
        assert!((e[(0, 0)] - C64::new(1.0, 0.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - C64::new(-2.0, 0.5).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn exp_of_nilpotent() {
        // exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
        let a = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let e = expm_t(&a, 3.25);
        assert!((e[(0, 1)] - C64::new(3.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn group_property_large_norm() {
        // e^{A(t+s)} = e^{At} e^{As} with a norm big enough to force squaring
        let a = array![
            [C64::new(-3.0, 2.0), C64::new(4.0, -1.0)],
            [C64::new(0.5, 0.0), C64::new(-1.0, -5.0)]
        ];
        let lhs = expm_t(&a, 7.0);
        let rhs = expm_t(&a, 3.0).dot(&expm_t(&a, 4.0));
        let rel = frobenius(&(&lhs - &rhs)) / frobenius(&lhs);
        assert!(rel < 1e-12, "rel = {rel:.3e}");
    }

    #[test]
    fn integral_of_exponential_matches_closed_form() {
        // for invertible A: int_0^t e^{As} ds = A^{-1}(e^{At} - 1)
        let a = array![
            [C64::new(-1.0, 0.3), C64::new(0.2, 0.0)],
            [C64::new(0.0, -0.2), C64::new(-0.5, 0.0)]
        ];
        let t = 1.7;
        let direct = expm_integral(&a, t);
        let inv = crate::linalg::lu::inverse(&a).unwrap();
        let closed = inv.dot(&(expm_t(&a, t) - crate::linalg::identity(2)));
        assert!(frobenius(&(&direct - &closed)) < 1e-13);
    }

    #[test]
    fn integral_handles_singular_generator() {
        // A = 0: integral is t * I
        let a = CMat::zeros((3, 3));
        let e = expm_integral(&a, 2.5);
        for i in 0..3 {
            assert!((e[(i, i)] - C64::new(2.5, 0.0)).norm() < 1e-14);
        }
    }
}
