// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Column-pivoted Householder QR, used to extract an orthonormal basis of
//! the range of a (generally non-Hermitian) projector.

use super::{C64, CMat};
use ndarray::Array2;

/// Orthonormal basis of the column space of `a`, detected at relative
/// tolerance `rel_tol` on the pivoted R diagonal. Returns an n x r matrix
/// with orthonormal columns.
pub fn range_basis(a: &CMat, rel_tol: f64) -> CMat {
    let (n, m) = a.dim();
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut col_norms: Vec<f64> = (0..m)
        .map(|j| r.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    let kmax = n.min(m);
    let mut reflectors: Vec<(usize, Vec<C64>, f64)> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();

    for k in 0..kmax {
        // pivot: column with the largest remaining norm
        let (pj, &pnorm) = col_norms
            .iter()
            .enumerate()
            .skip(k)
            .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .unwrap();
        if pnorm <= 0.0 {
            break;
        }
        if pj != k {
            for i in 0..n {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, pj)];
                r[(i, pj)] = tmp;
            }
            perm.swap(k, pj);
            col_norms.swap(k, pj);
        }
        // Householder on column k, rows k..n
        let xnorm2: f64 = (k..n).map(|i| r[(i, k)].norm_sqr()).sum();
        let xnorm = xnorm2.sqrt();
        if xnorm == 0.0 {
            break;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = vec![C64::new(0.0, 0.0); n];
        for i in k..n {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            break;
        }
        let tau = 2.0 / vnorm2;
        for j in k..m {
            let mut dot = C64::new(0.0, 0.0);
            for i in k..n {
                dot += v[i].conj() * r[(i, j)];
            }
            dot *= tau;
            for i in k..n {
                let sub = v[i] * dot;
                r[(i, j)] -= sub;
            }
        }
        r[(k, k)] = alpha;
        diag.push(alpha.norm());
        reflectors.push((k, v, tau));
        // downdate remaining column norms
        for j in (k + 1)..m {
            col_norms[j] = ((k + 1)..n).map(|i| r[(i, j)].norm_sqr()).sum();
        }
    }

    let r0 = diag.first().copied().unwrap_or(0.0);
    let rank = diag.iter().take_while(|&&d| d > rel_tol * r0).count();

    // assemble the first `rank` columns of Q by applying reflectors to e_k
    let mut q = Array2::zeros((n, rank));
    for col in 0..rank {
        let mut e = vec![C64::new(0.0, 0.0); n];
        e[col] = C64::new(1.0, 0.0);
        for (k, v, tau) in reflectors.iter().rev() {
            if *k > col {
                continue;
            }
            let mut dot = C64::new(0.0, 0.0);
            for i in *k..n {
                dot += v[i].conj() * e[i];
            }
            dot *= *tau;
            for i in *k..n {
                e[i] -= v[i] * dot;
            }
        }
        for i in 0..n {
            q[(i, col)] = e[i];
        }
    }
    q
}
