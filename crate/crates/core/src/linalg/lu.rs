// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! LU decomposition with partial pivoting for complex matrices.

use super::{one_norm, C64, CMat};
use crate::error::{CoreError, Result};
use ndarray::Array2;

/// Packed LU factors of a square matrix with row pivoting.
pub struct Lu {
    lu: CMat,
    piv: Vec<usize>,
    n: usize,
    singular: bool,
}

impl Lu {
    pub fn new(a: &CMat) -> Result<Lu> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(CoreError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut lu = a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            // pivot on the largest magnitude in column k
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivval = lu[(k, k)];
            if pivval.norm() == 0.0 {
                singular = true;
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivval;
                lu[(i, k)] = f;
                if f.norm() != 0.0 {
                    for j in (k + 1)..n {
                        let sub = f * lu[(k, j)];
                        lu[(i, j)] -= sub;
                    }
                }
            }
        }
        Ok(Lu { lu, piv, n, singular })
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solve A x = b for a single right-hand side (in place on a copy).
    pub fn solve_vec(&self, b: &[C64]) -> Result<Vec<C64>> {
        if self.singular {
            return Err(CoreError::Validation("singular matrix in LU solve".into()));
        }
        let n = self.n;
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for k in 0..n {
            for i in (k + 1)..n {
                let f = self.lu[(i, k)];
                let sub = f * x[k];
                x[i] -= sub;
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.lu[(k, k)];
            for i in 0..k {
                let sub = self.lu[(i, k)] * x[k];
                x[i] -= sub;
            }
        }
        Ok(x)
    }

    /// Solve A X = B column by column.
    pub fn solve_mat(&self, b: &CMat) -> Result<CMat> {
        let n = self.n;
        if b.nrows() != n {
            return Err(CoreError::Dimension("rhs rows != matrix size".into()));
        }
        let mut out = Array2::zeros((n, b.ncols()));
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..b.ncols() {
            for i in 0..n {
                col[i] = b[(i, j)];
            }
            let x = self.solve_vec(&col)?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<CMat> {
        self.solve_mat(&super::identity(self.n))
    }
}

/// Invert a square complex matrix.
pub fn inverse(a: &CMat) -> Result<CMat> {
    Lu::new(a)?.inverse()
}

/// 1-norm condition estimate via the explicit inverse. Matrices here are
/// small, so the O(n^3) cost of the honest estimate is acceptable.
pub fn cond_1(a: &CMat) -> Result<f64> {
    let inv = inverse(a)?;
    Ok(one_norm(a) * one_norm(&inv))
}
