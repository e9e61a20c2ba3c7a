// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive embedded Runge-Kutta integration for complex state vectors.
//!
//! Dormand-Prince 5(4) with PI step-size control and the standard
//! fourth-order dense-output interpolant, following Hairer, Norsett &
//! Wanner, "Solving Ordinary Differential Equations I", section II.5.

use crate::error::{CoreError, Result};
use crate::linalg::{C64, CVec};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;
// dense output coefficients (Hairer's CONTD5)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub h_initial: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 1_000_000, h_initial: None }
    }
}

/// Integrate y' = f(t, y) from t_grid[0] across an increasing grid,
/// returning the dense-output solution at every grid point.
pub fn integrate_dense<F>(mut f: F, y0: &CVec, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<CVec>>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    if t_grid.is_empty() {
        return Ok(vec![]);
    }
    for w in t_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(CoreError::Validation("time grid must be strictly increasing".into()));
        }
    }
    let t_end = *t_grid.last().unwrap();
    let t_start = t_grid[0];
    let mut out: Vec<CVec> = Vec::with_capacity(t_grid.len());
    let mut next_out = 0usize;
    if t_grid[0] == t_start {
        out.push(y0.clone());
        next_out = 1;
    }
    if t_grid.len() == next_out {
        return Ok(out);
    }

    let span = t_end - t_start;
    let mut t = t_start;
    let mut y = y0.clone();
    let mut k1 = f(t, &y);
    let mut h = opts.h_initial.unwrap_or(span / 100.0).min(span);
    let h_min = span * 1e-14;
    let mut err_prev: f64 = 1.0;
    let n = y.len() as f64;

    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(CoreError::Convergence(format!(
                "integrator exceeded {} steps",
                opts.max_steps
            )));
        }
        if t + h > t_end {
            h = t_end - t;
        }

        let y2: CVec = &y + &(&k1 * C64::new(h * A21, 0.0));
        let k2 = f(t + C2 * h, &y2);
        let y3: CVec = &y + &(&k1 * C64::new(h * A31, 0.0)) + &(&k2 * C64::new(h * A32, 0.0));
        let k3 = f(t + C3 * h, &y3);
        let y4: CVec = &y
            + &(&k1 * C64::new(h * A41, 0.0))
            + &(&k2 * C64::new(h * A42, 0.0))
            + &(&k3 * C64::new(h * A43, 0.0));
        let k4 = f(t + C4 * h, &y4);
        let y5: CVec = &y
            + &(&k1 * C64::new(h * A51, 0.0))
            + &(&k2 * C64::new(h * A52, 0.0))
            + &(&k3 * C64::new(h * A53, 0.0))
            + &(&k4 * C64::new(h * A54, 0.0));
        let k5 = f(t + C5 * h, &y5);
        let y6: CVec = &y
            + &(&k1 * C64::new(h * A61, 0.0))
            + &(&k2 * C64::new(h * A62, 0.0))
            + &(&k3 * C64::new(h * A63, 0.0))
            + &(&k4 * C64::new(h * A64, 0.0))
            + &(&k5 * C64::new(h * A65, 0.0));
        let k6 = f(t + h, &y6);
        let y_new: CVec = &y
            + &(&k1 * C64::new(h * B1, 0.0))
            + &(&k3 * C64::new(h * B3, 0.0))
            + &(&k4 * C64::new(h * B4, 0.0))
            + &(&k5 * C64::new(h * B5, 0.0))
            + &(&k6 * C64::new(h * B6, 0.0));
        let k7 = f(t + h, &y_new);

        // embedded error estimate
        let y_low: CVec = &y
            + &(&k1 * C64::new(h * E1, 0.0))
            + &(&k3 * C64::new(h * E3, 0.0))
            + &(&k4 * C64::new(h * E4, 0.0))
            + &(&k5 * C64::new(h * E5, 0.0))
            + &(&k6 * C64::new(h * E6, 0.0))
            + &(&k7 * C64::new(h * E7, 0.0));
        let mut err_sq = 0.0;
        for i in 0..y.len() {
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y_new[i].norm());
            let e = (y_new[i] - y_low[i]).norm() / sc;
            err_sq += e * e;
        }
        let err = (err_sq / n).sqrt().max(1e-16);

        if err <= 1.0 {
            // dense output over [t, t+h] for grid points inside the step
            while next_out < t_grid.len() && t_grid[next_out] <= t + h + 1e-14 * span {
                let theta = ((t_grid[next_out] - t) / h).clamp(0.0, 1.0);
                out.push(dense_eval(&y, &y_new, &[&k1, &k3, &k4, &k5, &k6, &k7], h, theta));
                next_out += 1;
            }
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            // PI controller
            let fac = 0.9 * err.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 6.0);
            err_prev = err;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < h_min {
            return Err(CoreError::Stiffness(format!(
                "step size {h:.3e} underflowed at t = {t:.6}"
            )));
        }
    }
    // grid points exactly at t_end that were missed by fp comparison
    while next_out < t_grid.len() {
        out.push(y.clone());
        next_out += 1;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dense_eval(y: &CVec, y_new: &CVec, ks: &[&CVec; 6], h: f64, theta: f64) -> CVec {
    if theta == 0.0 {
        return y.clone();
    }
    if theta == 1.0 {
        return y_new.clone();
    }
    let th1 = 1.0 - theta;
    // rcont coefficients per Hairer's DOPRI5
    let mut out = CVec::zeros(y.len());
    for i in 0..y.len() {
        let ydiff = y_new[i] - y[i];
        let bspl = ks[0][i] * C64::new(h, 0.0) - ydiff;
        let rcont1 = y[i];
        let rcont2 = ydiff;
        let rcont3 = bspl;
        let rcont4 = ydiff - ks[5][i] * C64::new(h, 0.0) - bspl;
        let rcont5 = (ks[0][i] * C64::new(D1, 0.0)
            + ks[1][i] * C64::new(D3, 0.0)
            + ks[2][i] * C64::new(D4, 0.0)
            + ks[3][i] * C64::new(D5, 0.0)
            + ks[4][i] * C64::new(D6, 0.0)
            + ks[5][i] * C64::new(D7, 0.0))
            * C64::new(h, 0.0);
        out[i] = rcont1
            + (rcont2 + (rcont3 + (rcont4 + rcont5 * C64::new(th1, 0.0)) * C64::new(theta, 0.0))
                * C64::new(th1, 0.0))
                * C64::new(theta, 0.0);
    }
    out
}
