// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Browser bindings for the interactive demo page. Three operations are
//! exposed, all returning JSON strings ready for plotting:
//!
//! - [`three_level_study`]: exact vs truncated-TCL vs weak-coupling
//!   populations and error curves for the built-in three-level model;
//! - [`k2_rate_curve`]: the time-dependent decay coefficient of the
//!   second-order generator against its long-time limit;
//! - [`kernel_curve`]: the nested exponential kernels h_k(t).

use serde::Serialize;
use tclq_core::asymptotics::{bvh_compute, bvh_solution, check_relaxation, RelaxationOptions};
use tclq_core::dynamics::{propagate_exact_projected, propagate_tcl, TclPropagationOptions};
use tclq_core::kernels::{h_k, KernelQuery};
use tclq_core::linalg::{C64, CMat};
use tclq_core::model;
use tclq_core::superops::spectral_decompose;
use tclq_core::tcl::TclSeries;
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Serialize)]
struct StudyOutput {
    times: Vec<f64>,
    exact_p11: Vec<f64>,
    exact_p00: Vec<f64>,
    exact_coh01: Vec<f64>,
    tcl2_p11: Vec<f64>,
    bvh_p11: Vec<f64>,
    err_tcl2: Vec<f64>,
    err_bvh: Vec<f64>,
    err_bvh_unrenormalized: Vec<f64>,
    relaxation_enhanced: bool,
}

#[derive(Serialize)]
struct ErrorOutput {
    error: String,
}

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::to_string(&ErrorOutput { error: msg.to_string() }).unwrap()
}

fn initial_state(kind: u32) -> CMat {
    let e = model::elementary(3);
    match kind {
        // excited qubit, consistent with the projector
        0 => e(1, 1),
        // pure state with coherences into the decaying level
        1 => {
            let amps = [
                C64::new(0.475f64.sqrt(), 0.0),
                C64::new(0.05f64.sqrt(), 0.0),
                C64::new(0.0, 0.475f64.sqrt()),
            ];
            let mut rho = CMat::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    rho[(i, j)] = amps[i] * amps[j].conj();
                }
            }
            rho
        }
        // maximally mixed
        _ => {
            let third = C64::new(1.0 / 3.0, 0.0);
            let mut rho = CMat::zeros((3, 3));
            for i in 0..3 {
                rho[(i, i)] = third;
            }
            rho
        }
    }
}

/// Exact, order-2 TCL, and weak-coupling dynamics of the three-level
/// model over `n_half_lives` multiples of the weak-coupling decay time.
#[wasm_bindgen]
pub fn three_level_study(
    gamma: f64,
    g: f64,
    lambda: f64,
    state_kind: u32,
    n_half_lives: f64,
    points: usize,
) -> String {
    if gamma <= 0.0 || lambda <= 0.0 || !(2..=4000).contains(&points) {
        return err_json("need gamma > 0, lambda > 0, 2 <= points <= 4000");
    }
    let m = model::three_level_model(gamma, g, lambda);
    let rho0 = initial_state(state_kind);
    let rate = (4.0 * g * g / gamma * lambda * lambda).max(1e-8);
    let t_end = n_half_lives.clamp(0.1, 12.0) / rate;
    let times: Vec<f64> = (0..points).map(|i| t_end * i as f64 / (points - 1) as f64).collect();

    let spec = match spectral_decompose(&m.l0) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let exact = match propagate_exact_projected(&m, &spec, &rho0, &times) {
        Ok(t) => t,
        Err(e) => return err_json(e),
    };
    let series = match TclSeries::new(m.clone(), 3) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let tcl2 = match propagate_tcl(&series, &rho0, &times, &TclPropagationOptions::default()) {
        Ok(t) => t,
        Err(e) => return err_json(e),
    };
    let rep = match check_relaxation(&m, &RelaxationOptions::for_spectrum(&spec)) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let bvh = match bvh_compute(&series, &rep, 1e-6) {
        Ok(b) => b,
        Err(e) => return err_json(e),
    };
    let mut bvh_plain = bvh.clone();
    bvh_plain.renorm_map = m.projector.clone();

    let mut out = StudyOutput {
        times: times.clone(),
        exact_p11: Vec::new(),
        exact_p00: Vec::new(),
        exact_coh01: Vec::new(),
        tcl2_p11: Vec::new(),
        bvh_p11: Vec::new(),
        err_tcl2: Vec::new(),
        err_bvh: Vec::new(),
        err_bvh_unrenormalized: Vec::new(),
        relaxation_enhanced: rep.enhanced_satisfied,
    };
    for (i, t) in times.iter().enumerate() {
        let ex = &exact.states[i];
        out.exact_p11.push(ex[(1, 1)].re);
        out.exact_p00.push(ex[(0, 0)].re);
        out.exact_coh01.push(ex[(0, 1)].norm());
        let tc = &tcl2.states[i];
        out.tcl2_p11.push(tc[(1, 1)].re);
        let bs = match bvh_solution(&m, &bvh, &rho0, *t, false) {
            Ok(b) => b,
            Err(e) => return err_json(e),
        };
        let bp = match bvh_solution(&m, &bvh_plain, &rho0, *t, false) {
            Ok(b) => b,
            Err(e) => return err_json(e),
        };
        out.bvh_p11.push(bs[(1, 1)].re);
        out.err_tcl2.push(tclq_core::linalg::frobenius(&(tc - ex)));
        out.err_bvh.push(tclq_core::linalg::frobenius(&(&bs - ex)));
        out.err_bvh_unrenormalized.push(tclq_core::linalg::frobenius(&(&bp - ex)));
    }
    serde_json::to_string(&out).unwrap()
}

#[derive(Serialize)]
struct RateOutput {
    times: Vec<f64>,
    rate: Vec<f64>,
    limit: f64,
}

/// The decay coefficient of the order-2 generator: the (rho11 -> rho11)
/// matrix element of -K2(t), which approaches 4 g^2/gamma.
#[wasm_bindgen]
pub fn k2_rate_curve(gamma: f64, g: f64, t_max: f64, points: usize) -> String {
    if gamma <= 0.0 || t_max <= 0.0 || !(2..=4000).contains(&points) {
        return err_json("need gamma > 0, t_max > 0, 2 <= points <= 4000");
    }
    let m = model::three_level_model(gamma, g, 0.1);
    let series = match TclSeries::new(m, 2) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let idx11 = 1 + 3;
    let mut out = RateOutput {
        times: Vec::with_capacity(points),
        rate: Vec::with_capacity(points),
        limit: 4.0 * g * g / gamma,
    };
    for i in 0..points {
        let t = t_max * i as f64 / (points - 1) as f64;
        let k2 = match series.k_n(2, t) {
            Ok(k) => k,
            Err(e) => return err_json(e),
        };
        out.times.push(t);
        out.rate.push(-k2.matrix()[(idx11, idx11)].re);
    }
    serde_json::to_string(&out).unwrap()
}

#[derive(Serialize)]
struct KernelOutput {
    times: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// h_k(t; gamma_1, ..., gamma_k) over a time grid. `gammas` holds
/// interleaved re/im parts.
#[wasm_bindgen]
pub fn kernel_curve(gammas: Vec<f64>, t_max: f64, points: usize) -> String {
    if gammas.is_empty() || !gammas.len().is_multiple_of(2) || gammas.len() > 8 {
        return err_json("gammas must hold 1..=4 interleaved re/im pairs");
    }
    if t_max <= 0.0 || !(2..=4000).contains(&points) {
        return err_json("need t_max > 0, 2 <= points <= 4000");
    }
    let gs: Vec<C64> = gammas.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    let mut out = KernelOutput { times: Vec::new(), re: Vec::new(), im: Vec::new() };
    for i in 0..points {
        let t = t_max * i as f64 / (points - 1) as f64;
        let q = match KernelQuery::new(t, gs.clone()) {
            Ok(q) => q,
            Err(e) => return err_json(e),
        };
        match h_k(&q) {
            Ok(v) => {
                out.times.push(t);
                out.re.push(v.re);
                out.im.push(v.im);
            }
            Err(e) => return err_json(e),
        }
    }
    serde_json::to_string(&out).unwrap()
}
