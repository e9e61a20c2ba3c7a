// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command implementations. Every command prints a run report to stdout;
//! numeric payloads go to the requested output files through the
//! deterministic writers in [`crate::emit`].

use crate::emit::{fmt_f64, json_array, JsonDoc};
use crate::modelfile::{content_hash, parse_state, InputError, ModelFile};
use std::path::Path;
use std::time::Instant;
use tclq_core::asymptotics::{
    bvh_compute, bvh_error_study, bvh_solution, bvh_solution_leading, check_relaxation,
    default_horizon, generator_limits, renormalization_map, RelaxationOptions,
};
use tclq_core::dynamics::{compare, propagate_exact_projected, propagate_tcl, state_warnings,
    TclPropagationOptions};
use tclq_core::linalg::{frobenius, max_abs, C64, CMat};
use tclq_core::model::{self, ModelSpec};
use tclq_core::superops::{limit_superoperator, spectral_decompose, Superoperator};
use tclq_core::tcl::TclSeries;
use tclq_core::CoreError;

/// Exit-code contract: 0 success, 1 assertion failure, 2 plain relaxation
/// only, 3 no relaxation, 4 input error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_PLAIN_ONLY: i32 = 2;
pub const EXIT_NOT_RELAXING: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

pub struct CommandOutcome {
    pub exit_code: i32,
}

fn fail_input(msg: impl std::fmt::Display) -> CommandOutcome {
    eprintln!("error: {msg}");
    CommandOutcome { exit_code: EXIT_INPUT }
}

fn load_model(path: &Path) -> Result<(ModelSpec, String), InputError> {
    let bytes = std::fs::read(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| InputError("model file is not UTF-8".into()))?;
    let mf = ModelFile::parse(&text)?;
    Ok((mf.build()?, content_hash(&bytes)))
}

fn load_rho0(path: &Path, d: usize) -> Result<CMat, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    parse_state(&text, d)
}

/// "start:stop:count" linear grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, InputError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(InputError(format!("grid '{spec}' is not start:stop:count")));
    }
    let start: f64 = parts[0].parse().map_err(|_| InputError("bad grid start".into()))?;
    let stop: f64 = parts[1].parse().map_err(|_| InputError("bad grid stop".into()))?;
    let count: usize = parts[2].parse().map_err(|_| InputError("bad grid count".into()))?;
    if count == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(InputError(format!("grid '{spec}' is empty or non-increasing")));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect())
}

fn report_header(command: &str, model_hash: &str, params: &str) {
    println!("command: {command}");
    println!("model-hash: {model_hash}");
    println!("parameters: {params}");
}

fn report_footer(outputs: &[&Path], started: Instant) {
    for o in outputs {
        println!("output: {}", o.display());
    }
    println!("wall-time-s: {:.3}", started.elapsed().as_secs_f64());
}

pub fn cmd_derive(model_path: &Path, order: usize, times: &str, out: &Path) -> CommandOutcome {
    let started = Instant::now();
    let (model, hash) = match load_model(model_path) {
        Ok(v) => v,
        Err(e) => return fail_input(e),
    };
    let grid = match parse_grid(times) {
        Ok(g) => g,
        Err(e) => return fail_input(e),
    };
    if order == 0 || order > 6 {
        return fail_input("order must be within 1..=6");
    }
    report_header("derive", &hash, &format!("order={order} times={times}"));
    let series = match TclSeries::new(model, order) {
        Ok(s) => s,
        Err(CoreError::NonDiagonalizable(msg)) => {
            eprintln!(
                "error: {msg}\nhint: the free generator lacks a usable eigenbasis; \
                 derive coefficients through the quadrature backend instead \
                 (moments_quadrature in the library API)"
            );
            return CommandOutcome { exit_code: EXIT_INPUT };
        }
        Err(e) => return fail_input(e),
    };
    let mut entries = Vec::new();
    for &t in &grid {
        for n in 1..=order {
            let k = match series.k_n(n, t) {
                Ok(k) => k,
                Err(e) => return fail_input(e),
            };
            let i = match series.i_n(n, t) {
                Ok(i) => i,
                Err(e) => return fail_input(e),
            };
            let mut doc = JsonDoc::new();
            doc.field_f64("time", t)
                .field_usize("order", n)
                .field_matrix("k", k.matrix())
                .field_matrix("i", i.matrix());
            entries.push(doc.finish());
        }
    }
    let mut doc = JsonDoc::new();
    doc.field_str("model_hash", &hash)
        .field_usize("max_order", order)
        .field_raw("times", &json_array(grid.iter().map(|t| fmt_f64(*t)).collect()))
        .field_raw("entries", &json_array(entries));
    if let Err(e) = std::fs::write(out, doc.finish() + "\n") {
        return fail_input(format!("cannot write {}: {e}", out.display()));
    }
    report_footer(&[out], started);
    CommandOutcome { exit_code: EXIT_OK }
}

pub fn cmd_check_relaxation(
    model_path: &Path,
    order: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> CommandOutcome {
    let started = Instant::now();
    let (model, hash) = match load_model(model_path) {
        Ok(v) => v,
        Err(e) => return fail_input(e),
    };
    report_header(
        "check-relaxation",
        &hash,
        &format!("order={order} samples={samples} seed={seed} tol={tol:e}"),
    );
    let spec = match spectral_decompose(&model.l0) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let mut opts = RelaxationOptions::for_spectrum(&spec);
    opts.order = order;
    opts.tuples_per_order = samples;
    opts.seed = seed;
    opts.tol = tol;
    let rep = match check_relaxation(&model, &opts) {
        Ok(r) => r,
        Err(e) => return fail_input(e),
    };
    println!("plain-satisfied: {}", rep.plain_satisfied);
    println!("enhanced-satisfied: {}", rep.enhanced_satisfied);
    println!("shortcut-used: {}", rep.shortcut_used);
    println!("max-violation: {}", fmt_f64(rep.max_violation));
    println!("sampled-tuples: {}", rep.samples.len());
    report_footer(&[], started);
    let code = if rep.enhanced_satisfied {
        EXIT_OK
    } else if rep.plain_satisfied {
        EXIT_PLAIN_ONLY
    } else {
        EXIT_NOT_RELAXING
    };
    CommandOutcome { exit_code: code }
}

pub fn cmd_bvh(model_path: &Path, rho0_path: &Path, out: &Path) -> CommandOutcome {
    let started = Instant::now();
    let (model, hash) = match load_model(model_path) {
        Ok(v) => v,
        Err(e) => return fail_input(e),
    };
    let rho0 = match load_rho0(rho0_path, model.dim()) {
        Ok(r) => r,
        Err(e) => return fail_input(e),
    };
    report_header("bvh", &hash, &format!("rho0={}", rho0_path.display()));
    for w in state_warnings(&rho0) {
        eprintln!("warning: {w}");
    }
    let spec = match spectral_decompose(&model.l0) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let opts = RelaxationOptions::for_spectrum(&spec);
    let rep = match check_relaxation(&model, &opts) {
        Ok(r) => r,
        Err(e) => return fail_input(e),
    };
    println!("relaxation-plain: {}", rep.plain_satisfied);
    println!("relaxation-enhanced: {}", rep.enhanced_satisfied);
    if !rep.enhanced_satisfied {
        eprintln!(
            "error: relaxation gate failed (max violation {})",
            fmt_f64(rep.max_violation)
        );
        return CommandOutcome {
            exit_code: if rep.plain_satisfied { EXIT_PLAIN_ONLY } else { EXIT_NOT_RELAXING },
        };
    }
    let series = match TclSeries::new(model.clone(), 3) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let bvh = match bvh_compute(&series, &rep, 1e-6) {
        Ok(b) => b,
        Err(e) => return fail_input(e),
    };
    println!(
        "vanishing-limit-residuals: K1={} I1={} K3={} I3={}",
        fmt_f64(bvh.residuals[0]),
        fmt_f64(bvh.residuals[1]),
        fmt_f64(bvh.residuals[2]),
        fmt_f64(bvh.residuals[3])
    );
    if !bvh.valid() {
        eprintln!("error: vanishing-limit residuals exceed 1e-6; the weak-coupling solution is not certified");
        return CommandOutcome { exit_code: EXIT_ASSERTION };
    }
    let renormed = match bvh.renorm_map.apply(&rho0) {
        Ok(r) => r,
        Err(e) => return fail_input(e),
    };
    let mut doc = JsonDoc::new();
    doc.field_str("model_hash", &hash)
        .field_matrix("k2_inf", bvh.k2_inf.matrix())
        .field_matrix("i2_inf", bvh.i2_inf.matrix())
        .field_matrix("renormalization_map", bvh.renorm_map.matrix())
        .field_raw(
            "vanishing_limit_residuals",
            &json_array(bvh.residuals.iter().map(|r| fmt_f64(*r)).collect()),
        )
        .field_matrix("renormalized_initial_state", &renormed);
    if let Err(e) = std::fs::write(out, doc.finish() + "\n") {
        return fail_input(format!("cannot write {}: {e}", out.display()));
    }
    report_footer(&[out], started);
    CommandOutcome { exit_code: EXIT_OK }
}

enum Method {
    Tcl(usize),
    Bvh,
    BvhLeading,
}

impl Method {
    fn label(&self) -> String {
        match self {
            Method::Tcl(n) => format!("tcl-{n}"),
            Method::Bvh => "bvh".into(),
            Method::BvhLeading => "bvh-leading".into(),
        }
    }
}

fn worker_count() -> usize {
    match std::env::var("TCL_NUM_THREADS") {
        Ok(v) => v.parse::<usize>().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

pub fn cmd_compare(
    model_path: &Path,
    rho0_path: &Path,
    orders: &str,
    tmax: f64,
    points: usize,
    out: &Path,
) -> CommandOutcome {
    let started = Instant::now();
    let (model, hash) = match load_model(model_path) {
        Ok(v) => v,
        Err(e) => return fail_input(e),
    };
    let rho0 = match load_rho0(rho0_path, model.dim()) {
        Ok(r) => r,
        Err(e) => return fail_input(e),
    };
    if !tmax.is_finite() || tmax <= 0.0 || points < 2 {
        return fail_input("compare needs tmax > 0 and points >= 2");
    }
    let mut order_list: Vec<usize> = Vec::new();
    for tok in orders.split(',') {
        match tok.trim().parse::<usize>() {
            Ok(n) if (1..=6).contains(&n) => order_list.push(n),
            _ => return fail_input(format!("bad order list '{orders}'")),
        }
    }
    report_header(
        "compare",
        &hash,
        &format!(
            "rho0={} orders={orders} tmax={tmax} points={points}",
            rho0_path.display()
        ),
    );
    for w in state_warnings(&rho0) {
        eprintln!("warning: {w}");
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| tmax * i as f64 / (points - 1) as f64)
        .collect();
    let spec = match spectral_decompose(&model.l0) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let exact = match propagate_exact_projected(&model, &spec, &rho0, &grid) {
        Ok(t) => t,
        Err(e) => return fail_input(e),
    };
    let max_order = order_list.iter().copied().max().unwrap_or(2).max(3);
    let series = match TclSeries::new(model.clone(), max_order) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };

    let mut methods: Vec<Method> = order_list.iter().map(|&n| Method::Tcl(n)).collect();
    methods.push(Method::Bvh);
    methods.push(Method::BvhLeading);

    // bvh inputs are shared by both weak-coupling methods
    let rep = check_relaxation(&model, &RelaxationOptions::for_spectrum(&spec)).ok();
    let bvh = rep
        .as_ref()
        .filter(|r| r.enhanced_satisfied)
        .and_then(|r| bvh_compute(&series, r, 1e-6).ok());

    let columns: Vec<(String, Result<Vec<f64>, String>)> = {
        let run_method = |m: &Method| -> Result<Vec<f64>, String> {
            match m {
                Method::Tcl(n) => {
                    let traj = propagate_tcl(
                        &series,
                        &rho0,
                        &grid,
                        &TclPropagationOptions {
                            order: *n,
                            ode_tol: 1e-10,
                            include_inhomogeneity: true,
                        },
                    )
                    .map_err(|e| e.to_string())?;
                    Ok(compare(&exact, &traj, &model.projector)
                        .map_err(|e| e.to_string())?
                        .errors)
                }
                Method::Bvh => {
                    let b = bvh.as_ref().ok_or("relaxation/vanishing-limit gate failed")?;
                    let mut errs = Vec::with_capacity(grid.len());
                    for (t, ex) in grid.iter().zip(exact.states.iter()) {
                        let s = bvh_solution(&model, b, &rho0, *t, false)
                            .map_err(|e| e.to_string())?;
                        errs.push(frobenius(&(&s - ex)));
                    }
                    Ok(errs)
                }
                Method::BvhLeading => {
                    let b = bvh.as_ref().ok_or("relaxation/vanishing-limit gate failed")?;
                    let mut errs = Vec::with_capacity(grid.len());
                    for (t, ex) in grid.iter().zip(exact.states.iter()) {
                        let s = bvh_solution_leading(&model, &b.k2_inf, &rho0, *t, 1e-9)
                            .map_err(|e| e.to_string())?;
                        errs.push(frobenius(&(&s - ex)));
                    }
                    Ok(errs)
                }
            }
        };
        let workers = worker_count().max(1);
        let mut out_cols: Vec<(String, Result<Vec<f64>, String>)> = Vec::new();
        for chunk in methods.chunks(workers) {
            let results: Vec<(String, Result<Vec<f64>, String>)> = std::thread::scope(|s| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|m| {
                        let label = m.label();
                        let h = s.spawn(|| run_method(m));
                        (label, h)
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|(label, h)| (label, h.join().expect("worker panicked")))
                    .collect()
            });
            out_cols.extend(results);
        }
        out_cols
    };

    let mut csv = String::from("time");
    for (label, _) in &columns {
        csv.push(',');
        csv.push_str(label);
    }
    csv.push('\n');
    for (i, t) in grid.iter().enumerate() {
        csv.push_str(&fmt_f64(*t));
        for (_, col) in &columns {
            csv.push(',');
            match col {
                Ok(v) => csv.push_str(&fmt_f64(v[i])),
                Err(_) => csv.push_str("nan"),
            }
        }
        csv.push('\n');
    }
    for (label, col) in &columns {
        if let Err(msg) = col {
            eprintln!("warning: method {label} unavailable: {msg}");
        }
    }
    if let Err(e) = std::fs::write(out, csv) {
        return fail_input(format!("cannot write {}: {e}", out.display()));
    }
    report_footer(&[out], started);
    CommandOutcome { exit_code: EXIT_OK }
}

struct Check {
    name: &'static str,
    residual: f64,
    tol: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.residual <= self.tol
    }
}

#[allow(clippy::too_many_lines)]
pub fn cmd_reproduce_example(
    out_dir: &Path,
    gamma: f64,
    g: f64,
    lambda: f64,
) -> CommandOutcome {
    let started = Instant::now();
    if gamma <= 0.0 || !gamma.is_finite() || !g.is_finite() || !lambda.is_finite() || lambda < 0.0 {
        return fail_input("reproduce-example needs gamma > 0, finite g, lambda >= 0");
    }
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail_input(format!("cannot create {}: {e}", out_dir.display()));
    }
    report_header(
        "reproduce-example",
        "builtin-three-level",
        &format!("gamma={gamma} g={g} lambda={lambda}"),
    );
    let mut checks: Vec<Check> = Vec::new();
    let model = model::three_level_model(gamma, g, lambda);
    let e = model::elementary(3);

    // spectrum multiplicities {0 x4, -gamma/2 x4, -gamma x1}
    let spec = match spectral_decompose(&model.l0) {
        Ok(s) => s,
        Err(err) => return fail_input(err),
    };
    let count = |target: f64| {
        spec.values
            .iter()
            .filter(|v| (*v - C64::new(target, 0.0)).norm() < 1e-8 * gamma.max(1.0))
            .count()
    };
    let mult_ok = count(0.0) == 4 && count(-gamma / 2.0) == 4 && count(-gamma) == 1;
    checks.push(Check {
        name: "free-spectrum-multiplicities-4-4-1",
        residual: if mult_ok { 0.0 } else { 1.0 },
        tol: 0.5,
    });

    // Lambda = P entrywise
    let lam_op = match limit_superoperator(&spec, 1e-9) {
        Ok(l) => l,
        Err(err) => return fail_input(err),
    };
    checks.push(Check {
        name: "limit-superoperator-equals-projector",
        residual: max_abs(&(lam_op.matrix() - model.projector.matrix())),
        tol: 1e-10,
    });

    // relaxation shortcut
    let rep = match check_relaxation(&model, &RelaxationOptions::for_spectrum(&spec)) {
        Ok(r) => r,
        Err(err) => return fail_input(err),
    };
    checks.push(Check {
        name: "relaxation-shortcut-holds",
        residual: if rep.shortcut_used && rep.enhanced_satisfied { 0.0 } else { 1.0 },
        tol: 0.5,
    });

    let series = match TclSeries::new(model.clone(), 3) {
        Ok(s) => s,
        Err(err) => return fail_input(err),
    };

    // K1(t) = 0
    let mut k1_max = 0.0_f64;
    for i in 0..20 {
        let t = 0.37 * i as f64;
        match series.k_n(1, t) {
            Ok(k1) => k1_max = k1_max.max(k1.norm_fro()),
            Err(err) => return fail_input(err),
        }
    }
    checks.push(Check { name: "first-order-generator-vanishes", residual: k1_max, tol: 1e-12 });

    // K2(t) law
    let p = model.projector.matrix();
    let diss = {
        let dm = Superoperator::sandwich(&e(0, 1), &e(1, 0)).unwrap().into_matrix()
            - (Superoperator::left_mult(&e(1, 1)).unwrap().into_matrix()
                + Superoperator::right_mult(&e(1, 1)).unwrap().into_matrix())
                * C64::new(0.5, 0.0);
        p.dot(&dm).dot(p)
    };
    let mut k2_err = 0.0_f64;
    for &t in &[0.0, 0.5, 1.0, 5.0, 50.0] {
        let k2 = match series.k_n(2, t) {
            Ok(k) => k,
            Err(err) => return fail_input(err),
        };
        let coeff = 4.0 * g * g / gamma * (1.0 - (-gamma * t / 2.0).exp());
        k2_err = k2_err.max(max_abs(&(k2.matrix() - &(&diss * C64::new(coeff, 0.0)))));
    }
    checks.push(Check { name: "second-order-generator-closed-form", residual: k2_err, tol: 1e-10 });

    // limits: K2(inf) law, I1/I2 vanish, K3/I3 vanish by horizon doubling
    let horizon = default_horizon(&spec);
    match generator_limits(&series, &rep, &[1, 2, 3], horizon, 1e-6) {
        Ok(limits) => {
            let k2_inf_golden = &diss * C64::new(4.0 * g * g / gamma, 0.0);
            checks.push(Check {
                name: "second-order-limit-closed-form",
                residual: max_abs(&(limits[&2].0.matrix() - &k2_inf_golden)),
                tol: 1e-10,
            });
            checks.push(Check {
                name: "first-order-inhomogeneity-limit-vanishes",
                residual: limits[&1].1.norm_fro(),
                tol: 1e-8,
            });
            checks.push(Check {
                name: "second-order-inhomogeneity-limit-vanishes",
                residual: limits[&2].1.norm_fro(),
                tol: 1e-8,
            });
            checks.push(Check {
                name: "third-order-limits-vanish",
                residual: limits[&3].0.norm_fro().max(limits[&3].1.norm_fro()),
                tol: 1e-6,
            });
        }
        Err(err) => return fail_input(err),
    }

    // renormalization map entries
    let renorm = match renormalization_map(&model, &spec, &lam_op) {
        Ok(r) => r,
        Err(err) => return fail_input(err),
    };
    let golden_r = {
        let idx = |i: usize, j: usize| i + 3 * j;
        let cc = C64::new(0.0, 2.0 * g / gamma) * lambda;
        let mut m: CMat = CMat::zeros((9, 9));
        m[(idx(0, 0), idx(0, 0))] = C64::new(1.0, 0.0);
        m[(idx(0, 0), idx(2, 2))] = C64::new(1.0, 0.0);
        m[(idx(0, 0), idx(1, 2))] = -cc;
        m[(idx(0, 0), idx(2, 1))] = cc;
        m[(idx(0, 1), idx(0, 1))] = C64::new(1.0, 0.0);
        m[(idx(0, 1), idx(0, 2))] = cc;
        m[(idx(1, 0), idx(1, 0))] = C64::new(1.0, 0.0);
        m[(idx(1, 0), idx(2, 0))] = -cc;
        m[(idx(1, 1), idx(1, 1))] = C64::new(1.0, 0.0);
        m[(idx(1, 1), idx(1, 2))] = cc;
        m[(idx(1, 1), idx(2, 1))] = -cc;
        m
    };
    checks.push(Check {
        name: "renormalization-map-entries",
        residual: max_abs(&(renorm.matrix() - &golden_r)),
        tol: 1e-10,
    });

    // dynamics checks need a nonzero coupling; with lambda = 0 the
    // remaining items are trivially satisfied and reported as skipped
    let mut skipped: Vec<&'static str> = Vec::new();
    if lambda > 0.0 {
        // order-2 population law for a consistent initial state
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 * 0.8).collect();
        match propagate_tcl(&series, &e(1, 1), &ts, &TclPropagationOptions::default()) {
            Ok(traj) => {
                let rate = 4.0 * g * g / gamma * lambda * lambda;
                let mut err = 0.0_f64;
                for (t, s) in ts.iter().zip(traj.states.iter()) {
                    let phase = t - 2.0 * (1.0 - (-gamma * t / 2.0).exp()) / gamma;
                    err = err.max((s[(1, 1)].re - (-rate * phase).exp()).abs());
                }
                checks.push(Check {
                    name: "order2-population-law",
                    residual: err,
                    tol: 1e-8,
                });
            }
            Err(err) => return fail_input(err),
        }

        // inconsistent initial state: renormalization matters on the
        // weak-coupling plateau
        let psi = {
            let a = 0.475f64.sqrt();
            let b = 0.05f64.sqrt();
            let mut v: CMat = CMat::zeros((3, 1));
            v[(0, 0)] = C64::new(a, 0.0);
            v[(1, 0)] = C64::new(b, 0.0);
            v[(2, 0)] = C64::new(0.0, a);
            let mut rho: CMat = CMat::zeros((3, 3));
            for i in 0..3 {
                for j in 0..3 {
                    rho[(i, j)] = v[(i, 0)] * v[(j, 0)].conj();
                }
            }
            rho
        };
        let study = match bvh_error_study(&series, &rep, &psi, 121) {
            Ok(s) => s,
            Err(err) => return fail_input(err),
        };
        let half_model = model::three_level_model(gamma, g, lambda / 2.0);
        let half_series = match TclSeries::new(half_model.clone(), 3) {
            Ok(s) => s,
            Err(err) => return fail_input(err),
        };
        let half_spec = spectral_decompose(&half_model.l0).unwrap();
        let half_rep =
            check_relaxation(&half_model, &RelaxationOptions::for_spectrum(&half_spec))
                .unwrap();
        let half_study = match bvh_error_study(&half_series, &half_rep, &psi, 121) {
            Ok(s) => s,
            Err(err) => return fail_input(err),
        };
        let scale_factor = study.plateau_with_renorm / half_study.plateau_with_renorm.max(1e-300);
        let penalty = study.plateau_without_renorm / study.plateau_with_renorm.max(1e-300);
        checks.push(Check {
            name: "weak-coupling-plateau-scale-factor-at-least-3",
            residual: 3.0 - scale_factor,
            tol: 0.0,
        });
        checks.push(Check {
            name: "renormalization-penalty-at-least-5x",
            residual: 5.0 - penalty,
            tol: 0.0,
        });
    } else {
        skipped.push("order2-population-law");
        skipped.push("weak-coupling-plateau-scale-factor-at-least-3");
        skipped.push("renormalization-penalty-at-least-5x");
    }

    // write the checklist
    let mut text = String::new();
    let mut all_ok = true;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        all_ok &= c.passed();
        text.push_str(&format!(
            "{status} {name} residual={res} tol={tol}\n",
            name = c.name,
            res = fmt_f64(c.residual),
            tol = fmt_f64(c.tol)
        ));
    }
    for s in &skipped {
        text.push_str(&format!("SKIP {s} (lambda = 0)\n"));
    }
    let checklist = out_dir.join("checklist.txt");
    if let Err(err) = std::fs::write(&checklist, &text) {
        return fail_input(format!("cannot write {}: {err}", checklist.display()));
    }
    print!("{text}");
    report_footer(&[&checklist], started);
    CommandOutcome { exit_code: if all_ok { EXIT_OK } else { EXIT_ASSERTION } }
}
