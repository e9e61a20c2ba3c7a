// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ground-truth propagation and cross-validation.
//!
//! The total generator is time independent, so the exact path is matrix
//! exponentials, not ODE stepping: in the interaction picture
//!
//! ```text
//!   rho(t) = e^{-L0 t} e^{(L0 + lambda L)(t - t0)} e^{L0 t0} rho(t0).
//! ```
//!
//! The adaptive integrator only enters for the TCL equation itself (time
//! dependent coefficients) and as an independent cross-check of the
//! exponentials. From the exact propagator the nonperturbative TCL pair
//! is extracted as
//!
//! ```text
//!   K(t) = (d/dt P U P) (P U P)^{(-1)},
//!   I(t) = d/dt (P U Q) - K(t) P U Q,
//! ```
//!
//! with the pseudoinverse taken on range(P) and zero on range(Q).

use crate::error::{CoreError, Result};
use crate::linalg::expm::expm_t;
use crate::linalg::{frobenius, qr::range_basis, trace, C64, CMat};
use crate::model::ModelSpec;
use crate::ode::{integrate_dense, OdeOptions};
use crate::superops::{
    devectorize, restricted_pseudoinverse, vectorize, FrequencyDecomposition, Spectrum,
    Superoperator,
};
use crate::tcl::TclSeries;

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    /// Projection of the exact solution (the only part that stays finite
    /// in the interaction picture at weak-coupling times).
    ExactProjected,
    Tcl(usize),
    Bvh,
    BvhLeading,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    pub provenance: Provenance,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<CMat>, provenance: Provenance) -> Result<Self> {
        if times.len() != states.len() {
            return Err(CoreError::Dimension("times/states length mismatch".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(CoreError::Validation("times must be strictly increasing".into()));
            }
        }
        Ok(Trajectory { times, states, provenance })
    }
}

/// Warnings for initial states that are not density matrices. Inhomogeneity
/// tests legitimately propagate non-states, so these never fail.
pub fn state_warnings(rho0: &CMat) -> Vec<String> {
    let mut out = Vec::new();
    if !crate::linalg::is_hermitian(rho0, 1e-10) {
        out.push("initial state is not Hermitian".to_string());
    }
    let tr = trace(rho0);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        out.push(format!("initial state has trace {tr} (expected 1)"));
    }
    out
}

const EXP_ARG_GUARD: f64 = 350.0;

/// Exact interaction-picture trajectory by matrix exponentials.
///
/// The backward factor e^{-L0 t} grows on the decaying eigendirections, so
/// this path is restricted to ||L0|| t below an overflow guard; projected
/// long-time trajectories go through [`propagate_exact_projected`].
pub fn propagate_exact(model: &ModelSpec, rho0: &CMat, t_grid: &[f64]) -> Result<Trajectory> {
    let l0 = model.l0.matrix();
    let gen = model.total_generator();
    let l0_norm = crate::linalg::one_norm(l0);
    let mut states = Vec::with_capacity(t_grid.len());
    let v0 = vectorize(rho0)?;
    let at_t0 = expm_t(l0, model.t0).dot(&v0);
    for &t in t_grid {
        if l0_norm * t.abs() > EXP_ARG_GUARD {
            return Err(CoreError::Validation(format!(
                "interaction picture overflows at t = {t}; use projected propagation"
            )));
        }
        let v = expm_t(l0, -t).dot(&expm_t(&gen, t - model.t0).dot(&at_t0));
        states.push(devectorize(&v, model.dim())?);
    }
    Trajectory::new(t_grid.to_vec(), states, Provenance::Exact)
}

/// Schroedinger-picture trajectory e^{(L0 + lambda L)(t - t0)} rho(t0).
pub fn propagate_schrodinger(model: &ModelSpec, rho0: &CMat, t_grid: &[f64]) -> Result<Trajectory> {
    let gen = model.total_generator();
    let v0 = vectorize(rho0)?;
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let v = expm_t(&gen, t - model.t0).dot(&v0);
        states.push(devectorize(&v, model.dim())?);
    }
    Trajectory::new(t_grid.to_vec(), states, Provenance::Exact)
}

/// P rho(t) for the exact dynamics, stable at weak-coupling times.
///
/// P e^{-L0 t} is assembled spectrally with the eigencolumns annihilated
/// by P removed, so the exponentially growing factors only multiply exact
/// zeros. Requires every surviving eigendirection to stay bounded over the
/// grid, which is precisely the relaxation mechanism; violations surface
/// as an overflow error rather than silent garbage.
pub fn propagate_exact_projected(
    model: &ModelSpec,
    spec: &Spectrum,
    rho0: &CMat,
    t_grid: &[f64],
) -> Result<Trajectory> {
    let n = model.dim() * model.dim();
    let pv = model.projector.matrix().dot(&spec.right_vectors);
    let col_norms: Vec<f64> = (0..n)
        .map(|j| pv.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let max_col = col_norms.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);
    let kept: Vec<usize> =
        (0..n).filter(|&j| col_norms[j] > 1e-12 * max_col).collect();
    let t_max = t_grid.iter().cloned().fold(0.0_f64, f64::max);
    for &j in &kept {
        if -spec.values[j].re * t_max > EXP_ARG_GUARD {
            return Err(CoreError::Validation(format!(
                "projector retains decaying eigendirection (lambda = {}); \
                 projected dynamics would overflow at t = {t_max} \
                 (relaxation conditions are violated)",
                spec.values[j]
            )));
        }
    }
    let gen = model.total_generator();
    let v0 = vectorize(rho0)?;
    let at_t0 = expm_t(model.l0.matrix(), model.t0).dot(&v0);
    let mut states = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let w = expm_t(&gen, t - model.t0).dot(&at_t0);
        // P e^{-L0 t} w = sum_{kept j} (P V)_j e^{-lambda_j t} (V^{-1} w)_j
        let coords = spec.left_vectors.dot(&w);
        let mut v = ndarray::Array1::<C64>::zeros(n);
        for &j in &kept {
            let c = (-spec.values[j] * t).exp() * coords[j];
            for r in 0..n {
                v[r] += pv[(r, j)] * c;
            }
        }
        states.push(devectorize(&v, model.dim())?);
    }
    Trajectory::new(t_grid.to_vec(), states, Provenance::ExactProjected)
}

/// The exact (nonperturbative) TCL pair on a time grid. Entries are `None`
/// at times where P U P fails the conditioning gate; those times are
/// reported in `singular_windows`.
pub struct ExactTclPair {
    pub times: Vec<f64>,
    pub k: Vec<Option<Superoperator>>,
    pub i: Vec<Option<Superoperator>>,
    pub singular_windows: Vec<(f64, f64)>,
}

pub fn extract_exact_tcl(
    model: &ModelSpec,
    fd: &FrequencyDecomposition,
    t_grid: &[f64],
    cond_max: f64,
) -> Result<ExactTclPair> {
    let d = model.dim();
    let p = model.projector.matrix();
    let q = model.complement().into_matrix();
    let l0 = model.l0.matrix();
    let gen = model.total_generator();
    let basis = range_basis(p, 1e-10);
    if basis.ncols() == 0 {
        return Err(CoreError::Validation("projector has empty range".into()));
    }
    let lam_c = C64::new(model.lambda, 0.0);
    let mut k_out = Vec::with_capacity(t_grid.len());
    let mut i_out = Vec::with_capacity(t_grid.len());
    let mut singular = Vec::new();
    for &t in t_grid {
        // U_{t0}^t in the interaction picture
        let u = expm_t(l0, -t)
            .dot(&expm_t(&gen, t - model.t0))
            .dot(&expm_t(l0, model.t0));
        let l_t = fd.interaction_picture(t);
        let dpu = l_t.matrix().dot(&u) * lam_c; // d/dt (U) premultiplied by lambda L(t)
        let pup = p.dot(&u).dot(p);
        let dpup = p.dot(&dpu).dot(p);
        match restricted_pseudoinverse(&pup, p, &basis, cond_max) {
            Ok((pinv, _cond)) => {
                let k = dpup.dot(&pinv);
                let puq = p.dot(&u).dot(&q);
                let i = p.dot(&dpu).dot(&q) - &k.dot(&puq);
                k_out.push(Some(Superoperator::from_matrix(d, k)?));
                i_out.push(Some(Superoperator::from_matrix(d, i)?));
            }
            Err(_) => {
                let cond_est = f64::INFINITY;
                singular.push((t, cond_est));
                k_out.push(None);
                i_out.push(None);
            }
        }
    }
    Ok(ExactTclPair { times: t_grid.to_vec(), k: k_out, i: i_out, singular_windows: singular })
}

#[derive(Debug, Clone)]
pub struct TclPropagationOptions {
    pub order: usize,
    pub ode_tol: f64,
    /// Drop the inhomogeneity (for ablation experiments).
    pub include_inhomogeneity: bool,
}

impl Default for TclPropagationOptions {
    fn default() -> Self {
        TclPropagationOptions { order: 2, ode_tol: 1e-10, include_inhomogeneity: true }
    }
}

/// Integrate the truncated TCL equation
/// x' = [sum_{n<=N} lambda^n K_n(t)] x + [sum_{n<=N} lambda^n I_n(t)] Q rho0,
/// x(t0) = P rho0, with dense output on the grid.
pub fn propagate_tcl(
    series: &TclSeries,
    rho0: &CMat,
    t_grid: &[f64],
    opts: &TclPropagationOptions,
) -> Result<Trajectory> {
    let model = series.model();
    let v0 = vectorize(rho0)?;
    let x0 = model.projector.matrix().dot(&v0);
    let q0 = model.complement().matrix().dot(&v0);
    let order = opts.order;

    // the integrator probes arbitrary times; coefficient evaluation errors
    // are deferred by freezing to zero and re-raised afterwards
    let mut rhs_error: Option<CoreError> = None;
    let sol = {
        let mut f = |t: f64, x: &crate::linalg::CVec| {
            let k = series.k_truncated(order, t);
            let i = if opts.include_inhomogeneity {
                series.i_truncated(order, t)
            } else {
                Ok(Superoperator::zero(model.dim()))
            };
            match (k, i) {
                (Ok(k), Ok(i)) => k.matrix().dot(x) + i.matrix().dot(&q0),
                (Err(e), _) | (_, Err(e)) => {
                    rhs_error.get_or_insert(e);
                    crate::linalg::CVec::zeros(x.len())
                }
            }
        };
        let ode_opts = OdeOptions {
            rel_tol: opts.ode_tol,
            abs_tol: opts.ode_tol * 1e-2,
            ..OdeOptions::default()
        };
        integrate_dense(&mut f, &x0, t_grid, &ode_opts)?
    };
    if let Some(e) = rhs_error {
        return Err(e);
    }
    let states = sol
        .iter()
        .map(|v| devectorize(v, model.dim()))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(t_grid.to_vec(), states, Provenance::Tcl(order))
}

/// Per-time and maximum Frobenius error of projected states.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub max_error_time: f64,
}

pub fn compare(a: &Trajectory, b: &Trajectory, projector: &Superoperator) -> Result<ErrorReport> {
    if a.times.len() != b.times.len()
        || a.times.iter().zip(&b.times).any(|(x, y)| x != y)
    {
        return Err(CoreError::Consistency("trajectories live on different grids".into()));
    }
    let mut errors = Vec::with_capacity(a.times.len());
    let mut max_error = 0.0_f64;
    let mut max_error_time = a.times.first().copied().unwrap_or(0.0);
    for ((t, sa), sb) in a.times.iter().zip(&a.states).zip(&b.states) {
        let pa = projector.apply(sa)?;
        let pb = projector.apply(sb)?;
        let e = frobenius(&(&pa - &pb));
        if e > max_error {
            max_error = e;
            max_error_time = *t;
        }
        errors.push(e);
    }
    Ok(ErrorReport { times: a.times.clone(), errors, max_error, max_error_time })
}
