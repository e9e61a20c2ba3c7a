// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Model construction helpers, including the built-in three-level example:
//! a qutrit whose level |2> decays into |0> at rate gamma (the "reservoir"
//! degree of freedom) while the interaction -i g [|2><1| + |1><2|, .]
//! exchanges excitation between |1> and |2>. The projection keeps the
//! qubit spanned by {|0>, |1>}, folding the |2> population into |0>; this
//! is the zero/one-excitation restriction of the Argyres-Kelley projector.

use crate::error::{CoreError, Result};
use crate::linalg::{C64, CMat};
use crate::superops::{
    commutator_superoperator, gksl_superoperator, projector_check, GkslSpec, Superoperator,
};
use ndarray::Array2;
use rand::Rng;

/// Elementary matrix factory: `elementary(d)(i, j)` is |i><j| in dimension d.
pub fn elementary(d: usize) -> impl Fn(usize, usize) -> CMat {
    move |i: usize, j: usize| {
        let mut m = CMat::zeros((d, d));
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }
}

/// Full problem statement: free generator, interaction, projector, coupling
/// and initial time.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub l0: Superoperator,
    pub l_int: Superoperator,
    pub projector: Superoperator,
    pub lambda: f64,
    pub t0: f64,
}

impl ModelSpec {
    pub fn new(
        l0: Superoperator,
        l_int: Superoperator,
        projector: Superoperator,
        lambda: f64,
        t0: f64,
    ) -> Result<Self> {
        let d = l0.hilbert_dim();
        if l_int.hilbert_dim() != d || projector.hilbert_dim() != d {
            return Err(CoreError::Dimension(
                "model parts live on different Hilbert spaces".into(),
            ));
        }
        if !projector_check(&projector, 1e-9) {
            return Err(CoreError::Validation("projector is not idempotent".into()));
        }
        if !lambda.is_finite() || !t0.is_finite() {
            return Err(CoreError::Validation("lambda and t0 must be finite".into()));
        }
        Ok(ModelSpec { l0, l_int, projector, lambda, t0 })
    }

    pub fn dim(&self) -> usize {
        self.l0.hilbert_dim()
    }

    /// Complementary projector Q = 1 - P, computed on demand.
    pub fn complement(&self) -> Superoperator {
        let n = self.dim() * self.dim();
        let q = crate::linalg::identity(n) - self.projector.matrix();
        Superoperator::from_matrix(self.dim(), q).expect("same dims")
    }

    /// Total Schroedinger-picture generator L0 + lambda L.
    pub fn total_generator(&self) -> CMat {
        self.l0.matrix() + &(self.l_int.matrix() * C64::new(self.lambda, 0.0))
    }
}

/// Free generator of the three-level example: one decay channel |0><2| at
/// rate gamma, no Hamiltonian.
pub fn three_level_l0(gamma: f64) -> Superoperator {
    let e = elementary(3);
    gksl_superoperator(&GkslSpec {
        hamiltonian: CMat::zeros((3, 3)),
        jump_terms: vec![(e(0, 2), gamma)],
    })
    .expect("static spec is valid")
}

/// Interaction of the three-level example: -i g [|2><1| + |1><2|, .].
pub fn three_level_interaction(g: f64) -> Superoperator {
    let e = elementary(3);
    let a = &e(2, 1) + &e(1, 2);
    commutator_superoperator(&a, C64::new(0.0, -g)).expect("square")
}

/// Projection keeping the {|0>, |1>} qubit and folding the |2> population
/// into |0>:
/// P rho = (rho_00 + rho_22)|0><0| + rho_01 |0><1| + rho_10 |1><0|
///         + rho_11 |1><1|.
pub fn three_level_projector() -> Superoperator {
    let d = 3;
    let idx = |i: usize, j: usize| i + d * j;
    let mut m = CMat::zeros((9, 9));
    m[(idx(0, 0), idx(0, 0))] = C64::new(1.0, 0.0);
    m[(idx(0, 0), idx(2, 2))] = C64::new(1.0, 0.0);
    m[(idx(0, 1), idx(0, 1))] = C64::new(1.0, 0.0);
    m[(idx(1, 0), idx(1, 0))] = C64::new(1.0, 0.0);
    m[(idx(1, 1), idx(1, 1))] = C64::new(1.0, 0.0);
    Superoperator::from_matrix(3, m).expect("9x9")
}

pub fn three_level_parts(gamma: f64, g: f64) -> (Superoperator, Superoperator, Superoperator) {
    (three_level_l0(gamma), three_level_interaction(g), three_level_projector())
}

/// The complete three-level model at coupling lambda, t0 = 0.
pub fn three_level_model(gamma: f64, g: f64, lambda: f64) -> ModelSpec {
    let (l0, l, p) = three_level_parts(gamma, g);
    ModelSpec::new(l0, l, p, lambda, 0.0).expect("built-in model is valid")
}

fn random_complex_matrix<R: Rng>(d: usize, rng: &mut R) -> CMat {
    Array2::from_shape_fn((d, d), |_| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let x = random_complex_matrix(d, rng);
    (&x + &crate::linalg::dagger(&x)) * C64::new(0.5, 0.0)
}

/// Random GKSL generator (one Hamiltonian, two jump channels), rescaled to
/// the given spectral-norm-ish magnitude. Deterministic for a fixed rng.
pub fn random_gksl<R: Rng>(d: usize, rng: &mut R, scale: f64) -> Superoperator {
    let spec = GkslSpec {
        hamiltonian: random_hermitian(d, rng),
        jump_terms: vec![
            (random_complex_matrix(d, rng), rng.random_range(0.2..0.8)),
            (random_complex_matrix(d, rng), rng.random_range(0.2..0.8)),
        ],
    };
    let l = gksl_superoperator(&spec).expect("rates positive");
    let norm = l.norm_fro().max(1e-12);
    l.scale(C64::new(scale * (d as f64) / norm, 0.0))
}

/// Random rank-r idempotent (generally non-orthogonal) projector on the
/// superoperator space of dimension d^2: P = Y (X Y)^{-1} X.
pub fn random_projector<R: Rng>(d: usize, rank: usize, rng: &mut R) -> Superoperator {
    let n = d * d;
    loop {
        let y = Array2::from_shape_fn((n, rank), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let x = Array2::from_shape_fn((rank, n), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let xy = x.dot(&y);
        if let Ok(inv) = crate::linalg::lu::inverse(&xy) {
            let p = y.dot(&inv).dot(&x);
            let sup = Superoperator::from_matrix(d, p).expect("n x n");
            if projector_check(&sup, 1e-9) {
                return sup;
            }
        }
    }
}

/// Random density matrix (positive, unit trace).
pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let x = random_complex_matrix(d, rng);
    let xx = x.dot(&crate::linalg::dagger(&x));
    let tr = crate::linalg::trace(&xx);
    xx * tr.inv()
}

/// Trace projector P rho = tr(rho) sigma. Its rows span the left kernel of
/// any trace-preserving generator, so P e^{-L0 t} = P holds for every GKSL
/// L0; good for relaxation tests, but rank 1 makes the projected dynamics
/// itself trivial (P U P = P for trace-preserving U).
pub fn trace_projector(sigma: &CMat) -> Result<Superoperator> {
    let d = sigma.nrows();
    let n = d * d;
    let sv = crate::superops::vectorize(sigma)?;
    let mut p = CMat::zeros((n, n));
    for k in 0..d {
        let col = k + d * k;
        for r in 0..n {
            p[(r, col)] = sv[r];
        }
    }
    Superoperator::from_matrix(d, p)
}

/// Two-channel free generator: level |2> decays into |0> at rate g0 and
/// into |1> at rate g1, with an optional diagonal Hamiltonian degenerate
/// on the qubit (diag(eps, eps, eps2)). The qubit block stays stationary.
pub fn two_channel_l0(g0: f64, g1: f64, eps: f64, eps2: f64) -> Superoperator {
    let e = elementary(3);
    let mut h = CMat::zeros((3, 3));
    h[(0, 0)] = C64::new(eps, 0.0);
    h[(1, 1)] = C64::new(eps, 0.0);
    h[(2, 2)] = C64::new(eps2, 0.0);
    gksl_superoperator(&GkslSpec {
        hamiltonian: h,
        jump_terms: vec![(e(0, 2), g0), (e(1, 2), g1)],
    })
    .expect("rates positive")
}

/// Projector folding the |2> population into the qubit populations with the
/// branching weights of [`two_channel_l0`]:
///
///   P rho = (rho00 + w0 rho22)|0><0| + rho01 |0><1| + rho10 |1><0|
///           + (rho11 + w1 rho22)|1><1|,   w_i = gamma_i / (gamma0 + gamma1).
///
/// Satisfies P L0 = 0 and e^{L0 t} P = P exactly.
pub fn branching_projector(g0: f64, g1: f64) -> Superoperator {
    let idx = |i: usize, j: usize| i + 3 * j;
    let mut p = CMat::zeros((9, 9));
    p[(idx(0, 0), idx(0, 0))] = C64::new(1.0, 0.0);
    p[(idx(0, 0), idx(2, 2))] = C64::new(g0 / (g0 + g1), 0.0);
    p[(idx(0, 1), idx(0, 1))] = C64::new(1.0, 0.0);
    p[(idx(1, 0), idx(1, 0))] = C64::new(1.0, 0.0);
    p[(idx(1, 1), idx(1, 1))] = C64::new(1.0, 0.0);
    p[(idx(1, 1), idx(2, 2))] = C64::new(g1 / (g0 + g1), 0.0);
    Superoperator::from_matrix(3, p).expect("9x9")
}

/// A randomized d = 3 model satisfying both relaxation shortcuts exactly
/// while keeping a rank-4 projected block with nontrivial dynamics:
/// [`two_channel_l0`] with random rates and detuning, a random GKSL
/// interaction, and the matching [`branching_projector`].
pub fn random_relaxing_model<R: Rng>(d: usize, rng: &mut R, lambda: f64) -> ModelSpec {
    assert_eq!(d, 3, "relaxing family is built on the three-level structure");
    let g0: f64 = rng.random_range(0.4..1.6);
    let g1: f64 = rng.random_range(0.4..1.6);
    let eps: f64 = rng.random_range(-1.0..1.0);
    let eps2: f64 = rng.random_range(-1.0..1.0);
    let l0 = two_channel_l0(g0, g1, eps, eps2);
    let l_int = random_gksl(3, rng, 1.0);
    let p = branching_projector(g0, g1);
    ModelSpec::new(l0, l_int, p, lambda, 0.0).expect("branching projector is idempotent")
}
