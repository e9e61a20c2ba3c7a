// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-convolutionless (TCL) master equations for a projected subsystem of
//! a finite-dimensional composite open quantum system.
//!
//! Starting from a free GKSL generator `L0`, an interaction generator `L`,
//! an idempotent projection superoperator `P` and a coupling `lambda`, the
//! crate derives the time-local equation
//!
//! ```text
//!   d/dt P rho(t) = K(t) P rho(t) + I(t) Q rho(t0),       Q = 1 - P,
//! ```
//!
//! for the interaction-picture state, order by order in `lambda`. The
//! per-order generator and inhomogeneity are evaluated two independent
//! ways: purely algebraically through the frequency decomposition of the
//! interaction (the fast path), and by nested quadrature of the defining
//! time-ordered integrals (the oracle path). Long-time limits, relaxation
//! conditions, and the weak-coupling (Bogolubov-van Hove) semigroup with
//! renormalized initial conditions are built on top, and everything can be
//! cross-checked against exact propagation of the full generator.
//!
//! ```
//! use tclq_core::model::three_level_model;
//! use tclq_core::tcl::TclSeries;
//!
//! // qutrit with a decaying level |2>, projected onto the {|0>, |1>} qubit
//! let series = TclSeries::new(three_level_model(1.0, 1.0, 0.1), 2)?;
//! let t = 3.0;
//! let k2 = series.k_n(2, t)?;
//! // the excited population decays at rate (4 g^2/gamma)(1 - e^{-gamma t/2})
//! let idx11 = 1 + 3;
//! let rate = -k2.matrix()[(idx11, idx11)].re;
//! assert!((rate - 4.0 * (1.0 - (-t / 2.0f64).exp())).abs() < 1e-12);
//! # Ok::<(), tclq_core::CoreError>(())
//! ```
//!
//! See Breuer & Petruccione, "The Theory of Open Quantum Systems" (2002),
//! ch. 9-10 for background on TCL projection techniques.

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod superops;
pub mod tcl;

pub use error::{CoreError, Result};
pub use linalg::{C64, CMat, CVec};
