// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Matrix shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Input failed a validation check (negative rate, non-Hermitian
    /// Hamiltonian, non-idempotent projector, ...).
    #[error("validation: {0}")]
    Validation(String),

    /// The free generator has no usable eigenbasis; the algebraic path is
    /// unavailable and callers should fall back to quadrature.
    #[error("free generator is not reliably diagonalizable: {0}")]
    NonDiagonalizable(String),

    /// e^{L0 t} does not converge as t -> infinity (purely imaginary
    /// eigenvalues keep oscillating).
    #[error("no long-time limit: {0}")]
    NoLimit(String),

    /// An iterative scheme exhausted its budget before reaching tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Adaptive step-size control collapsed.
    #[error("step size underflow during integration: {0}")]
    Stiffness(String),

    /// The projected propagator P U P is numerically singular on range(P)
    /// at a specific time; recorded per time point, not fatal for a sweep.
    #[error("projected propagator singular at t = {t} (cond ~ {cond:.3e})")]
    SingularWindow { t: f64, cond: f64 },

    /// A precondition linking several inputs failed.
    #[error("consistency: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
