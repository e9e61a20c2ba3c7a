// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Superoperator algebra on vectorized density matrices.
//!
//! Convention (fixed once, used everywhere): column stacking,
//! `vec(rho)[i + d*j] = rho[i, j]`, so a map rho -> A rho B has matrix
//! `B^T (x) A`. Under this convention a GKSL generator
//!
//! ```text
//!   L rho = -i[H, rho] + sum_k gamma_k (A_k rho A_k^dag
//!            - 1/2 {A_k^dag A_k, rho})
//! ```
//!
//! becomes a d^2 x d^2 matrix acting on vec(rho).

use crate::error::{CoreError, Result};
use crate::linalg::{
    self, dagger, eig::eig_full, frobenius, identity, kron, lu, C64, CMat, CVec,
};
use ndarray::Array2;

/// Default relative tolerance for spectral health checks.
pub const TOL_SPEC: f64 = 1e-9;
/// Default eigenbasis condition bound; beyond this the algebraic path is
/// refused and callers should use the quadrature path.
pub const COND_MAX: f64 = 1e8;
/// Hermiticity tolerance for GKSL inputs.
pub const TOL_HERM: f64 = 1e-10;

pub fn vectorize(rho: &CMat) -> Result<CVec> {
    if rho.nrows() != rho.ncols() {
        return Err(CoreError::Dimension(format!(
            "vectorize needs a square matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let d = rho.nrows();
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[i + d * j] = rho[(i, j)];
        }
    }
    Ok(v)
}

pub fn devectorize(v: &CVec, d: usize) -> Result<CMat> {
    if v.len() != d * d {
        return Err(CoreError::Dimension(format!(
            "devectorize: length {} != {}^2",
            v.len(),
            d
        )));
    }
    let mut rho = CMat::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = v[i + d * j];
        }
    }
    Ok(rho)
}

/// A linear map on d x d matrices stored as its d^2 x d^2 matrix.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, mat: CMat) -> Result<Self> {
        if mat.nrows() != dim * dim || mat.ncols() != dim * dim {
            return Err(CoreError::Dimension(format!(
                "superoperator for d={dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Superoperator { dim, mat })
    }

    pub fn zero(dim: usize) -> Self {
        Superoperator { dim, mat: CMat::zeros((dim * dim, dim * dim)) }
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator { dim, mat: identity(dim * dim) }
    }

    /// rho -> A rho
    pub fn left_mult(a: &CMat) -> Result<Self> {
        let d = square_dim(a)?;
        Ok(Superoperator { dim: d, mat: kron(&identity(d), a) })
    }

    /// rho -> rho B
    pub fn right_mult(b: &CMat) -> Result<Self> {
        let d = square_dim(b)?;
        Ok(Superoperator { dim: d, mat: kron(&b.t().to_owned(), &identity(d)) })
    }

    /// rho -> A rho B
    pub fn sandwich(a: &CMat, b: &CMat) -> Result<Self> {
        let d = square_dim(a)?;
        if square_dim(b)? != d {
            return Err(CoreError::Dimension("sandwich factors differ in size".into()));
        }
        Ok(Superoperator { dim: d, mat: kron(&b.t().to_owned(), a) })
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn apply_vec(&self, v: &CVec) -> CVec {
        self.mat.dot(v)
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let v = vectorize(rho)?;
        if v.len() != self.dim * self.dim {
            return Err(CoreError::Dimension("state dimension mismatch".into()));
        }
        devectorize(&self.mat.dot(&v), self.dim)
    }

    /// Composition: (self ∘ other) rho = self(other(rho)).
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(CoreError::Dimension("composing superoperators of different d".into()));
        }
        Ok(Superoperator { dim: self.dim, mat: self.mat.dot(&other.mat) })
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(CoreError::Dimension("adding superoperators of different d".into()));
        }
        Ok(Superoperator { dim: self.dim, mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, c: C64) -> Superoperator {
        Superoperator { dim: self.dim, mat: &self.mat * c }
    }

    pub fn norm_fro(&self) -> f64 {
        frobenius(&self.mat)
    }
}

fn square_dim(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(CoreError::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// GKSL (Lindblad) generator data: Hamiltonian plus jump channels.
#[derive(Debug, Clone)]
pub struct GkslSpec {
    pub hamiltonian: CMat,
    pub jump_terms: Vec<(CMat, f64)>,
}

impl GkslSpec {
    pub fn validate(&self) -> Result<()> {
        let d = square_dim(&self.hamiltonian)?;
        if !linalg::is_hermitian(&self.hamiltonian, TOL_HERM) {
            return Err(CoreError::Validation("Hamiltonian is not Hermitian".into()));
        }
        for (a, rate) in &self.jump_terms {
            if square_dim(a)? != d {
                return Err(CoreError::Dimension("jump operator dimension mismatch".into()));
            }
            if !rate.is_finite() || *rate < 0.0 {
                return Err(CoreError::Validation(format!("jump rate {rate} must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

/// Build the superoperator matrix of a GKSL generator.
pub fn gksl_superoperator(spec: &GkslSpec) -> Result<Superoperator> {
    spec.validate()?;
    let d = spec.dim();
    let i = C64::new(0.0, 1.0);
    let mut m = (Superoperator::left_mult(&spec.hamiltonian)?.into_matrix()
        - Superoperator::right_mult(&spec.hamiltonian)?.into_matrix())
        * (-i);
    for (a, rate) in &spec.jump_terms {
        let adag = dagger(a);
        let ada = adag.dot(a);
        let jump = Superoperator::sandwich(a, &adag)?.into_matrix();
        let anti = Superoperator::left_mult(&ada)?.into_matrix()
            + Superoperator::right_mult(&ada)?.into_matrix();
        m = m + (jump - anti * C64::new(0.5, 0.0)) * C64::new(*rate, 0.0);
    }
    Superoperator::from_matrix(d, m)
}

/// rho -> prefactor (A rho - rho A).
pub fn commutator_superoperator(a: &CMat, prefactor: C64) -> Result<Superoperator> {
    let d = square_dim(a)?;
    let m = (Superoperator::left_mult(a)?.into_matrix()
        - Superoperator::right_mult(a)?.into_matrix())
        * prefactor;
    Superoperator::from_matrix(d, m)
}

/// True iff ||P^2 - P||_F <= tol * max(1, ||P||_F).
pub fn projector_check(p: &Superoperator, tol: f64) -> bool {
    let p2 = p.matrix().dot(p.matrix());
    frobenius(&(&p2 - p.matrix())) <= tol * p.norm_fro().max(1.0)
}

/// Eigendata of a (diagonalizable) superoperator: L0 = V diag(values) V^{-1}.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub dim: usize,
    pub values: Vec<C64>,
    pub right_vectors: CMat,
    pub left_vectors: CMat,
    pub cond: f64,
}

impl Spectrum {
    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Smallest nonzero decay rate |Re lambda|, with "nonzero" judged at
    /// `tol` relative to the spectral radius.
    pub fn min_decay_rate(&self, tol: f64) -> Option<f64> {
        let cut = tol * self.max_abs_eigenvalue().max(1.0);
        self.values
            .iter()
            .filter(|v| v.re.abs() > cut)
            .map(|v| v.re.abs())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut lam = Array2::zeros((n, n));
        for i in 0..n {
            lam[(i, i)] = self.values[i];
        }
        self.right_vectors.dot(&lam).dot(&self.left_vectors)
    }
}

/// Diagonalize a superoperator, gating on reconstruction quality and
/// eigenbasis conditioning. GKSL spectra must sit in the closed left half
/// plane; a decisively positive real part is rejected as invalid input.
pub fn spectral_decompose(l0: &Superoperator) -> Result<Spectrum> {
    spectral_decompose_with(l0, COND_MAX, TOL_SPEC)
}

pub fn spectral_decompose_with(
    l0: &Superoperator,
    cond_max: f64,
    tol_spec: f64,
) -> Result<Spectrum> {
    let (e, vinv, cond) = eig_full(l0.matrix())?;
    if !cond.is_finite() || cond > cond_max {
        return Err(CoreError::NonDiagonalizable(format!(
            "eigenbasis condition {cond:.3e} exceeds {cond_max:.1e}; \
             use the quadrature path"
        )));
    }
    let spec = Spectrum {
        dim: l0.hilbert_dim(),
        values: e.values,
        right_vectors: e.vectors,
        left_vectors: vinv,
        cond,
    };
    let scale = frobenius(l0.matrix()).max(1e-300);
    let resid = frobenius(&(&spec.reconstruct() - l0.matrix())) / scale;
    if resid > tol_spec.max(1e-12 * cond) {
        return Err(CoreError::NonDiagonalizable(format!(
            "eigen reconstruction residual {resid:.3e} above tolerance"
        )));
    }
    let eig_scale = spec.max_abs_eigenvalue().max(1e-300);
    for v in &spec.values {
        if v.re > 1e3 * tol_spec * eig_scale {
            return Err(CoreError::Validation(format!(
                "eigenvalue {v} has positive real part; not a GKSL spectrum"
            )));
        }
    }
    Ok(spec)
}

/// One component of the interaction split along adjoint-action frequencies:
/// [L0, L_w] = w L_w, so that e^{-[L0, .] t} L = sum_w e^{-w t} L_w.
#[derive(Debug, Clone)]
pub struct FrequencyComponent {
    pub frequency: C64,
    pub part: Superoperator,
}

#[derive(Debug, Clone)]
pub struct FrequencyDecomposition {
    pub dim: usize,
    pub components: Vec<FrequencyComponent>,
    pub grouping_tolerance: f64,
}

impl FrequencyDecomposition {
    /// Sum of all components; equals the original interaction up to the
    /// dropped-noise budget.
    pub fn rebuild(&self) -> Superoperator {
        let mut m = CMat::zeros((self.dim * self.dim, self.dim * self.dim));
        for c in &self.components {
            m += c.part.matrix();
        }
        Superoperator { dim: self.dim, mat: m }
    }

    /// e^{-[L0, .] t} L = sum_w e^{-w t} L_w. Grows exponentially whenever
    /// a component has Re w < 0; that growth is genuine.
    pub fn interaction_picture(&self, t: f64) -> Superoperator {
        let mut m = CMat::zeros((self.dim * self.dim, self.dim * self.dim));
        for c in &self.components {
            m += &(c.part.matrix() * (-c.frequency * t).exp());
        }
        Superoperator { dim: self.dim, mat: m }
    }

    /// The zero-frequency component (commutant part), if present.
    pub fn zero_component(&self) -> Option<&FrequencyComponent> {
        self.components.iter().find(|c| c.frequency == C64::new(0.0, 0.0))
    }
}

/// Split L into adjoint-action eigencomponents of [L0, .].
///
/// In the eigenbasis of L0, entry (i, j) of V^{-1} L V evolves with
/// frequency lambda_i - lambda_j; entries whose frequencies agree within
/// `grouping_tol` are pooled into one component. Frequencies within
/// `grouping_tol` of zero are snapped to exactly zero. The zero-frequency
/// component is completed as L - sum_{w != 0} L_w so the decomposition
/// resums to L exactly; components below the noise floor are dropped.
pub fn frequency_decompose(
    l: &Superoperator,
    spec: &Spectrum,
    grouping_tol: f64,
) -> Result<FrequencyDecomposition> {
    let n = l.matrix().nrows();
    if spec.values.len() != n {
        return Err(CoreError::Dimension("spectrum does not match superoperator".into()));
    }
    let lhat = spec.left_vectors.dot(l.matrix()).dot(&spec.right_vectors);

    // group the n^2 pair frequencies
    let mut reps: Vec<C64> = Vec::new();
    let mut masks: Vec<CMat> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if lhat[(i, j)].norm() == 0.0 {
                continue;
            }
            let mut w = spec.values[i] - spec.values[j];
            if w.norm() <= grouping_tol {
                w = C64::new(0.0, 0.0);
            }
            let gid = match reps.iter().position(|r| (*r - w).norm() <= grouping_tol) {
                Some(g) => g,
                None => {
                    reps.push(w);
                    masks.push(CMat::zeros((n, n)));
                    reps.len() - 1
                }
            };
            masks[gid][(i, j)] = lhat[(i, j)];
        }
    }

    let noise_floor = 1e-13 * frobenius(l.matrix()).max(1e-300);
    let mut components: Vec<FrequencyComponent> = Vec::new();
    let mut sum_nonzero = CMat::zeros((n, n));
    let mut has_zero_group = false;
    for (w, mask) in reps.iter().zip(masks.iter()) {
        if w.norm() == 0.0 {
            has_zero_group = true;
            continue;
        }
        let part = spec.right_vectors.dot(mask).dot(&spec.left_vectors);
        if frobenius(&part) <= noise_floor {
            continue;
        }
        sum_nonzero += &part;
        components.push(FrequencyComponent {
            frequency: *w,
            part: Superoperator { dim: l.hilbert_dim(), mat: part },
        });
    }
    // complete the commutant part exactly from the remainder
    let zero_part = l.matrix() - &sum_nonzero;
    if has_zero_group && frobenius(&zero_part) > noise_floor {
        components.push(FrequencyComponent {
            frequency: C64::new(0.0, 0.0),
            part: Superoperator { dim: l.hilbert_dim(), mat: zero_part },
        });
    }
    // deterministic order: by (Re w, Im w)
    components.sort_by(|a, b| {
        a.frequency
            .re
            .partial_cmp(&b.frequency.re)
            .unwrap()
            .then(a.frequency.im.partial_cmp(&b.frequency.im).unwrap())
    });
    Ok(FrequencyDecomposition {
        dim: l.hilbert_dim(),
        components,
        grouping_tolerance: grouping_tol,
    })
}

/// Default grouping tolerance: 1e-9 relative to the spectral radius.
pub fn default_grouping_tol(spec: &Spectrum) -> f64 {
    1e-9 * spec.max_abs_eigenvalue().max(1.0)
}

/// [L0, .]^{(-1)} L = sum_{w != 0} w^{-1} L_w; the commutant component is
/// annihilated. Any two valid pseudoinverse choices differ only inside
/// ker [L0, .], which never contributes to (1 - e^{-[L0,.] t}) products.
pub fn ad_pseudoinverse_apply(fd: &FrequencyDecomposition) -> Superoperator {
    let n = fd.dim * fd.dim;
    let mut m = CMat::zeros((n, n));
    for c in &fd.components {
        if c.frequency.norm() > fd.grouping_tolerance {
            m += &(c.part.matrix() * c.frequency.inv());
        }
    }
    Superoperator { dim: fd.dim, mat: m }
}

/// Lambda = lim_{t->inf} e^{L0 t}: the spectral projector onto the
/// eigenvalues with |lambda| <= tol. Fails when some eigenvalue is purely
/// oscillatory (|Re| <= tol but |Im| > tol), because then no limit exists.
pub fn limit_superoperator(spec: &Spectrum, tol: f64) -> Result<Superoperator> {
    let scale = spec.max_abs_eigenvalue().max(1.0);
    let cut = tol * scale;
    for v in &spec.values {
        if v.re > cut {
            return Err(CoreError::NoLimit(format!(
                "eigenvalue {v} has positive real part"
            )));
        }
        if v.re.abs() <= cut && v.im.abs() > cut {
            return Err(CoreError::NoLimit(format!(
                "eigenvalue {v} is purely oscillatory; e^(L0 t) has no limit"
            )));
        }
    }
    let n = spec.values.len();
    let mut mask = CMat::zeros((n, n));
    for (i, v) in spec.values.iter().enumerate() {
        if v.norm() <= cut {
            mask[(i, i)] = C64::new(1.0, 0.0);
        }
    }
    let m = spec.right_vectors.dot(&mask).dot(&spec.left_vectors);
    Ok(Superoperator { dim: spec.dim, mat: m })
}

/// Spectral pseudoinverse of L0: inverse on the image (|lambda| > tol),
/// zero on the kernel eigenspace.
pub fn spectral_pseudoinverse(spec: &Spectrum, tol: f64) -> Superoperator {
    let cut = tol * spec.max_abs_eigenvalue().max(1.0);
    let n = spec.values.len();
    let mut mask = CMat::zeros((n, n));
    for (i, v) in spec.values.iter().enumerate() {
        if v.norm() > cut {
            mask[(i, i)] = v.inv();
        }
    }
    let m = spec.right_vectors.dot(&mask).dot(&spec.left_vectors);
    Superoperator { dim: spec.dim, mat: m }
}

/// Pseudoinverse of A restricted to the range of the projector `p`:
/// returns X with X A = P, X Q = Q X = 0 (Q = 1 - P). `basis` must hold an
/// orthonormal basis of range(P) (see [`crate::linalg::qr::range_basis`]).
pub fn restricted_pseudoinverse(
    a: &CMat,
    p: &CMat,
    basis: &CMat,
    cond_max: f64,
) -> Result<(CMat, f64)> {
    let ar = dagger(basis).dot(a).dot(basis);
    let lu = lu::Lu::new(&ar)?;
    if lu.is_singular() {
        return Err(CoreError::Validation(
            "projected operator is singular on range(P)".into(),
        ));
    }
    let ar_inv = lu.inverse()?;
    let cond = linalg::one_norm(&ar) * linalg::one_norm(&ar_inv);
    if !cond.is_finite() || cond > cond_max {
        return Err(CoreError::Validation(format!(
            "restricted inverse condition {cond:.3e} exceeds {cond_max:.1e}"
        )));
    }
    Ok((basis.dot(&ar_inv).dot(&dagger(basis)).dot(p), cond))
}
