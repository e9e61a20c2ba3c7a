// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

//! Perturbative assembly of the time-convolutionless generator.
//!
//! Building blocks are the time-ordered moments
//!
//! ```text
//!   M_k(t)  = int_{t0 <= tk <= ... <= t1 <= t} P L(t1) ... L(tk) P,
//!   Mt_k(t) = same with trailing Q,
//! ```
//!
//! plus their time derivatives. The order-n generator and inhomogeneity
//! are alternating sums over compositions of n:
//!
//! ```text
//!   K_n(t) = sum_q (-1)^q sum_{k0+...+kq = n} Mdot_{k0} M_{k1} ... M_{kq},
//!   I_n(t) = like K_n with the last factor replaced by its Q-terminated
//!            variant (the q = 0 term is Mtdot_n itself).
//! ```
//!
//! Two backends evaluate the moments: an algebraic one using the frequency
//! decomposition of the interaction (each moment becomes a finite sum of
//! scalar kernels h_k times operator products), and a nested-quadrature
//! one integrating the definition directly. They are developed
//! independently and cross-checked in the test suite.
//!
//! The algebraic backend works in the eigenbasis of the free generator:
//! a product P L_{w1} ... L_{wk} P expands into chains of matrix entries,
//! so the moment is assembled by summing over index chains
//! (i0, ..., ik) with scalar weight Lhat[i0,i1] ... Lhat[i(k-1),ik] and
//! kernel coefficient determined by the chain's frequency tuple. Chains
//! whose running weight falls below a noise floor are pruned; this both
//! bounds the tuple blowup and removes the eps-size products that would
//! otherwise be amplified by exponentially growing kernel coefficients
//! when the projector annihilates decaying eigendirections.

use crate::error::{CoreError, Result};
use crate::kernels::h_k_or_one;
use crate::linalg::{frobenius, C64, CMat};
use crate::model::ModelSpec;
use crate::superops::{
    frequency_decompose, spectral_decompose, FrequencyDecomposition, Spectrum, Superoperator,
};
use crate::linalg::expm::expm_t;
use ndarray::Array2;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

/// Hard ceiling on composition enumeration.
pub const MAX_COMPOSITION_ORDER: usize = 12;
/// Default maximum series order.
pub const DEFAULT_MAX_ORDER: usize = 6;
/// Relative floor below which an interim chain product is dropped.
pub const PRUNE_FLOOR: f64 = 1e-14;

/// Ordered tuple of positive integers with a fixed sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition(pub Vec<usize>);

/// All compositions of n in lexicographic order; count is 2^(n-1).
pub fn compositions(n: usize) -> Result<Vec<Composition>> {
    if n == 0 || n > MAX_COMPOSITION_ORDER {
        return Err(CoreError::Validation(format!(
            "composition order {n} outside 1..={MAX_COMPOSITION_ORDER}"
        )));
    }
    fn rec(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if n == 0 {
            out.push(Composition(prefix.clone()));
            return;
        }
        for first in 1..=n {
            prefix.push(first);
            rec(n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(1 << (n - 1));
    rec(n, &mut Vec::new(), &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBackend {
    Algebraic,
    Quadrature,
}

/// The four order-k moments evaluated at one time.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub order: usize,
    pub backend: MomentBackend,
    pub m: Superoperator,
    pub m_dot: Superoperator,
    pub m_tilde: Superoperator,
    pub m_tilde_dot: Superoperator,
}

/// Eigenbasis data shared by every algebraic-moment evaluation of a model.
pub struct MomentEngine {
    dim: usize,
    t0: f64,
    spec: Spectrum,
    fd: FrequencyDecomposition,
    /// V^{-1} L V
    lhat: CMat,
    /// P V and the two right factors V^{-1} P, V^{-1} Q
    pv: CMat,
    vinv_p: CMat,
    vinv_q: CMat,
    /// group id per eigen pair (usize::MAX where Lhat vanishes)
    gid: Vec<usize>,
    /// representative frequency per group
    group_freq: Vec<C64>,
    /// column norms of P V (left chain scale)
    left_scale: Vec<f64>,
    right_scale: Vec<f64>,
    lhat_max: f64,
}

/// Group the eigenvalue-difference frequencies of all pairs (i, j).
/// Differences within `tol` of zero snap to exactly zero. Returns the
/// representatives and a per-pair group id (row-major i * n + j).
pub(crate) fn group_pair_frequencies(
    values: &[C64],
    tol: f64,
) -> (Vec<C64>, Vec<usize>) {
    let n = values.len();
    let mut reps: Vec<C64> = Vec::new();
    let mut gid = vec![usize::MAX; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut w = values[i] - values[j];
            if w.norm() <= tol {
                w = C64::new(0.0, 0.0);
            }
            let g = match reps.iter().position(|r| (*r - w).norm() <= tol) {
                Some(g) => g,
                None => {
                    reps.push(w);
                    reps.len() - 1
                }
            };
            gid[i * n + j] = g;
        }
    }
    (reps, gid)
}

impl MomentEngine {
    pub fn new(model: &ModelSpec) -> Result<MomentEngine> {
        let spec = spectral_decompose(&model.l0)?;
        Self::with_spectrum(model, spec)
    }

    pub fn with_spectrum(model: &ModelSpec, spec: Spectrum) -> Result<MomentEngine> {
        let grouping_tol = crate::superops::default_grouping_tol(&spec);
        let fd = frequency_decompose(&model.l_int, &spec, grouping_tol)?;
        let n = model.dim() * model.dim();
        let lhat = spec.left_vectors.dot(model.l_int.matrix()).dot(&spec.right_vectors);
        let p = model.projector.matrix();
        let q_mat = model.complement().into_matrix();
        let pv = p.dot(&spec.right_vectors);
        let vinv_p = spec.left_vectors.dot(p);
        let vinv_q = spec.left_vectors.dot(&q_mat);
        let (group_freq, gid) = group_pair_frequencies(&spec.values, grouping_tol);
        let left_scale: Vec<f64> = (0..n)
            .map(|j| pv.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        let right_scale: Vec<f64> = (0..n)
            .map(|i| {
                let rp: f64 = vinv_p.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let rq: f64 = vinv_q.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                rp.max(rq)
            })
            .collect();
        let lhat_max = crate::linalg::max_abs(&lhat);
        Ok(MomentEngine {
            dim: model.dim(),
            t0: model.t0,
            spec,
            fd,
            lhat,
            pv,
            vinv_p,
            vinv_q,
            gid,
            group_freq,
            left_scale,
            right_scale,
            lhat_max,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spec
    }

    pub fn frequency_decomposition(&self) -> &FrequencyDecomposition {
        &self.fd
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Evaluate all four order-k moments at time t through the chain sum.
    pub fn moments(&self, k: usize, t: f64) -> Result<MomentSet> {
        if k == 0 {
            return Err(CoreError::Validation("moment order must be >= 1".into()));
        }
        let n = self.dim * self.dim;
        let dt = t - self.t0;
        if dt < 0.0 {
            return Err(CoreError::Validation("moment time before t0".into()));
        }
        // scalar chain tables: S[(i0, ik)] accumulates coeff * weight
        let mut s_plain: CMat = Array2::zeros((n, n));
        let mut s_dot: CMat = Array2::zeros((n, n));
        let left_max = self.left_scale.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);
        let right_max = self.right_scale.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);

        let mut coeff_cache: HashMap<Vec<usize>, (C64, C64)> = HashMap::new();
        let mut chain = vec![0usize; k + 1];
        let mut groups = vec![0usize; k];
        self.chain_rec(
            0,
            k,
            dt,
            C64::new(1.0, 0.0),
            1.0,
            left_max,
            right_max,
            &mut chain,
            &mut groups,
            &mut coeff_cache,
            &mut s_plain,
            &mut s_dot,
        );

        let build = |s: &CMat, right: &CMat| -> Superoperator {
            Superoperator::from_matrix(self.dim, self.pv.dot(s).dot(right)).expect("dims agree")
        };
        Ok(MomentSet {
            order: k,
            backend: MomentBackend::Algebraic,
            m: build(&s_plain, &self.vinv_p),
            m_tilde: build(&s_plain, &self.vinv_q),
            m_dot: build(&s_dot, &self.vinv_p),
            m_tilde_dot: build(&s_dot, &self.vinv_q),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn chain_rec(
        &self,
        pos: usize,
        k: usize,
        dt: f64,
        weight: C64,
        weight_scale: f64,
        left_max: f64,
        right_max: f64,
        chain: &mut Vec<usize>,
        groups: &mut Vec<usize>,
        coeff_cache: &mut HashMap<Vec<usize>, (C64, C64)>,
        s_plain: &mut CMat,
        s_dot: &mut CMat,
    ) {
        let n = self.dim * self.dim;
        if pos == 0 {
            for i0 in 0..n {
                let a = self.left_scale[i0];
                if a <= PRUNE_FLOOR * left_max {
                    continue;
                }
                chain[0] = i0;
                self.chain_rec(
                    1,
                    k,
                    dt,
                    C64::new(1.0, 0.0),
                    a,
                    left_max,
                    right_max,
                    chain,
                    groups,
                    coeff_cache,
                    s_plain,
                    s_dot,
                );
            }
            return;
        }
        let floor = PRUNE_FLOOR * left_max * self.lhat_max.powi(k as i32) * right_max;
        if pos > k {
            let ik = chain[k];
            let scale = weight_scale * self.right_scale[ik];
            if scale <= floor {
                return;
            }
            // caching pays off for low orders where tuples repeat heavily;
            // at k > 4 the key space can outgrow the chain count
            let cached = if k <= 4 { coeff_cache.get(groups as &Vec<usize>).copied() } else { None };
            let (c_plain, c_dot) = match cached {
                Some(c) => c,
                None => {
                    let oms: Vec<C64> = groups.iter().map(|&g| self.group_freq[g]).collect();
                    let sum_tail: C64 = oms.iter().skip(1).sum();
                    let sum_all: C64 = sum_tail + oms[0];
                    let t = self.t0 + dt;
                    let c_plain = (-self.t0 * sum_all).exp()
                        * h_k_or_one(dt, &oms).expect("dt >= 0");
                    let c_dot = (-t * oms[0]).exp()
                        * (-self.t0 * sum_tail).exp()
                        * h_k_or_one(dt, &oms[1..]).expect("dt >= 0");
                    if k <= 4 {
                        coeff_cache.insert(groups.clone(), (c_plain, c_dot));
                    }
                    (c_plain, c_dot)
                }
            };
            let i0 = chain[0];
            s_plain[(i0, ik)] += c_plain * weight;
            s_dot[(i0, ik)] += c_dot * weight;
            return;
        }
        let prev = chain[pos - 1];
        for i in 0..n {
            let e = self.lhat[(prev, i)];
            let mag = e.norm();
            if mag == 0.0 {
                continue;
            }
            let ws = weight_scale * mag;
            // remaining factors can add at most lhat_max^(k - pos) * right_max
            if ws * self.lhat_max.powi((k - pos) as i32) * right_max <= floor {
                continue;
            }
            chain[pos] = i;
            groups[pos - 1] = self.gid[prev * n + i];
            self.chain_rec(
                pos + 1,
                k,
                dt,
                weight * e,
                ws,
                left_max,
                right_max,
                chain,
                groups,
                coeff_cache,
                s_plain,
                s_dot,
            );
        }
    }
}

/// Algebraic moments (frequency path) for order k at time t.
pub fn moments_algebraic(engine: &MomentEngine, k: usize, t: f64) -> Result<MomentSet> {
    engine.moments(k, t)
}

/// Quadrature moments (definition path): nested composite Gauss-Legendre
/// over the time-ordered simplex, with panel doubling until the whole
/// moment stabilizes entrywise below `abs_tol`.
pub fn moments_quadrature(model: &ModelSpec, k: usize, t: f64, abs_tol: f64) -> Result<MomentSet> {
    if k == 0 || k > 3 {
        return Err(CoreError::Validation(
            "quadrature moments support 1 <= k <= 3 (cost guard)".into(),
        ));
    }
    if t < model.t0 {
        return Err(CoreError::Validation("moment time before t0".into()));
    }
    let mut cache: HashMap<u64, Arc<CMat>> = HashMap::new();
    let mut eval = |panels: usize| -> (CMat, CMat) {
        let w_k = nested_integral(model, k, t, panels, &mut cache);
        let w_km1 = if k == 1 {
            crate::linalg::identity(model.dim() * model.dim())
        } else {
            nested_integral(model, k - 1, t, panels, &mut cache)
        };
        (w_k, w_km1)
    };
    let (mut w_k, mut w_km1) = eval(1);
    let mut panels = 2usize;
    loop {
        let (w_k2, w_km12) = eval(panels);
        let diff = crate::linalg::max_abs(&(&w_k2 - &w_k)).max(crate::linalg::max_abs(&(&w_km12 - &w_km1)));
        w_k = w_k2;
        w_km1 = w_km12;
        if diff <= abs_tol {
            break;
        }
        panels *= 2;
        if panels > 8 {
            return Err(CoreError::Convergence(format!(
                "quadrature moments did not stabilize below {abs_tol:.1e} (last diff {diff:.1e})"
            )));
        }
    }
    let p = model.projector.matrix();
    let q = model.complement().into_matrix();
    let l_t = interaction_at(model, t, &mut cache);
    let d = model.dim();
    let mk = p.dot(&w_k);
    let mdotk = p.dot(l_t.as_ref()).dot(&w_km1);
    Ok(MomentSet {
        order: k,
        backend: MomentBackend::Quadrature,
        m: Superoperator::from_matrix(d, mk.dot(p))?,
        m_tilde: Superoperator::from_matrix(d, mk.dot(&q))?,
        m_dot: Superoperator::from_matrix(d, mdotk.dot(p))?,
        m_tilde_dot: Superoperator::from_matrix(d, mdotk.dot(&q))?,
    })
}

fn interaction_at(model: &ModelSpec, s: f64, cache: &mut HashMap<u64, Arc<CMat>>) -> Arc<CMat> {
    if let Some(hit) = cache.get(&s.to_bits()) {
        return hit.clone();
    }
    let fwd = expm_t(model.l0.matrix(), s);
    let bwd = expm_t(model.l0.matrix(), -s);
    let m = Arc::new(bwd.dot(model.l_int.matrix()).dot(&fwd));
    cache.insert(s.to_bits(), m.clone());
    m
}

const GL16_X: [f64; 16] = [
    -0.989_400_934_991_649_9,
    -0.944_575_023_073_232_6,
    -0.865_631_202_387_831_8,
    -0.755_404_408_355_003,
    -0.617_876_244_402_643_8,
    -0.458_016_777_657_227_37,
    -0.281_603_550_779_258_9,
    -0.095_012_509_837_637_44,
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_37,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 16] = [
    0.027_152_459_411_754_096,
    0.062_253_523_938_647_894,
    0.095_158_511_682_492_79,
    0.124_628_971_255_533_88,
    0.149_595_988_816_576_74,
    0.169_156_519_395_002_54,
    0.182_603_415_044_923_58,
    0.189_450_610_455_068_5,
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_58,
    0.169_156_519_395_002_54,
    0.149_595_988_816_576_74,
    0.124_628_971_255_533_88,
    0.095_158_511_682_492_79,
    0.062_253_523_938_647_894,
    0.027_152_459_411_754_096,
];

/// W_level(upper) = int_{t0}^{upper} L(s) W_{level-1}(s) ds, W_0 = I.
fn nested_integral(
    model: &ModelSpec,
    level: usize,
    upper: f64,
    panels: usize,
    cache: &mut HashMap<u64, Arc<CMat>>,
) -> CMat {
    let n = model.dim() * model.dim();
    let mut acc: CMat = Array2::zeros((n, n));
    let a = model.t0;
    if upper <= a {
        return acc;
    }
    let step = (upper - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let half = 0.5 * step;
        let mid = lo + half;
        for (&x, &w) in GL16_X.iter().zip(GL16_W.iter()) {
            let s = mid + half * x;
            let ls = interaction_at(model, s, cache);
            let inner = if level == 1 {
                ls.as_ref().clone()
            } else {
                ls.dot(&nested_integral(model, level - 1, s, panels, cache))
            };
            acc += &(&inner * C64::new(w * half, 0.0));
        }
    }
    acc
}

/// K_n(t) from moment sets of all orders 1..=n at a common time.
pub fn assemble_k_n(moments: &BTreeMap<usize, MomentSet>, n: usize) -> Result<Superoperator> {
    check_orders(moments, n)?;
    let dim = moments[&1].m.hilbert_dim();
    let mut out = Superoperator::zero(dim);
    for comp in compositions(n)? {
        let parts = &comp.0;
        let q = parts.len() - 1;
        let mut term = moments[&parts[0]].m_dot.matrix().clone();
        for kj in &parts[1..] {
            term = term.dot(moments[kj].m.matrix());
        }
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&Superoperator::from_matrix(dim, term * C64::new(sign, 0.0))?)?;
    }
    Ok(out)
}

/// I_n(t): every composition term ends in the Q-terminated moment.
pub fn assemble_i_n(moments: &BTreeMap<usize, MomentSet>, n: usize) -> Result<Superoperator> {
    check_orders(moments, n)?;
    let dim = moments[&1].m.hilbert_dim();
    let mut out = moments[&n].m_tilde_dot.clone();
    for comp in compositions(n)? {
        let parts = &comp.0;
        let q = parts.len() - 1;
        if q == 0 {
            continue; // the q = 0 term is Mtdot_n, added above
        }
        let mut term = moments[&parts[0]].m_dot.matrix().clone();
        for kj in &parts[1..parts.len() - 1] {
            term = term.dot(moments[kj].m.matrix());
        }
        term = term.dot(moments[&parts[parts.len() - 1]].m_tilde.matrix());
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&Superoperator::from_matrix(dim, term * C64::new(sign, 0.0))?)?;
    }
    Ok(out)
}

fn check_orders(moments: &BTreeMap<usize, MomentSet>, n: usize) -> Result<()> {
    if n == 0 {
        return Err(CoreError::Validation("order must be >= 1".into()));
    }
    for k in 1..=n {
        let ms = moments
            .get(&k)
            .ok_or_else(|| CoreError::Consistency(format!("missing moment order {k} for n={n}")))?;
        if ms.order != k {
            return Err(CoreError::Consistency(format!(
                "moment set keyed {k} reports order {}",
                ms.order
            )));
        }
    }
    Ok(())
}

/// The compact second-order expressions (t0 = 0):
///
/// ```text
///   K1 = P L(t) P,     K2 = P L(t) Q X(t) P,
///   I1 = P L(t) Q,     I2 = P L(t) Q X(t) Q,
/// ```
///
/// where X(t) = sum_w h_1(t; w) L_w resolves (1 - e^{-[L0,.] t})/[L0,.]
/// applied to L. On the commutant component the quotient means its series
/// limit t L_0, which is what makes these forms agree with the composition
/// sums identically, commutant part included. Operator products are formed
/// before the scalar coefficients are applied, so exponentially growing
/// coefficients only ever multiply products that genuinely survive the
/// projector sandwich.
pub fn second_order_closed_forms(
    engine: &MomentEngine,
    model: &ModelSpec,
    t: f64,
) -> Result<(Superoperator, Superoperator, Superoperator, Superoperator)> {
    if engine.t0() != 0.0 {
        return Err(CoreError::Consistency(
            "compact second-order forms are derived for t0 = 0".into(),
        ));
    }
    let d = model.dim();
    let n = d * d;
    let p = model.projector.matrix();
    let q = model.complement().into_matrix();
    let fd = engine.frequency_decomposition();
    let scale = frobenius(p).max(1.0)
        * fd.components.iter().map(|c| c.part.norm_fro()).fold(0.0_f64, f64::max).max(1e-300);

    let mut k1 = Array2::zeros((n, n));
    let mut i1 = Array2::zeros((n, n));
    let mut k2 = Array2::zeros((n, n));
    let mut i2 = Array2::zeros((n, n));
    for c1 in &fd.components {
        let pl = p.dot(c1.part.matrix());
        if frobenius(&pl) <= PRUNE_FLOOR * scale {
            continue;
        }
        let e1 = (-c1.frequency * t).exp();
        k1 += &(&pl.dot(p) * e1);
        i1 += &(&pl.dot(&q) * e1);
        let plq = pl.dot(&q);
        for c2 in &fd.components {
            let prod = plq.dot(c2.part.matrix());
            if frobenius(&prod) <= PRUNE_FLOOR * scale * c2.part.norm_fro().max(1.0) {
                continue;
            }
            let coeff = e1 * h_k_or_one(t, &[c2.frequency])?;
            k2 += &(&prod.dot(p) * coeff);
            i2 += &(&prod.dot(&q) * coeff);
        }
    }
    Ok((
        Superoperator::from_matrix(d, k1)?,
        Superoperator::from_matrix(d, k2)?,
        Superoperator::from_matrix(d, i1)?,
        Superoperator::from_matrix(d, i2)?,
    ))
}

type MomentKey = (usize, u64);

/// Per-order evaluators for the TCL series of one model, with moment
/// memoization keyed by exact time bits. Reads are concurrent; insertion
/// is serialized behind the write lock.
pub struct TclSeries {
    model: ModelSpec,
    engine: MomentEngine,
    max_order: usize,
    cache: RwLock<HashMap<MomentKey, Arc<MomentSet>>>,
}

impl TclSeries {
    pub fn new(model: ModelSpec, max_order: usize) -> Result<TclSeries> {
        if max_order == 0 || max_order > MAX_COMPOSITION_ORDER {
            return Err(CoreError::Validation(format!(
                "series order {max_order} outside 1..={MAX_COMPOSITION_ORDER}"
            )));
        }
        let engine = MomentEngine::new(&model)?;
        Ok(TclSeries { model, engine, max_order, cache: RwLock::new(HashMap::new()) })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn engine(&self) -> &MomentEngine {
        &self.engine
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn moment_set(&self, k: usize, t: f64) -> Result<Arc<MomentSet>> {
        let key = (k, t.to_bits());
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let ms = Arc::new(self.engine.moments(k, t)?);
        self.cache.write().expect("cache lock").insert(key, ms.clone());
        Ok(ms)
    }

    fn moment_map(&self, n: usize, t: f64) -> Result<BTreeMap<usize, MomentSet>> {
        let mut map = BTreeMap::new();
        for k in 1..=n {
            map.insert(k, self.moment_set(k, t)?.as_ref().clone());
        }
        Ok(map)
    }

    /// K_n(t).
    pub fn k_n(&self, n: usize, t: f64) -> Result<Superoperator> {
        self.check_order(n)?;
        assemble_k_n(&self.moment_map(n, t)?, n)
    }

    /// I_n(t).
    pub fn i_n(&self, n: usize, t: f64) -> Result<Superoperator> {
        self.check_order(n)?;
        assemble_i_n(&self.moment_map(n, t)?, n)
    }

    /// sum_{n <= N} lambda^n K_n(t).
    pub fn k_truncated(&self, order: usize, t: f64) -> Result<Superoperator> {
        self.check_order(order)?;
        let map = self.moment_map(order, t)?;
        let mut out = Superoperator::zero(self.model.dim());
        for n in 1..=order {
            let kn = assemble_k_n(&map, n)?;
            out = out.add(&kn.scale(C64::new(self.model.lambda.powi(n as i32), 0.0)))?;
        }
        Ok(out)
    }

    /// sum_{n <= N} lambda^n I_n(t).
    pub fn i_truncated(&self, order: usize, t: f64) -> Result<Superoperator> {
        self.check_order(order)?;
        let map = self.moment_map(order, t)?;
        let mut out = Superoperator::zero(self.model.dim());
        for n in 1..=order {
            let in_ = assemble_i_n(&map, n)?;
            out = out.add(&in_.scale(C64::new(self.model.lambda.powi(n as i32), 0.0)))?;
        }
        Ok(out)
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_order {
            return Err(CoreError::Validation(format!(
                "order {n} outside 1..={}",
                self.max_order
            )));
        }
        Ok(())
    }
}
