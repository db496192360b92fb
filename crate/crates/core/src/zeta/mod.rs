//! Selberg, Ruelle and higher zeta functions over a length spectrum.
//!
//! A local factor is a series over k >= 0 of `w(k) * kernel(l (s + k))`.
//! Tails are bounded by a geometric majorant: for k > K the terms decay at
//! least like `ratio(w) * e^{-l}` per step.

pub mod kernel;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kernel::Kernel;

use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;
use crate::summation::{ComplexSum, NeumaierSum};

pub const DEFAULT_REL_TOL: f64 = 1e-16;
pub const DEFAULT_K_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KPolicy {
    /// Sum k = 0..=K.
    Fixed(usize),
    /// Stop once the tail bound falls below `rel_tol * |partial sum|`.
    Adaptive { rel_tol: f64, cap: usize },
}

impl Default for KPolicy {
    fn default() -> Self {
        KPolicy::Adaptive { rel_tol: DEFAULT_REL_TOL, cap: DEFAULT_K_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TailMode {
    #[default]
    None,
    /// Advisory estimate of the contribution of geodesics beyond the cutoff.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaEvalParams {
    s: Complex64,
    pub k_policy: KPolicy,
    pub tail_mode: TailMode,
}

impl ZetaEvalParams {
    pub fn new(s: Complex64) -> Result<Self> {
        check_s(s)?;
        Ok(Self { s, k_policy: KPolicy::default(), tail_mode: TailMode::None })
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(Complex64::new(s, 0.0))
    }

    pub fn with_k_policy(mut self, k_policy: KPolicy) -> Self {
        self.k_policy = k_policy;
        self
    }

    pub fn with_tail_mode(mut self, tail_mode: TailMode) -> Self {
        self.tail_mode = tail_mode;
        self
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZetaValue {
    pub value: Complex64,
    /// Rigorous bound on the omitted k-tail for the supplied lengths.
    pub k_tail_bound: f64,
    /// Heuristic, advisory; never added to `value`.
    pub geodesic_tail_estimate: f64,
    /// Set when binomial weights left exact integer range.
    pub approximate_binomials: bool,
}

impl ZetaValue {
    fn scaled(mut self, c: f64) -> Self {
        self.value *= c;
        self.k_tail_bound *= c.abs();
        self
    }
}

/// Weight multiplying the kernel in the k-series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    /// k
    K,
    /// k^2
    K2,
    /// (s + k)^j
    ShiftPow(u32),
    /// C(t + k - 1, k)
    Binom(u32),
}

/// Local weights accepted by [`dlog_ds_local`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalWeight {
    One,
    K,
    K2,
}

impl From<LocalWeight> for Weight {
    fn from(w: LocalWeight) -> Self {
        match w {
            LocalWeight::One => Weight::One,
            LocalWeight::K => Weight::K,
            LocalWeight::K2 => Weight::K2,
        }
    }
}

pub(crate) fn check_s(s: Complex64) -> Result<()> {
    if !(s.re > 1.0) || !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::Domain(format!("Re(s) = {} must exceed 1", s.re)));
    }
    Ok(())
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("length {l} must be positive")));
    }
    Ok(())
}

/// Incremental C(t + k - 1, k), exact while it fits in u128.
struct BinomialSeq {
    t: u64,
    k: u64,
    exact: Option<u128>,
    approx: f64,
    overflowed: bool,
}

impl BinomialSeq {
    fn new(t: u32) -> Self {
        Self { t: t as u64, k: 0, exact: Some(1), approx: 1.0, overflowed: false }
    }

    fn value(&self) -> f64 {
        match self.exact {
            Some(v) => v as f64,
            None => self.approx,
        }
    }

    fn next_value(&self) -> f64 {
        self.value() * (self.t + self.k) as f64 / (self.k + 1) as f64
    }

    fn advance(&mut self) {
        let num = (self.t + self.k) as u128;
        let den = (self.k + 1) as u128;
        self.approx = self.value() * num as f64 / den as f64;
        self.exact = match self.exact.and_then(|v| v.checked_mul(num)) {
            Some(p) => Some(p / den),
            None => {
                self.overflowed = true;
                None
            }
        };
        self.k += 1;
    }
}

/// Exact C(n, k) in u128, `None` on overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

/// Weight value at k.
fn weight_at(w: Weight, s: Complex64, k: usize, binom: &BinomialSeq) -> Complex64 {
    let kf = k as f64;
    match w {
        Weight::One => Complex64::new(1.0, 0.0),
        Weight::K => Complex64::new(kf, 0.0),
        Weight::K2 => Complex64::new(kf * kf, 0.0),
        Weight::ShiftPow(j) => (s + kf).powu(j),
        Weight::Binom(_) => Complex64::new(binom.value(), 0.0),
    }
}

/// Upper bound on |w(j+1) / w(j)| valid for all j >= k.
fn weight_ratio_bound(w: Weight, s: Complex64, k: usize) -> f64 {
    let kf = k as f64;
    match w {
        Weight::One => 1.0,
        Weight::K => (kf + 1.0) / kf.max(1.0),
        Weight::K2 => ((kf + 1.0) / kf.max(1.0)).powi(2),
        Weight::ShiftPow(j) => (1.0 + 1.0 / (s.re + kf)).powi(j as i32),
        Weight::Binom(0) => 0.0,
        Weight::Binom(t) => ((t as f64 + kf) / (kf + 1.0)).max(1.0),
    }
}

/// Bound on sum_{k >= k0} |w(k) kernel(l (s + k))|, given |w(k0)|.
fn tail_bound(kernel: Kernel, w: Weight, l: f64, s: Complex64, k0: usize, w_abs: f64) -> f64 {
    if w_abs == 0.0 {
        return 0.0;
    }
    let aq = (-l * (s.re + k0 as f64)).exp();
    let ratio = weight_ratio_bound(w, s, k0) * (-l).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    w_abs * kernel.majorant(aq) / (1.0 - ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    /// Number of k values summed.
    pub terms: usize,
    pub approximate_binomials: bool,
}

/// sum_k w(k) kernel(l (s + k)) under the given truncation policy.
pub fn kernel_series(l: f64, s: Complex64, kernel: Kernel, weight: Weight, policy: KPolicy) -> Result<SeriesValue> {
    check_l(l)?;
    check_s(s)?;
    let t = if let Weight::Binom(t) = weight { t } else { 0 };
    let mut binom = BinomialSeq::new(t);
    let mut acc = ComplexSum::new();
    let (last, rel_tol) = match policy {
        KPolicy::Fixed(k) => (k, None),
        KPolicy::Adaptive { rel_tol, cap } => (cap, Some(rel_tol)),
    };
    let mut k = 0usize;
    loop {
        let w = weight_at(weight, s, k, &binom);
        if w != Complex64::new(0.0, 0.0) {
            let x = (s + k as f64) * l;
            acc.add(w * kernel.eval(x));
        }
        let next_w = match weight {
            Weight::Binom(_) => binom.next_value(),
            _ => weight_at(weight, s, k + 1, &binom).norm(),
        };
        let bound = tail_bound(kernel, weight, l, s, k + 1, next_w);
        let done = k >= last
            || rel_tol.is_some_and(|r| bound <= r * acc.value().norm() || bound < f64::MIN_POSITIVE);
        if done {
            return Ok(SeriesValue {
                value: acc.value(),
                tail_bound: bound,
                terms: k + 1,
                approximate_binomials: binom.overflowed,
            });
        }
        if matches!(weight, Weight::Binom(_)) {
            binom.advance();
        }
        k += 1;
    }
}

fn local(l: f64, s: Complex64, kernel: Kernel, weight: Weight, policy: KPolicy, scale: f64) -> Result<ZetaValue> {
    let v = kernel_series(l, s, kernel, weight, policy)?;
    Ok(ZetaValue {
        value: v.value,
        k_tail_bound: v.tail_bound,
        geodesic_tail_estimate: 0.0,
        approximate_binomials: v.approximate_binomials,
    }
    .scaled(scale))
}

/// log Z_gamma(s) = sum_{k>=0} log(1 - e^{-l(s+k)}).
pub fn log_local_selberg(l: f64, s: Complex64, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K0, Weight::One, policy, 1.0)
}

/// log z_gamma(s) = -sum_{k>=1} k log(1 - e^{-l(s+k)}).
pub fn log_local_zeta(l: f64, s: Complex64, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K0, Weight::K, policy, -1.0)
}

/// log of the k^2-weighted local zeta, -sum_{k>=1} k^2 log(1 - e^{-l(s+k)}).
pub fn log_local_higher_zeta(l: f64, s: Complex64, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K0, Weight::K2, policy, -1.0)
}

/// sum_k C(t+k-1, k) log(1 - e^{-l(s+k)}).
pub fn log_local_hier(l: f64, s: Complex64, t: u32, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K0, Weight::Binom(t), policy, 1.0)
}

/// s-derivatives of sum_k w(k) log(1 - e^{-l(s+k)}).
///
/// Order 1: sum w l / (e^{l(s+k)} - 1). Order 2: -l^2 sum w e^{l(s+k)} / (e^{l(s+k)} - 1)^2.
pub fn dlog_ds_local(l: f64, s: Complex64, order: u8, weight: LocalWeight, policy: KPolicy) -> Result<ZetaValue> {
    match order {
        1 => local(l, s, Kernel::K1, weight.into(), policy, l),
        2 => local(l, s, Kernel::K2, weight.into(), policy, -l * l),
        _ => Err(Error::Domain(format!("derivative order {order} not supported"))),
    }
}

/// d/ds of the local hierarchy zeta, sum_k C(t+k-1, k) l / (e^{l(s+k)} - 1).
pub fn dlog_ds_local_hier(l: f64, s: Complex64, t: u32, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K1, Weight::Binom(t), policy, l)
}

/// A_gamma(s) = sum_k (s+k) l / (e^{(s+k) l} - 1).
pub fn a_gamma(l: f64, s: Complex64, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K1, Weight::ShiftPow(1), policy, l)
}

/// B_gamma(s) = -l^2 sum_k (s+k)^2 e^{(s+k) l} / (e^{(s+k) l} - 1)^2.
pub fn b_gamma(l: f64, s: Complex64, policy: KPolicy) -> Result<ZetaValue> {
    local(l, s, Kernel::K2, Weight::ShiftPow(2), policy, -l * l)
}

/// First and second s-derivatives of A_gamma.
pub fn a_gamma_derivatives(l: f64, s: Complex64, policy: KPolicy) -> Result<[ZetaValue; 2]> {
    // A' = sum [l K1 - (s+k) l^2 K2],  A'' = sum [-2 l^2 K2 + (s+k) l^3 K3]
    let k1 = local(l, s, Kernel::K1, Weight::One, policy, l)?;
    let k2s = local(l, s, Kernel::K2, Weight::ShiftPow(1), policy, -l * l)?;
    let k2 = local(l, s, Kernel::K2, Weight::One, policy, -2.0 * l * l)?;
    let k3s = local(l, s, Kernel::K3, Weight::ShiftPow(1), policy, l * l * l)?;
    Ok([combine(&[k1, k2s]), combine(&[k2, k3s])])
}

/// First and second s-derivatives of B_gamma.
pub fn b_gamma_derivatives(l: f64, s: Complex64, policy: KPolicy) -> Result<[ZetaValue; 2]> {
    // B' = -l^2 sum [2 (s+k) K2 - (s+k)^2 l K3]
    // B'' = -l^2 sum [2 K2 - 4 (s+k) l K3 + (s+k)^2 l^2 K4]
    let l2 = l * l;
    let d1 = [
        local(l, s, Kernel::K2, Weight::ShiftPow(1), policy, -2.0 * l2)?,
        local(l, s, Kernel::K3, Weight::ShiftPow(2), policy, l2 * l)?,
    ];
    let d2 = [
        local(l, s, Kernel::K2, Weight::One, policy, -2.0 * l2)?,
        local(l, s, Kernel::K3, Weight::ShiftPow(1), policy, 4.0 * l2 * l)?,
        local(l, s, Kernel::K4, Weight::ShiftPow(2), policy, -l2 * l2)?,
    ];
    Ok([combine(&d1), combine(&d2)])
}

fn combine(parts: &[ZetaValue]) -> ZetaValue {
    let value = parts.iter().map(|p| p.value).collect::<ComplexSum>().value();
    ZetaValue {
        value,
        k_tail_bound: parts.iter().map(|p| p.k_tail_bound).sum(),
        geodesic_tail_estimate: 0.0,
        approximate_binomials: parts.iter().any(|p| p.approximate_binomials),
    }
}

/// Multiplicity-weighted sum of per-length values in ascending length order.
///
/// Terms are computed in parallel and folded sequentially, so the result does
/// not depend on the thread count.
pub fn sum_over_spectrum<F>(spectrum: &LengthSpectrum, f: F) -> Result<ZetaValue>
where
    F: Fn(f64) -> Result<ZetaValue> + Sync,
{
    let terms: Vec<ZetaValue> = spectrum.entries().par_iter().map(|e| f(e.length)).collect::<Result<_>>()?;
    let mut value = ComplexSum::new();
    let mut bound = NeumaierSum::new();
    let mut approx = false;
    for (e, t) in spectrum.entries().iter().zip(&terms) {
        let m = e.multiplicity as f64;
        value.add(t.value * m);
        bound.add(t.k_tail_bound * m);
        approx |= t.approximate_binomials;
    }
    Ok(ZetaValue { value: value.value(), k_tail_bound: bound.value(), geodesic_tail_estimate: 0.0, approximate_binomials: approx })
}

/// Advisory estimate of sum over geodesics longer than the cutoff of e^{-Re(s) l},
/// assuming counts grow like kappa e^l with kappa fitted on the last unit window.
pub fn geodesic_tail_heuristic(spectrum: &LengthSpectrum, sigma: f64) -> f64 {
    if spectrum.is_empty() || sigma <= 1.0 {
        return 0.0;
    }
    let c = spectrum.cutoff();
    let lo = (c - 1.0).max(0.0);
    let window: u64 = spectrum.entries().iter().filter(|e| e.length > lo).map(|e| e.multiplicity).sum();
    let (count, from) = if window > 0 {
        (window, lo)
    } else {
        (spectrum.class_count(), spectrum.entries()[0].length.min(lo))
    };
    let kappa = count as f64 / (c.exp() - from.exp()).max(f64::MIN_POSITIVE);
    kappa * ((1.0 - sigma) * c).exp() / (sigma - 1.0)
}

fn with_tail(mut v: ZetaValue, spectrum: &LengthSpectrum, params: &ZetaEvalParams) -> ZetaValue {
    if params.tail_mode == TailMode::Heuristic {
        v.geodesic_tail_estimate = geodesic_tail_heuristic(spectrum, params.s.re);
    }
    v
}

/// log Z(s) = sum over primitive classes of log Z_gamma(s).
pub fn log_selberg_zeta(spectrum: &LengthSpectrum, params: &ZetaEvalParams) -> Result<ZetaValue> {
    let v = sum_over_spectrum(spectrum, |l| log_local_selberg(l, params.s, params.k_policy))?;
    Ok(with_tail(v, spectrum, params))
}

/// log R(s) = sum over primitive classes of log(1 - e^{-s l}).
pub fn log_ruelle(spectrum: &LengthSpectrum, s: Complex64) -> Result<ZetaValue> {
    check_s(s)?;
    sum_over_spectrum(spectrum, |l| {
        check_l(l)?;
        Ok(ZetaValue { value: Kernel::K0.eval(s * l), ..Default::default() })
    })
}

/// log z(s, t) = sum_gamma sum_k C(t+k-1, k) log(1 - e^{-l(s+k)}).
pub fn log_hier_zeta(spectrum: &LengthSpectrum, t: u32, params: &ZetaEvalParams) -> Result<ZetaValue> {
    let v = sum_over_spectrum(spectrum, |l| log_local_hier(l, params.s, t, params.k_policy))?;
    Ok(with_tail(v, spectrum, params))
}

/// d^order/ds^order log Z(s), order 1 or 2.
pub fn dlog_selberg_ds(spectrum: &LengthSpectrum, params: &ZetaEvalParams, order: u8) -> Result<ZetaValue> {
    let v = sum_over_spectrum(spectrum, |l| dlog_ds_local(l, params.s, order, LocalWeight::One, params.k_policy))?;
    Ok(with_tail(v, spectrum, params))
}
