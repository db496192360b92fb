//! First and second variations of log Z, log R and the higher zetas along a
//! Teichmuller direction, given per-geodesic length-variation data.

mod direction;
pub mod family;
pub mod fd;
mod hessian;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;
use crate::summation::{ComplexSum, NeumaierSum};
use crate::zeta::{a_gamma, b_gamma, dlog_ds_local, dlog_ds_local_hier, Kernel, LocalWeight, ZetaEvalParams};

pub use direction::{
    load_direction, save_direction, DirectionData, DirectionEntry, ResolvedDirection, ValidationConfig,
};
pub use family::{FamilyMember, SyntheticFamily};
pub use hessian::{hessian_report, Decomposition, HessianReport, Signature, TAU_KERNEL};

/// Threshold on sum over systoles of |dl|^2 separating the two leading-term branches.
pub const SYSTOLE_DL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Leading term from B on the systoles: -|dl0|^2 s^2 e^{-s l0} / (1 - e^{-l0}).
    SystoleB,
    /// Leading term from A on the systoles: ddlog l0 * s l0 e^{-s l0} / (1 - e^{-l0}).
    SystoleA,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominantTerm {
    pub branch: Branch,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationResult {
    pub first: Complex64,
    pub second: Complex64,
    pub dominant_term: Option<DominantTerm>,
    pub remainder_estimate: f64,
    pub k_tail_bound: f64,
}

/// Per-entry data (multiplicity, length, dl, ddl) with nonzero variation.
fn active(spectrum: &LengthSpectrum, dir: &ResolvedDirection) -> Vec<(f64, f64, Complex64, f64)> {
    spectrum
        .entries()
        .iter()
        .zip(dir.dl.iter().zip(&dir.ddl))
        .filter(|(_, (dl, ddl))| **dl != Complex64::new(0.0, 0.0) || **ddl != 0.0)
        .map(|(e, (&dl, &ddl))| (e.multiplicity as f64, e.length, dl, ddl))
        .collect()
}

/// Parallel per-entry evaluation folded in ascending length order.
fn fold<F>(items: &[(f64, f64, Complex64, f64)], f: F) -> Result<(Complex64, f64)>
where
    F: Fn(f64, Complex64, f64) -> Result<(Complex64, f64)> + Sync,
{
    let terms: Vec<(Complex64, f64)> = items.par_iter().map(|&(_, l, dl, ddl)| f(l, dl, ddl)).collect::<Result<_>>()?;
    let mut acc = ComplexSum::new();
    let mut bound = NeumaierSum::new();
    for (&(m, ..), (v, b)) in items.iter().zip(terms) {
        acc.add(v * m);
        bound.add(b * m);
    }
    Ok((acc.value(), bound.value()))
}

/// d log Z(s) along mu: sum (dl / l) A_gamma(s).
pub fn first_variation_logz(spectrum: &LengthSpectrum, dir: &DirectionData, params: &ZetaEvalParams) -> Result<Complex64> {
    let r = dir.resolve(spectrum)?;
    first_variation_resolved(spectrum, &r, params).map(|(v, _)| v)
}

fn first_variation_resolved(
    spectrum: &LengthSpectrum,
    dir: &ResolvedDirection,
    params: &ZetaEvalParams,
) -> Result<(Complex64, f64)> {
    let s = params.s();
    fold(&active(spectrum, dir), |l, dl, _| {
        let a = a_gamma(l, s, params.k_policy)?;
        Ok((dl / l * a.value, dl.norm() / l * a.k_tail_bound))
    })
}

/// Mixed second variation of log Z along mu:
/// sum [ddlog l * A + |dlog l|^2 (A + B)], with ddlog l = ddl/l - |dl|^2/l^2.
pub fn second_variation_logz(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    params: &ZetaEvalParams,
) -> Result<VariationResult> {
    let r = dir.resolve(spectrum)?;
    let (first, fb) = first_variation_resolved(spectrum, &r, params)?;
    let (second, sb) = second_variation_resolved(spectrum, &r, params)?;
    let (dominant_term, remainder_estimate) = if params.s().im == 0.0 && !spectrum.is_empty() {
        let (d, rem) = leading_term(spectrum, &r, params.s().re)?;
        (Some(d), rem)
    } else {
        (None, 0.0)
    };
    Ok(VariationResult { first, second, dominant_term, remainder_estimate, k_tail_bound: fb + sb })
}

pub(crate) fn second_variation_resolved(
    spectrum: &LengthSpectrum,
    dir: &ResolvedDirection,
    params: &ZetaEvalParams,
) -> Result<(Complex64, f64)> {
    let s = params.s();
    fold(&active(spectrum, dir), |l, dl, ddl| {
        let a = a_gamma(l, s, params.k_policy)?;
        let b = b_gamma(l, s, params.k_policy)?;
        let dlog_sq = dl.norm_sqr() / (l * l);
        let ddlog = ddl / l - dlog_sq;
        let v = a.value * ddlog + (a.value + b.value) * dlog_sq;
        Ok((v, ddlog.abs() * a.k_tail_bound + dlog_sq * (a.k_tail_bound + b.k_tail_bound)))
    })
}

/// Form of the Ruelle second variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuelleForm {
    /// ddl s / (e^{sl} - 1) - s^2 |dl|^2 e^{sl} / (e^{sl} - 1)^2.
    #[default]
    Derived,
    /// The displayed variant with ddl s / (1 - e^{-sl}); kept for comparison.
    AsPrinted,
}

/// Variations of log R(s); order 1 gives d, order 2 the mixed second variation.
pub fn variation_ruelle(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    s: Complex64,
    order: u8,
) -> Result<Complex64> {
    variation_ruelle_form(spectrum, dir, s, order, RuelleForm::Derived)
}

pub fn variation_ruelle_form(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    s: Complex64,
    order: u8,
    form: RuelleForm,
) -> Result<Complex64> {
    crate::zeta::check_s(s)?;
    let r = dir.resolve(spectrum)?;
    let items = active(spectrum, &r);
    match order {
        1 => fold(&items, |l, dl, _| Ok((dl * s * Kernel::K1.eval(s * l), 0.0))),
        2 => fold(&items, |l, dl, ddl| {
            let x = s * l;
            let a = match form {
                RuelleForm::Derived => Kernel::K1.eval(x),
                RuelleForm::AsPrinted => Kernel::K1.eval(x) + 1.0,
            };
            Ok((s * a * ddl - s * s * dl.norm_sqr() * Kernel::K2.eval(x), 0.0))
        }),
        _ => Err(Error::Domain(format!("variation order {order} not supported"))),
    }
    .map(|(v, _)| v)
}

/// d log of the k-weighted local zeta product along mu:
/// sum (dl/l) (s d/ds log z_gamma - d/ds log ztilde_gamma^{-1}).
pub fn variation_higher_zeta(spectrum: &LengthSpectrum, dir: &DirectionData, params: &ZetaEvalParams) -> Result<Complex64> {
    let r = dir.resolve(spectrum)?;
    let s = params.s();
    fold(&active(spectrum, &r), |l, dl, _| {
        // d/ds log z_gamma = -sum k l K1, d/ds log ztilde^{-1} = sum k^2 l K1
        let dz = dlog_ds_local(l, s, 1, LocalWeight::K, params.k_policy)?;
        let dzt = dlog_ds_local(l, s, 1, LocalWeight::K2, params.k_policy)?;
        let v = dl / l * (-(s * dz.value) - dzt.value);
        Ok((v, dl.norm() / l * (s.norm() * dz.k_tail_bound + dzt.k_tail_bound)))
    })
    .map(|(v, _)| v)
}

/// d log z(s, t) along mu for integer t >= 1:
/// sum (dl/l) (s d/ds log z_gamma(s,t) + t d/ds log z_gamma(s+1,t+1)),
/// which equals sum dl sum_k C(t+k-1,k) (s+k) / (e^{l(s+k)} - 1).
pub fn variation_hier_zeta(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    params: &ZetaEvalParams,
    t: u32,
) -> Result<Complex64> {
    if t == 0 {
        return Err(Error::Domain("hierarchy variation needs t >= 1".into()));
    }
    let r = dir.resolve(spectrum)?;
    let s = params.s();
    fold(&active(spectrum, &r), |l, dl, _| {
        let d0 = dlog_ds_local_hier(l, s, t, params.k_policy)?;
        let d1 = dlog_ds_local_hier(l, s + 1.0, t + 1, params.k_policy)?;
        let v = dl / l * (s * d0.value + d1.value * t as f64);
        Ok((v, dl.norm() / l * (s.norm() * d0.k_tail_bound + t as f64 * d1.k_tail_bound)))
    })
    .map(|(v, _)| v)
}

/// The printed combination s D(s,t) + sum_{j=1}^{t-1} D(s,t-j), kept for comparison.
pub fn variation_hier_zeta_as_printed(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    params: &ZetaEvalParams,
    t: u32,
) -> Result<Complex64> {
    let r = dir.resolve(spectrum)?;
    let s = params.s();
    fold(&active(spectrum, &r), |l, dl, _| {
        let mut acc = s * dlog_ds_local_hier(l, s, t, params.k_policy)?.value;
        for j in 1..t {
            acc += dlog_ds_local_hier(l, s, t - j, params.k_policy)?.value;
        }
        Ok((dl / l * acc, 0.0))
    })
    .map(|(v, _)| v)
}

fn leading_term(spectrum: &LengthSpectrum, dir: &ResolvedDirection, s: f64) -> Result<(DominantTerm, f64)> {
    let sys = spectrum.systoles()?;
    let l0 = sys.l0;
    let mut dl_sq = NeumaierSum::new();
    let mut ddlog = NeumaierSum::new();
    for &i in &sys.indices {
        let m = spectrum.entries()[i].multiplicity as f64;
        dl_sq.add(m * dir.dl[i].norm_sqr());
        ddlog.add(m * (dir.ddl[i] / l0 - dir.dl[i].norm_sqr() / (l0 * l0)));
    }
    let damp = (-s * l0).exp() / (-(-l0).exp_m1());
    let dominant = if dl_sq.value() > SYSTOLE_DL_TOL {
        DominantTerm { branch: Branch::SystoleB, value: -dl_sq.value() * s * s * damp }
    } else {
        DominantTerm { branch: Branch::SystoleA, value: ddlog.value() * s * l0 * damp }
    };
    let next = sys.indices.last().map(|&i| i + 1).unwrap_or(0);
    let remainder = match spectrum.entries().get(next) {
        Some(e1) => {
            let l1 = e1.length;
            let c: f64 = spectrum.entries()[next..]
                .iter()
                .zip(&dir.dl[next..])
                .zip(&dir.ddl[next..])
                .map(|((e, dl), ddl)| e.multiplicity as f64 * (dl.norm_sqr() + ddl.abs() * e.length) / (-(-e.length).exp_m1()))
                .sum();
            c * s * s * (-s * l1).exp()
        }
        None => 0.0,
    };
    Ok((dominant, remainder))
}

/// Leading large-s term of the second variation and a remainder estimate.
pub fn asymptotic_second_variation(
    spectrum: &LengthSpectrum,
    dir: &DirectionData,
    s: f64,
) -> Result<VariationResult> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let params = ZetaEvalParams::real(s)?;
    let mut out = second_variation_logz(spectrum, dir, &params)?;
    if out.dominant_term.is_none() {
        let r = dir.resolve(spectrum)?;
        let (d, rem) = leading_term(spectrum, &r, s)?;
        out.dominant_term = Some(d);
        out.remainder_estimate = rem;
    }
    Ok(out)
}
