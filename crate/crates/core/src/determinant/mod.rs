//! Determinant of the shifted Laplacian through the Selberg zeta function,
//! the Hilbert-Schmidt norm of the resolvent, and their variations.

mod barnes;
mod gamma;
pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;
use crate::summation::{ComplexSum, NeumaierSum};
use crate::variation::{first_variation_logz, second_variation_logz, DirectionData};
use crate::zeta::{a_gamma_derivatives, b_gamma_derivatives, dlog_selberg_ds, log_selberg_zeta, ZetaEvalParams, ZetaValue};

pub use barnes::{
    log_barnes_g, log_barnes_g1p, log_barnes_gamma2, BarnesEvalParams, BarnesValue, DEFAULT_PRODUCT_TERMS, EULER_GAMMA,
    GLAISHER_LOG, TRUNCATION_WARN, ZETA_PRIME_MINUS_ONE,
};
pub use gamma::ln_gamma;

/// Width of the excluded neighbourhoods around poles of the closed forms.
pub const GUARD_BAND: f64 = 1e-6;
const QUAD_TOL: f64 = 1e-12;

/// E = -1/4 - (1/2) log 2 pi + 2 (1/12 - log A).
pub fn sarnak_constant(glaisher_log: f64) -> f64 {
    -0.25 - 0.5 * (2.0 * PI).ln() + 2.0 * (1.0 / 12.0 - glaisher_log)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub value: Complex64,
    pub log_z: ZetaValue,
    /// (2g - 2) [E - s(s-1) + 2 log Gamma_2(s) - log Gamma(s) + s log 2 pi].
    pub prefactor: Complex64,
    pub barnes_tail: f64,
}

/// The spectrum-independent factor in log det(Delta + s(s-1)) - log Z(s).
pub fn sarnak_prefactor(s: Complex64, genus: u32, barnes: &BarnesEvalParams) -> Result<(Complex64, f64)> {
    let g2 = log_barnes_gamma2(s, barnes)?;
    let inner = Complex64::new(sarnak_constant(barnes.glaisher_log), 0.0) - s * (s - 1.0) + g2.value * 2.0 - ln_gamma(s)?
        + s * (2.0 * PI).ln();
    let c = 2.0 * genus as f64 - 2.0;
    Ok((inner * c, 2.0 * c * g2.tail_estimate))
}

/// log det(Delta_0 + s(s-1)) for Re s > 1; the genus is the spectrum's.
pub fn log_det_laplacian(spectrum: &LengthSpectrum, params: &ZetaEvalParams, barnes: &BarnesEvalParams) -> Result<LogDet> {
    if spectrum.genus() < 2 {
        return Err(Error::Domain(format!("genus {} must be at least 2", spectrum.genus())));
    }
    let log_z = log_selberg_zeta(spectrum, params)?;
    let (prefactor, barnes_tail) = sarnak_prefactor(params.s(), spectrum.genus(), barnes)?;
    Ok(LogDet { value: log_z.value + prefactor, log_z, prefactor, barnes_tail })
}

fn guard_half_integer(alpha: f64) -> Result<()> {
    let point = (alpha - 0.5).round() + 0.5;
    if (alpha - point).abs() < GUARD_BAND {
        return Err(Error::GuardBand { value: alpha, point, band: GUARD_BAND });
    }
    Ok(())
}

fn guard_integer(s: f64) -> Result<()> {
    let point = s.round();
    if (s - point).abs() < GUARD_BAND {
        return Err(Error::GuardBand { value: s, point, band: GUARD_BAND });
    }
    Ok(())
}

/// Coefficient of the double-pole residue in the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidueForm {
    /// pi^2 / (2 alpha) sec^2(pi alpha).
    #[default]
    Corrected,
    /// pi^2 / alpha (1 + tan^2(pi alpha)), as displayed.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueIdentity {
    /// Quadrature of the integral over the real line.
    pub lhs: f64,
    /// Residue closed form.
    pub rhs: f64,
    pub quadrature_error: f64,
    pub sum_tail_bound: f64,
}

/// sum_{n >= 0} (n + 1/2) / (alpha^2 - (n + 1/2)^2)^2 with a midpoint-rule tail.
fn half_integer_sum(alpha: f64) -> (f64, f64) {
    let a2 = alpha * alpha;
    let n_max = 2000usize.max((20.0 * alpha).ceil() as usize);
    let mut acc = NeumaierSum::new();
    for n in 0..n_max {
        let x = n as f64 + 0.5;
        let d = a2 - x * x;
        acc.add(x / (d * d));
    }
    let n = n_max as f64;
    let d = n * n - a2;
    let fp = -(3.0 * n * n + a2) / (d * d * d);
    acc.add(1.0 / (2.0 * d));
    acc.add(fp / 24.0);
    (acc.value(), fp.abs() / 24.0)
}

/// Both sides of int_R r tanh(pi r) / (r^2 + alpha^2)^2 dr = residue sum.
pub fn tanh_integral_identity(alpha: f64) -> Result<ResidueIdentity> {
    tanh_integral_identity_form(alpha, ResidueForm::Corrected)
}

pub fn tanh_integral_identity_form(alpha: f64, form: ResidueForm) -> Result<ResidueIdentity> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
    }
    guard_half_integer(alpha)?;
    let a2 = alpha * alpha;
    // Even integrand; beyond r_max tanh(pi r) = 1 to far below double precision.
    let r_max = 8.0 + 4.0 * alpha;
    let q = quadrature::integrate(
        |r| {
            let d = r * r + a2;
            r * (PI * r).tanh() / (d * d)
        },
        0.0,
        r_max,
        QUAD_TOL,
    )?;
    let lhs = 2.0 * q.value + 1.0 / (r_max * r_max + a2);

    let sec2 = 1.0 + (PI * alpha).tan().powi(2);
    let pole = match form {
        ResidueForm::Corrected => PI * PI / (2.0 * alpha) * sec2,
        ResidueForm::AsPrinted => PI * PI / alpha * sec2,
    };
    let (sum, tail) = half_integer_sum(alpha);
    Ok(ResidueIdentity { lhs, rhs: pole - 2.0 * sum, quadrature_error: 2.0 * q.error, sum_tail_bound: 2.0 * tail })
}

/// sum_{n >= 1} n / (n^2 - s^2)^2 with an Euler-Maclaurin tail; returns (value, tail bound).
pub fn resolvent_n_sum(s: f64) -> (f64, f64) {
    let s2 = s * s;
    let n_max = 1000usize.max((10.0 * s.abs()).ceil() as usize);
    let mut acc = NeumaierSum::new();
    for n in 1..=n_max {
        let x = n as f64;
        let d = x * x - s2;
        acc.add(x / (d * d));
    }
    let n = n_max as f64;
    let d = n * n - s2;
    let f = n / (d * d);
    let fp = -(3.0 * n * n + s2) / (d * d * d);
    acc.add(1.0 / (2.0 * d));
    acc.add(-0.5 * f);
    acc.add(-fp / 12.0);
    (acc.value(), 0.2 / n.powi(6))
}

/// Which closed form of the identity contribution to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HsNormVariant {
    /// (g-1) [pi^2/(2 alpha) sec^2 + 1/(2 alpha s^2) - (2s/alpha) sum], equal to
    /// (g-1) times the tanh integral.
    #[default]
    Corrected,
    /// (g-1) pi^2/alpha sec^2 + (g-1)/(2 alpha s^2) - 2(g-1)s/alpha sum.
    UnhalvedResidue,
    /// (g-1) pi^2/alpha sec^2 + (g-1)/(4 alpha s^2) - (g-1)s/alpha sum.
    UnhalvedResidueHalfRemainder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsNorm {
    pub value: f64,
    pub identity_term: f64,
    /// L^2 log Z(s) with L = (2s - 1)^{-1} d/ds.
    pub l2_log_z: f64,
    pub k_tail_bound: f64,
}

/// L^2 f = f'' / (2s-1)^2 - 2 f' / (2s-1)^3.
pub fn apply_l2(d1: Complex64, d2: Complex64, s: Complex64) -> Complex64 {
    let w = s * 2.0 - 1.0;
    d2 / (w * w) - d1 * 2.0 / (w * w * w)
}

/// ||(Delta_0 + s(s-1))^{-1}||_HS^2 for real s > 1, s not an integer.
pub fn hs_norm_resolvent_sq(spectrum: &LengthSpectrum, params: &ZetaEvalParams) -> Result<HsNorm> {
    hs_norm_resolvent_sq_with(spectrum, params, HsNormVariant::Corrected)
}

pub fn hs_norm_resolvent_sq_with(
    spectrum: &LengthSpectrum,
    params: &ZetaEvalParams,
    variant: HsNormVariant,
) -> Result<HsNorm> {
    let s = params.s();
    if s.im != 0.0 {
        return Err(Error::Domain(format!("s = {s} must be real")));
    }
    let s = s.re;
    guard_integer(s)?;
    let alpha = s - 0.5;
    let g1 = spectrum.genus() as f64 - 1.0;
    if g1 < 1.0 {
        return Err(Error::Domain(format!("genus {} must be at least 2", spectrum.genus())));
    }
    let sec2 = 1.0 + (PI * alpha).tan().powi(2);
    let (nsum, tail) = resolvent_n_sum(s);
    let identity_term = match variant {
        HsNormVariant::Corrected => {
            g1 * (PI * PI / (2.0 * alpha) * sec2 + 1.0 / (2.0 * alpha * s * s) - 2.0 * s / alpha * nsum)
        }
        HsNormVariant::UnhalvedResidue => {
            g1 * PI * PI / alpha * sec2 + g1 / (2.0 * alpha * s * s) - 2.0 * g1 * s / alpha * nsum
        }
        HsNormVariant::UnhalvedResidueHalfRemainder => g1 * PI * PI / alpha * sec2 + g1 / (4.0 * alpha * s * s) - g1 * s / alpha * nsum,
    };
    let d1 = dlog_selberg_ds(spectrum, params, 1)?;
    let d2 = dlog_selberg_ds(spectrum, params, 2)?;
    let sc = Complex64::new(s, 0.0);
    let l2 = apply_l2(d1.value, d2.value, sc).re;
    let w = 2.0 * s - 1.0;
    let k_tail_bound = d2.k_tail_bound / (w * w) + 2.0 * d1.k_tail_bound / (w * w * w) + 2.0 * g1 * s / alpha * tail;
    Ok(HsNorm { value: identity_term - l2, identity_term, l2_log_z: l2, k_tail_bound })
}

/// Variations of log det(Delta_0 + s(s-1)); equal to those of log Z(s).
pub fn variation_det(spectrum: &LengthSpectrum, dir: &DirectionData, params: &ZetaEvalParams, order: u8) -> Result<Complex64> {
    match order {
        1 => first_variation_logz(spectrum, dir, params),
        2 => second_variation_logz(spectrum, dir, params).map(|v| v.second),
        _ => Err(Error::Domain(format!("variation order {order} must be 1 or 2"))),
    }
}

/// Variations of ||(Delta_0 + s(s-1))^{-1}||_HS^2: -L^2 applied to the
/// corresponding variation of log Z, differentiated analytically in s.
pub fn variation_hs_norm(spectrum: &LengthSpectrum, dir: &DirectionData, params: &ZetaEvalParams, order: u8) -> Result<Complex64> {
    if order != 1 && order != 2 {
        return Err(Error::Domain(format!("variation order {order} must be 1 or 2")));
    }
    let r = dir.resolve(spectrum)?;
    let s = params.s();
    let policy = params.k_policy;
    let items: Vec<(f64, f64, Complex64, f64)> = spectrum
        .entries()
        .iter()
        .zip(r.dl.iter().zip(&r.ddl))
        .filter(|(_, (dl, ddl))| dl.norm() != 0.0 || **ddl != 0.0)
        .map(|(e, (&dl, &ddl))| (e.multiplicity as f64, e.length, dl, ddl))
        .collect();
    let terms: Vec<(Complex64, Complex64)> = items
        .par_iter()
        .map(|&(_, l, dl, ddl)| -> Result<(Complex64, Complex64)> {
            let [a1, a2] = a_gamma_derivatives(l, s, policy)?;
            if order == 1 {
                let c = dl / l;
                return Ok((c * a1.value, c * a2.value));
            }
            let [b1, b2] = b_gamma_derivatives(l, s, policy)?;
            let dlog_sq = dl.norm_sqr() / (l * l);
            let ddlog = ddl / l - dlog_sq;
            Ok((a1.value * ddlog + (a1.value + b1.value) * dlog_sq, a2.value * ddlog + (a2.value + b2.value) * dlog_sq))
        })
        .collect::<Result<_>>()?;
    let mut d1 = ComplexSum::new();
    let mut d2 = ComplexSum::new();
    for (&(m, ..), (t1, t2)) in items.iter().zip(terms) {
        d1.add(t1 * m);
        d2.add(t2 * m);
    }
    Ok(-apply_l2(d1.value(), d2.value(), s))
}
