//! Barnes G and the double gamma function from their canonical product.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::summation::ComplexSum;
use crate::zeta::kernel::log1p;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;
/// zeta'(-1).
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;
/// log A = 1/12 - zeta'(-1), A the Glaisher-Kinkelin constant.
pub const GLAISHER_LOG: f64 = 1.0 / 12.0 - ZETA_PRIME_MINUS_ONE;

pub const DEFAULT_PRODUCT_TERMS: usize = 1000;
/// Tail estimates above this set the truncation warning.
pub const TRUNCATION_WARN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarnesEvalParams {
    /// Factors with k <= product_terms are multiplied out; the rest is summed
    /// from the asymptotic expansion.
    pub product_terms: usize,
    pub euler_gamma: f64,
    pub glaisher_log: f64,
}

impl Default for BarnesEvalParams {
    fn default() -> Self {
        Self { product_terms: DEFAULT_PRODUCT_TERMS, euler_gamma: EULER_GAMMA, glaisher_log: GLAISHER_LOG }
    }
}

impl BarnesEvalParams {
    pub fn with_product_terms(product_terms: usize) -> Self {
        Self { product_terms, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarnesValue {
    pub value: Complex64,
    /// Estimated error of the summed tail.
    pub tail_estimate: f64,
    pub truncation_warning: bool,
}

/// sum_{k >= n} k^{-m} for m >= 2 by Euler-Maclaurin.
fn hurwitz_tail(m: u32, n: f64) -> (f64, f64) {
    let m = m as f64;
    let p = n.powf(-m);
    let v = n * p / (m - 1.0) + 0.5 * p + m * p / (12.0 * n) - m * (m + 1.0) * (m + 2.0) * p / (720.0 * n.powi(3));
    let err = m * (m + 1.0) * (m + 2.0) * (m + 3.0) * (m + 4.0) * p / (30_240.0 * n.powi(5));
    (v + err, err)
}

/// k log(1 + z/k) - z + z^2 / (2k).
fn product_term(z: Complex64, k: f64) -> Complex64 {
    let w = z / k;
    if w.norm() < 0.1 {
        // k * sum_{j >= 3} (-1)^{j+1} w^j / j
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = w * w * w;
        let mut j = 3.0;
        let mut sign = 1.0;
        while p.norm() > 1e-18 * acc.norm().max(1e-300) {
            acc += p * (sign / j);
            p *= w;
            j += 1.0;
            sign = -sign;
        }
        acc * k
    } else {
        log1p(w) * k - z + z * z / (2.0 * k)
    }
}

fn check_pole(z: Complex64, what: &str) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("{what} vanishes at {}", z.re)));
    }
    Ok(())
}

/// log G(1 + z) = (z/2) log 2 pi - (z + (1 + gamma) z^2) / 2
///   + sum_k [k log(1 + z/k) - z + z^2/(2k)].
pub fn log_barnes_g1p(z: Complex64, params: &BarnesEvalParams) -> Result<BarnesValue> {
    check_pole(z + 1.0, "G")?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    let kmax = params.product_terms.max(1).max((20.0 * z.norm()).ceil() as usize);
    let mut acc = ComplexSum::new();
    acc.add(z * (0.5 * (2.0 * PI).ln()));
    acc.add(-(z + z * z * (1.0 + params.euler_gamma)) * 0.5);
    for k in 1..=kmax {
        acc.add(product_term(z, k as f64));
    }
    // sum_{k > K} sum_{j >= 3} (-1)^{j+1} z^j / j k^{1-j}
    let n = kmax as f64 + 1.0;
    let ratio = z.norm() / n;
    let mut p = z * z * z;
    let mut sign = 1.0;
    let mut tail_err = 0.0;
    for j in 3u32.. {
        let (h, e) = hurwitz_tail(j - 1, n);
        let term = p * (sign * h / j as f64);
        acc.add(term);
        tail_err += e * p.norm() / j as f64;
        if term.norm() < 1e-20 || j > 200 {
            tail_err += term.norm() * ratio / (1.0 - ratio);
            break;
        }
        p *= z;
        sign = -sign;
    }
    let truncation_warning = tail_err > TRUNCATION_WARN;
    if truncation_warning {
        warn!("Barnes G tail estimate {tail_err:e} at z = {z}");
    }
    Ok(BarnesValue { value: acc.value(), tail_estimate: tail_err, truncation_warning })
}

/// log G(z).
pub fn log_barnes_g(z: Complex64, params: &BarnesEvalParams) -> Result<BarnesValue> {
    log_barnes_g1p(z - 1.0, params)
}

/// log Gamma_2(s), with 1/Gamma_2(s + 1) = G(s + 1).
pub fn log_barnes_gamma2(s: Complex64, params: &BarnesEvalParams) -> Result<BarnesValue> {
    check_pole(s, "1/Gamma_2")?;
    let mut v = log_barnes_g(s, params)?;
    v.value = -v.value;
    Ok(v)
}
