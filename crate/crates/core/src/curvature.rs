//! Ricci curvature of the Hodge bundles through the second variation of log Z(m).

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;
use crate::variation::{second_variation_logz, DirectionData, SYSTOLE_DL_TOL};
use crate::zeta::ZetaEvalParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciPoint {
    pub m: u32,
    pub ricci: f64,
    /// (6m(m-1) + 1) / (12 pi) ||mu||_WP^2.
    pub leading: f64,
    pub remainder: f64,
}

/// 6m(m-1) + 1.
pub fn ricci_coefficient(m: u32) -> u64 {
    let m = m as u64;
    6 * m * (m - 1) + 1
}

/// Ric^(m)(mu, mu) = -ddbar log Z(m) + (6m(m-1)+1)/(12 pi) ||mu||^2.
pub fn ricci_from_variation(spectrum: &LengthSpectrum, dir: &DirectionData, m: u32) -> Result<RicciPoint> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be at least 2")));
    }
    let params = ZetaEvalParams::real(m as f64)?;
    let second = second_variation_logz(spectrum, dir, &params)?.second.re;
    let leading = ricci_coefficient(m) as f64 / (12.0 * PI) * dir.wp_norm_sq();
    let remainder = -second;
    Ok(RicciPoint { m, ricci: leading + remainder, leading, remainder })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Power of m divided out: 2 when the systoles move to first order, else 1.
    pub power: u32,
}

/// Least-squares fit of log(|R(m)| / m^p) against m; the slope approximates -l0.
pub fn remainder_decay_fit(spectrum: &LengthSpectrum, dir: &DirectionData, ms: &[u32]) -> Result<DecayFit> {
    if ms.len() < 5 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 5", ms.len())));
    }
    let sys = spectrum.systoles()?;
    let r = dir.resolve(spectrum)?;
    let dl0: f64 = sys.indices.iter().map(|&i| r.dl[i].norm_sqr()).sum();
    let power = if dl0 > SYSTOLE_DL_TOL { 2 } else { 1 };
    let points: Vec<(f64, f64)> = ms
        .par_iter()
        .map(|&m| -> Result<(f64, f64)> {
            let p = ricci_from_variation(spectrum, dir, m)?;
            let a = p.remainder.abs();
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::DegenerateFit(format!("remainder at m = {m} is {}", p.remainder)));
            }
            let mf = m as f64;
            Ok((mf, a.ln() - power as f64 * mf.ln()))
        })
        .collect::<Result<_>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all m values coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { slope, intercept: my - slope * mx, r_squared, power })
}
