use std::fs;
use std::path::Path;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::LengthSpectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionEntry {
    pub index: usize,
    /// First variation of the length.
    pub dl: Complex64,
    /// Mixed second variation of the length.
    pub ddl: f64,
}

/// A tangent direction described by its effect on geodesic lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionData {
    entries: Vec<DirectionEntry>,
    wp_norm_sq: f64,
    sup_norm: Option<f64>,
}

/// Per-spectrum-entry variation data; missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedDirection {
    pub dl: Vec<Complex64>,
    pub ddl: Vec<f64>,
    pub wp_norm_sq: f64,
    /// Spectrum entries without a record.
    pub missing: usize,
}

impl ResolvedDirection {
    pub fn zero(n: usize, wp_norm_sq: f64) -> Self {
        Self { dl: vec![Complex64::new(0.0, 0.0); n], ddl: vec![0.0; n], wp_norm_sq, missing: n }
    }

    /// Linear combination sum c_k mu_k of basis directions. The first
    /// variation is linear; ddl is combined as sum |c_k|^2 ddl_k (cross terms
    /// between distinct basis directions are not available and taken as zero);
    /// the WP norm is c^* G c.
    pub fn combine(coeffs: &[Complex64], basis: &[ResolvedDirection], gram: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = basis.first().map(|d| d.dl.len()).unwrap_or(0);
        let mut out = Self::zero(n, 0.0);
        for (c, d) in coeffs.iter().zip(basis) {
            for i in 0..n {
                out.dl[i] += c * d.dl[i];
                out.ddl[i] += c.norm_sqr() * d.ddl[i];
            }
        }
        let mut wp = Complex64::new(0.0, 0.0);
        for (i, ci) in coeffs.iter().enumerate() {
            for (j, cj) in coeffs.iter().enumerate() {
                wp += ci.conj() * gram(i, j) * cj;
            }
        }
        out.wp_norm_sq = wp.re;
        out.missing = basis.iter().map(|d| d.missing).min().unwrap_or(0);
        out
    }
}

/// Bounds |dl| <= C sup_norm l and ddl <= C sup_norm^2 l checked in validation mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub length_bound_constant: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { length_bound_constant: 10.0 }
    }
}

impl DirectionData {
    pub fn new(entries: Vec<DirectionEntry>, wp_norm_sq: f64, sup_norm: Option<f64>) -> Result<Self> {
        if !(wp_norm_sq > 0.0 && wp_norm_sq.is_finite()) {
            return Err(Error::Validation(format!("wp_norm_sq {wp_norm_sq} must be positive")));
        }
        if let Some(n) = sup_norm {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::Validation(format!("sup_norm {n} must be nonnegative")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &entries {
            if !(e.dl.re.is_finite() && e.dl.im.is_finite() && e.ddl.is_finite()) {
                return Err(Error::Validation(format!("entry {} has non-finite data", e.index)));
            }
            if e.ddl < 0.0 {
                return Err(Error::Validation(format!("entry {} has negative ddl {}", e.index, e.ddl)));
            }
            if !seen.insert(e.index) {
                return Err(Error::Validation(format!("duplicate entry for index {}", e.index)));
            }
        }
        Ok(Self { entries, wp_norm_sq, sup_norm })
    }

    /// The zero direction with the given WP norm.
    pub fn zero(wp_norm_sq: f64) -> Result<Self> {
        Self::new(Vec::new(), wp_norm_sq, None)
    }

    pub fn entries(&self) -> &[DirectionEntry] {
        &self.entries
    }

    pub fn wp_norm_sq(&self) -> f64 {
        self.wp_norm_sq
    }

    pub fn sup_norm(&self) -> Option<f64> {
        self.sup_norm
    }

    /// Spreads the records over the spectrum entries.
    pub fn resolve(&self, spectrum: &LengthSpectrum) -> Result<ResolvedDirection> {
        let n = spectrum.len();
        let mut out = ResolvedDirection::zero(n, self.wp_norm_sq);
        for e in &self.entries {
            if e.index >= n {
                return Err(Error::Index { index: e.index, len: n });
            }
            out.dl[e.index] = e.dl;
            out.ddl[e.index] = e.ddl;
        }
        out.missing = n - self.entries.len();
        if out.missing > 0 && !self.entries.is_empty() {
            log::debug!("{} spectrum entries without variation data, treated as zero", out.missing);
        }
        Ok(out)
    }

    /// Strict checks: ddl > 0 everywhere and, with a sup norm, the length-variation bounds.
    pub fn validate(&self, spectrum: &LengthSpectrum, config: &ValidationConfig) -> Result<()> {
        let c = config.length_bound_constant;
        for e in &self.entries {
            let l = spectrum
                .entries()
                .get(e.index)
                .ok_or(Error::Index { index: e.index, len: spectrum.len() })?
                .length;
            if !(e.ddl > 0.0) {
                return Err(Error::Validation(format!("entry {}: ddl = {} is not positive", e.index, e.ddl)));
            }
            if let Some(sup) = self.sup_norm {
                if e.dl.norm() > c * sup * l {
                    return Err(Error::Validation(format!("entry {}: |dl| exceeds C sup_norm l", e.index)));
                }
                if e.ddl > c * sup * sup * l {
                    return Err(Error::Validation(format!("entry {}: ddl exceeds C sup_norm^2 l", e.index)));
                }
            }
        }
        let missing = spectrum.len().saturating_sub(self.entries.len());
        if missing > 0 {
            warn!("{missing} spectrum entries have no variation data");
        }
        Ok(())
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| DirectionEntry { index: e.index, dl: e.dl * lambda, ddl: e.ddl * lambda * lambda })
            .collect();
        Self { entries, wp_norm_sq: self.wp_norm_sq * lambda * lambda, sup_norm: self.sup_norm.map(|n| n * lambda.abs()) }
    }
}

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct DirectionFile {
    format_version: u32,
    wp_norm_sq: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sup_norm: Option<f64>,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    index: usize,
    dl_re: f64,
    dl_im: f64,
    ddl: f64,
}

pub fn save_direction(dir: &DirectionData, path: impl AsRef<Path>) -> Result<()> {
    let file = DirectionFile {
        format_version: FORMAT_VERSION,
        wp_norm_sq: dir.wp_norm_sq,
        sup_norm: dir.sup_norm,
        entries: dir
            .entries
            .iter()
            .map(|e| EntryRecord { index: e.index, dl_re: e.dl.re, dl_im: e.dl.im, ddl: e.ddl })
            .collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

pub fn load_direction(path: impl AsRef<Path>) -> Result<DirectionData> {
    let file: DirectionFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported direction format_version {}", file.format_version)));
    }
    let entries = file
        .entries
        .iter()
        .map(|r| DirectionEntry { index: r.index, dl: Complex64::new(r.dl_re, r.dl_im), ddl: r.ddl })
        .collect();
    DirectionData::new(entries, file.wp_norm_sq, file.sup_norm).map_err(|e| match e {
        Error::Validation(m) => Error::Format(m),
        other => other,
    })
}
