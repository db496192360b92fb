//! One-parameter families of spectra with prescribed length variations,
//! used as finite-difference oracles.

use num_complex::Complex64;

use super::{DirectionData, DirectionEntry};
use crate::error::{Error, Result};
use crate::spectrum::{LengthSpectrum, PrimitiveGeodesic};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyMember {
    pub l0: f64,
    pub c: Complex64,
    pub h: f64,
    pub multiplicity: u64,
}

impl FamilyMember {
    pub fn new(l0: f64, c: Complex64, h: f64) -> Self {
        Self { l0, c, h, multiplicity: 1 }
    }

    /// l(eps) = l0 + 2 Re(c eps) + h |eps|^2, so that d l / d eps = c and the
    /// mixed derivative is h.
    pub fn length_at(&self, eps: Complex64) -> f64 {
        self.l0 + 2.0 * (self.c * eps).re + self.h * eps.norm_sqr()
    }
}

/// Lengths depending on a complex parameter eps near 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFamily {
    members: Vec<FamilyMember>,
    genus: u32,
    cutoff: f64,
}

impl SyntheticFamily {
    /// Members are sorted by base length, which must be strictly increasing.
    pub fn new(mut members: Vec<FamilyMember>, genus: u32) -> Result<Self> {
        members.sort_by(|a, b| a.l0.total_cmp(&b.l0));
        for w in members.windows(2) {
            if w[1].l0 <= w[0].l0 {
                return Err(Error::Validation("family base lengths must be distinct".into()));
            }
        }
        if let Some(m) = members.iter().find(|m| !(m.l0 > 0.0) || m.h < 0.0) {
            return Err(Error::Validation(format!("invalid family member {m:?}")));
        }
        let cutoff = members.last().map(|m| 2.0 * m.l0 + 1.0).unwrap_or(1.0);
        Ok(Self { members, genus, cutoff })
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn spectrum_at(&self, eps: Complex64) -> Result<LengthSpectrum> {
        let mut entries = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let length = m.length_at(eps);
            if !(length > 0.0) {
                return Err(Error::NonPositiveLength { length });
            }
            entries.push(PrimitiveGeodesic { length, multiplicity: m.multiplicity, witness_word: None });
        }
        LengthSpectrum::new(self.genus, self.cutoff, entries)
    }

    pub fn base_spectrum(&self) -> Result<LengthSpectrum> {
        self.spectrum_at(Complex64::new(0.0, 0.0))
    }

    /// The direction d/d eps at eps = 0.
    pub fn direction(&self, wp_norm_sq: f64) -> Result<DirectionData> {
        let entries = self
            .members
            .iter()
            .enumerate()
            .map(|(index, m)| DirectionEntry { index, dl: m.c, ddl: m.h })
            .collect();
        DirectionData::new(entries, wp_norm_sq, None)
    }

    /// Checks positivity on the 5-point stencil of step `h`.
    pub fn check_stencil(&self, h: f64) -> Result<()> {
        for eps in stencil(h) {
            self.spectrum_at(eps)?;
        }
        Ok(())
    }
}

fn stencil(h: f64) -> [Complex64; 5] {
    [
        Complex64::new(0.0, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::new(0.0, h),
        Complex64::new(0.0, -h),
    ]
}
