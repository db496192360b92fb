//! Primitive length spectra: enumeration from generators, systoles, persistence.

mod enumerate;
pub mod hexfloat;
mod io;
mod octagon;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_spectrum, enumerate_spectrum_with, EnumerationConfig, EnumerationStats, MultiplicityConvention};
pub use io::{load_spectrum, save_spectrum, spectrum_from_json, spectrum_to_json, FORMAT_VERSION};
pub use octagon::{bolza_systole, genus2_octagon_generators, octagon_side_pairings};

/// Lengths closer than this are one length class.
pub const MERGE_TOL: f64 = 1e-10;

/// Generator word: letter `i` is generator `i - 1`, letter `-i` its inverse.
pub type Word = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveGeodesic {
    pub length: f64,
    pub multiplicity: u64,
    pub witness_word: Option<Word>,
}

impl PrimitiveGeodesic {
    pub fn new(length: f64, multiplicity: u64) -> Self {
        Self { length, multiplicity, witness_word: None }
    }
}

/// Sorted primitive lengths with multiplicities, complete up to `cutoff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    genus: u32,
    cutoff: f64,
    entries: Vec<PrimitiveGeodesic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystoleSet {
    pub l0: f64,
    pub indices: Vec<usize>,
    /// Number of primitive classes of length `l0`.
    pub count: u64,
}

impl LengthSpectrum {
    /// Validates and wraps already sorted entries.
    pub fn new(genus: u32, cutoff: f64, entries: Vec<PrimitiveGeodesic>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::Validation(format!("genus {genus} < 2")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Validation(format!("cutoff {cutoff} must be positive and finite")));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::Validation(format!("entry {i} has non-positive length {}", e.length)));
            }
            if e.multiplicity == 0 {
                return Err(Error::Validation(format!("entry {i} has zero multiplicity")));
            }
            if e.length > cutoff {
                return Err(Error::Validation(format!("entry {i} length {} exceeds cutoff {cutoff}", e.length)));
            }
            if i > 0 && e.length <= entries[i - 1].length {
                return Err(Error::Validation(format!("entries not strictly increasing at {i}")));
            }
        }
        Ok(Self { genus, cutoff, entries })
    }

    /// Sorts `(length, multiplicity)` pairs and merges lengths within [`MERGE_TOL`].
    pub fn from_lengths(genus: u32, cutoff: f64, lengths: &[(f64, u64)]) -> Result<Self> {
        let geos: Vec<PrimitiveGeodesic> = lengths.iter().map(|&(l, m)| PrimitiveGeodesic::new(l, m)).collect();
        Self::from_geodesics(genus, cutoff, geos)
    }

    pub fn from_geodesics(genus: u32, cutoff: f64, mut geos: Vec<PrimitiveGeodesic>) -> Result<Self> {
        if let Some(bad) = geos.iter().find(|g| !(g.length > 0.0 && g.length.is_finite())) {
            return Err(Error::Validation(format!("non-positive length {}", bad.length)));
        }
        geos.sort_by(|x, y| x.length.total_cmp(&y.length));
        let mut merged: Vec<PrimitiveGeodesic> = Vec::with_capacity(geos.len());
        for g in geos {
            match merged.last_mut() {
                Some(last) if g.length - last.length <= MERGE_TOL => {
                    last.multiplicity += g.multiplicity;
                    if last.witness_word.is_none() {
                        last.witness_word = g.witness_word;
                    }
                }
                _ => merged.push(g),
            }
        }
        Self::new(genus, cutoff, merged)
    }

    pub fn empty(genus: u32, cutoff: f64) -> Result<Self> {
        Self::new(genus, cutoff, Vec::new())
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn entries(&self) -> &[PrimitiveGeodesic] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of primitive classes.
    pub fn class_count(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Entries with length at most `l`.
    pub fn truncated(&self, l: f64) -> Result<Self> {
        let entries = self.entries.iter().filter(|e| e.length <= l).cloned().collect();
        Self::new(self.genus, l.min(self.cutoff), entries)
    }

    pub fn systoles(&self) -> Result<SystoleSet> {
        systoles(self)
    }
}

pub fn systoles(spectrum: &LengthSpectrum) -> Result<SystoleSet> {
    let first = spectrum.entries.first().ok_or(Error::EmptySpectrum)?;
    let l0 = first.length;
    let indices: Vec<usize> = spectrum
        .entries
        .iter()
        .enumerate()
        .take_while(|(_, e)| (e.length - l0).abs() <= MERGE_TOL)
        .map(|(i, _)| i)
        .collect();
    let count = indices.iter().map(|&i| spectrum.entries[i].multiplicity).sum();
    Ok(SystoleSet { l0, indices, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systole_of_two_lengths() {
        let s = LengthSpectrum::from_lengths(2, 5.0, &[(2.0, 3), (1.0, 1)]).unwrap();
        let sys = s.systoles().unwrap();
        assert_eq!(sys.l0, 1.0);
        assert_eq!(sys.indices, vec![0]);
        assert_eq!(sys.count, 1);
    }

    #[test]
    fn merges_within_tolerance() {
        let s = LengthSpectrum::from_lengths(2, 5.0, &[(1.0, 2), (1.0 + 5e-13, 1)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.entries()[0].multiplicity, 3);
        assert_eq!(s.systoles().unwrap().count, 3);
    }

    #[test]
    fn rejects_unsorted_and_nonpositive() {
        let e = vec![PrimitiveGeodesic::new(2.0, 1), PrimitiveGeodesic::new(1.0, 1)];
        assert!(LengthSpectrum::new(2, 5.0, e).is_err());
        assert!(LengthSpectrum::from_lengths(2, 5.0, &[(-1.0, 1)]).is_err());
    }

    #[test]
    fn empty_spectrum_has_no_systole() {
        let s = LengthSpectrum::empty(2, 1.0).unwrap();
        assert!(matches!(s.systoles(), Err(Error::EmptySpectrum)));
    }
}
