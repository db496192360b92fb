use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{hexfloat, LengthSpectrum, PrimitiveGeodesic, Word};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    format_version: u32,
    genus: u32,
    cutoff: f64,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    length: String,
    multiplicity: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    word: Option<String>,
}

fn word_to_string(w: &Word) -> String {
    w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn word_from_string(s: &str) -> Result<Word> {
    s.split_whitespace()
        .map(|t| match t.parse::<i32>() {
            Ok(0) | Err(_) => Err(Error::Format(format!("invalid word letter {t:?}"))),
            Ok(x) => Ok(x),
        })
        .collect()
}

pub fn spectrum_to_json(spectrum: &LengthSpectrum) -> Result<String> {
    let file = SpectrumFile {
        format_version: FORMAT_VERSION,
        genus: spectrum.genus,
        cutoff: spectrum.cutoff,
        entries: spectrum
            .entries
            .iter()
            .map(|e| EntryRecord {
                length: hexfloat::format(e.length),
                multiplicity: e.multiplicity,
                word: e.witness_word.as_ref().map(word_to_string),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn spectrum_from_json(text: &str) -> Result<LengthSpectrum> {
    let file: SpectrumFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let mut entries = Vec::with_capacity(file.entries.len());
    for rec in &file.entries {
        let length = hexfloat::parse(&rec.length)?;
        let witness_word = rec.word.as_deref().map(word_from_string).transpose()?;
        entries.push(PrimitiveGeodesic { length, multiplicity: rec.multiplicity, witness_word });
    }
    LengthSpectrum::new(file.genus, file.cutoff, entries).map_err(|e| match e {
        Error::Validation(m) => Error::Format(m),
        other => other,
    })
}

pub fn save_spectrum(spectrum: &LengthSpectrum, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, spectrum_to_json(spectrum)? + "\n")?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<LengthSpectrum> {
    let text = fs::read_to_string(path)?;
    spectrum_from_json(&text)
}
