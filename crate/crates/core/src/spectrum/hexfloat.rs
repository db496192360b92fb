//! C99-style hexadecimal float text, for bit-exact persistence.

use crate::error::{Error, Result};

pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

pub fn parse(s: &str) -> Result<f64> {
    let bad = || Error::Format(format!("invalid hex float {s:?}"));
    let t = s.trim();
    match t {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")).ok_or_else(bad)?;
    let (mantissa, exp) = body.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i64 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if frac_part.len() > 13 || int_part.len() > 1 {
        return Err(bad());
    }
    let lead = if int_part.is_empty() { 0 } else { u64::from_str_radix(int_part, 16).map_err(|_| bad())? };
    let frac = if frac_part.is_empty() {
        0
    } else {
        u64::from_str_radix(frac_part, 16).map_err(|_| bad())? << (4 * (13 - frac_part.len()))
    };
    let bits = match lead {
        0 if frac == 0 => 0,
        0 if exp == -1022 => frac,
        1 if (-1022..=1023).contains(&exp) => (((exp + 1023) as u64) << 52) | frac,
        _ => return Err(bad()),
    };
    let v = f64::from_bits(bits);
    Ok(if neg { -v } else { v })
}
