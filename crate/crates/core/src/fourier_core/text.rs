//! Line-oriented text format with hexadecimal floats.
//!
//! ```text
//! # d=2
//! 1 0 0x1.0000000000000p-1 -0x1.8000000000000p+0
//! ```

use super::mode::Mode;
use super::series::TrigSeries;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Renders an f64 as a C99-style hexadecimal float.
pub fn format_hexf64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    format!("{sign}0x{lead}.{mantissa:013x}p{exp:+}")
}

/// Parses a decimal or hexadecimal float literal.
pub fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    if lower.contains("0x") {
        return hexf_parse::parse_hexf64(t, false).ok().or_else(|| {
            // hexf-parse rejects "0x1.p+0"-free zeros like "0x0p+0" with a sign; retry unsigned
            let (neg, body) = t.strip_prefix('-').map(|b| (true, b)).unwrap_or((false, t));
            hexf_parse::parse_hexf64(body, false).ok().map(|v| if neg { -v } else { v })
        });
    }
    match lower.as_str() {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => t.parse().ok(),
    }
}

pub fn to_text(s: &TrigSeries) -> String {
    let mut out = format!("# d={}\n", s.dim());
    for (m, c) in s.iter() {
        let modes: Vec<String> = m.components().iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{} {} {}\n", modes.join(" "), format_hexf64(c.re), format_hexf64(c.im)));
    }
    out
}

/// Inverse of [`to_text`]. The result is a plain complex series; call
/// `real_from_pairs` on its terms if symmetry should be re-imposed.
pub fn from_text(text: &str) -> Result<TrigSeries> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::invalid("empty series text"))?;
    let d: usize = header
        .trim()
        .strip_prefix("# d=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::invalid(format!("bad header line: {header:?}")))?;
    let mut pairs = Vec::new();
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != d + 2 {
            return Err(Error::invalid(format!("line {}: expected {} fields", no + 1, d + 2)));
        }
        let mut comps = Vec::with_capacity(d);
        for f in &fields[..d] {
            comps.push(
                f.parse::<i32>()
                    .map_err(|_| Error::invalid(format!("line {}: bad mode component {f:?}", no + 1)))?,
            );
        }
        let re = parse_float(fields[d])
            .ok_or_else(|| Error::invalid(format!("line {}: bad float {:?}", no + 1, fields[d])))?;
        let im = parse_float(fields[d + 1])
            .ok_or_else(|| Error::invalid(format!("line {}: bad float {:?}", no + 1, fields[d + 1])))?;
        pairs.push((Mode::from(comps), Complex64::new(re, im)));
    }
    TrigSeries::from_pairs(d, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexfloat_round_trip() {
        for x in [0.0, -0.0, 1.0, -1.5, 0.1, 1e-310, f64::MAX, f64::MIN_POSITIVE, std::f64::consts::PI] {
            let s = format_hexf64(x);
            let y = parse_float(&s).unwrap_or_else(|| panic!("cannot parse {s}"));
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
    }

    #[test]
    fn series_round_trip() {
        let s = TrigSeries::alpha_beta_sin(std::f64::consts::E, 0.1);
        let back = from_text(&to_text(&s)).unwrap();
        for (m, c) in s.iter() {
            assert_eq!(back.get(m), *c);
        }
        assert_eq!(back.len(), s.len());
    }
}
