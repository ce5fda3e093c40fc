//! Binary greyscale PGM (P5) output.

use std::path::Path;

use crate::error::{Error, Result};

/// Maps `values` linearly onto `0..=255` (min → 0, max → 255). A constant
/// input maps to all zeros.
pub fn normalize_to_bytes(values: &[f64]) -> Vec<u8> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - min) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::domain(format!(
            "{} pixels for a {width}x{height} image",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    std::fs::write(path, encode_pgm(width, height, pixels)?).map_err(|e| Error::io(path, e))
}

/// Parses a P5 file with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = || Error::Data("not an 8-bit P5 image".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?);
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad());
    }
    let width: usize = fields[1].parse().map_err(|_| bad())?;
    let height: usize = fields[2].parse().map_err(|_| bad())?;
    let pixels = bytes.get(pos + 1..).ok_or_else(bad)?;
    if pixels.len() != width * height {
        return Err(bad());
    }
    Ok((width, height, pixels.to_vec()))
}
