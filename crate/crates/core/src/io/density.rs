//! Spectral densities persist as a single CSV file.
//!
//! Row 0 holds `length,point_count`; row k+1 holds `frequency,value` for
//! bin k. Storing the length directly keeps the round trip bitwise.

use std::path::Path;

use crate::error::{Error, Result};
use crate::stationary::SpectralDensity;

use super::csv::format_float;

pub fn save_density(path: &Path, density: &SpectralDensity) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format_float(density.length()));
    out.push(',');
    out.push_str(&format_float(density.len() as f64));
    out.push('\n');
    for (k, &value) in density.values().iter().enumerate() {
        out.push_str(&format_float(density.frequency(k)));
        out.push(',');
        out.push_str(&format_float(value));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_density(path: &Path) -> Result<SpectralDensity> {
    let text = std::fs::read_to_string(path).map_err(|_| Error::MissingFile {
        path: path.display().to_string(),
    })?;
    let err = |message: String| Error::Csv {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| err("empty density file".into()))?;
    let mut parts = header.split(',');
    let length: f64 = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err("malformed length field".into()))?;
    let count: f64 = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err("malformed point-count field".into()))?;
    let count = count as usize;
    let mut values = Vec::with_capacity(count);
    for (i, line) in lines.enumerate() {
        let mut parts = line.split(',');
        let _freq: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(format!("row {}: malformed frequency", i + 1)))?;
        let value: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(format!("row {}: malformed value", i + 1)))?;
        values.push(value);
    }
    if values.len() != count {
        return Err(err(format!(
            "{} value rows, header says {count}",
            values.len()
        )));
    }
    SpectralDensity::from_values(values, length)
}
