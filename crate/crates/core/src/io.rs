//! File formats.
//!
//! Field files are little-endian binary:
//!
//! ```text
//! radius: f64 | resolution N: u32 | margin: f64 | N² × (re: f64, im: f64)
//! ```
//!
//! with values in row-major order (`idx = j·N + i`). Real fields are stored
//! with zero imaginary part. The mask is not stored; it is rebuilt from the
//! margin. Heatmaps are binary PGM (P5, 8-bit), top row at the largest `y`.

use std::path::Path;

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::grid::{make_grid, ComplexField, Field, RealField};
use crate::{Error, Result};

/// Version stamped on every JSON document written by the crate.
pub const SCHEMA_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 8;

/// Encodes a complex field.
pub fn encode_field(f: &ComplexField) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(&grid.radius().to_le_bytes());
    out.extend_from_slice(&(grid.resolution() as u32).to_le_bytes());
    out.extend_from_slice(&f.margin().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

/// Encodes a real field as a complex one with zero imaginary part.
pub fn encode_real_field(f: &RealField) -> Vec<u8> {
    encode_field(&f.map(|v| Complex64::new(v, 0.0)))
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Decodes a field file, validating the header, the length and finiteness
/// of the masked values.
pub fn decode_field(bytes: &[u8]) -> Result<ComplexField> {
    let bad = |m: String| Err(Error::Decode(m));
    if bytes.len() < HEADER_LEN {
        return bad(format!("{} bytes is shorter than the header", bytes.len()));
    }
    let radius = read_f64(bytes, 0);
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let margin = read_f64(bytes, 12);
    if !(radius.is_finite() && radius > 0.0) {
        return bad(format!("radius {radius} is not positive"));
    }
    if !(margin.is_finite() && margin >= 0.0 && margin < radius) {
        return bad(format!("margin {margin} outside [0, radius)"));
    }
    let grid = make_grid(radius, n).map_err(|e| Error::Decode(e.to_string()))?;
    let expected = (HEADER_LEN as u128) + 16 * (n as u128) * (n as u128);
    if bytes.len() as u128 != expected {
        return bad(format!("expected {expected} bytes for N={n}, got {}", bytes.len()));
    }
    let values: Vec<Complex64> = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(read_f64(c, 0), read_f64(c, 8)))
        .collect();
    let mask = grid.disc_mask(margin);
    if let Some(k) = (0..grid.len()).find(|&k| mask[k] && !(values[k].re.is_finite() && values[k].im.is_finite())) {
        let (i, j) = grid.ij(k);
        return bad(format!("non-finite value at masked node ({i}, {j})"));
    }
    Field::from_parts(grid, margin, values, mask)
}

pub fn write_field(path: &Path, f: &ComplexField) -> Result<()> {
    std::fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ComplexField> {
    decode_field(&std::fs::read(path)?)
}

/// `x,y,re,im` rows for every masked node, row-major.
pub fn field_csv(f: &ComplexField) -> String {
    let mut s = String::from("x,y,re,im\n");
    for k in f.masked_indices() {
        let (i, j) = f.grid().ij(k);
        let z = f.grid().node(i, j);
        let v = f.values()[k];
        s.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", z.re, z.im, v.re, v.im));
    }
    s
}

/// 8-bit P5 image of a nonnegative real field, mapping `[0, sup]` linearly
/// onto `[0, 255]`. Nodes outside the mask and non-finite values are black.
pub fn pgm_heatmap(f: &RealField) -> Vec<u8> {
    let n = f.grid().resolution();
    let sup = f
        .masked_indices()
        .map(|k| f.values()[k])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for row in (0..n).rev() {
        for i in 0..n {
            let k = f.grid().index(i, row);
            let v = f.values()[k];
            let byte = if !f.mask()[k] || !v.is_finite() || sup <= 0.0 {
                0
            } else {
                (v.max(0.0) / sup * 255.0).round().clamp(0.0, 255.0) as u8
            };
            out.push(byte);
        }
    }
    out
}

/// A JSON document with a schema version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Versioned {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Parses a versioned document, rejecting other schema versions.
pub fn from_versioned_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let v: Versioned<T> = serde_json::from_str(text)?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(Error::Decode(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            v.schema_version
        )));
    }
    Ok(v.body)
}
