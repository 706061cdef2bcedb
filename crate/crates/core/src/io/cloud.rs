use std::fmt::Write as _;
use std::path::Path;

use super::{data_lines, parse_reals, read_bytes, read_text, write_file};
use crate::error::{Error, Result};
use crate::geometry::Point3;

const MAGIC: &[u8; 8] = b"MLCLOUD1";

pub fn read_xyz(path: &Path) -> Result<Vec<Point3>> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(n, line)| parse_reals(path, n, line, 3).map(|v| Point3::new(v[0], v[1], v[2])))
        .collect()
}

pub fn write_xyz(path: &Path, points: &[Point3]) -> Result<()> {
    let mut out = String::new();
    for p in points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).expect("write to string");
    }
    write_file(path, out.as_bytes())
}

pub fn read_cloud_bin(path: &Path) -> Result<Vec<Point3>> {
    let bytes = read_bytes(path)?;
    let bad = |msg: String| Error::Format {
        file: path.to_path_buf(),
        msg,
    };
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing MLCLOUD1 header".into()));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if count.checked_mul(12) != Some(body.len()) {
        return Err(bad(format!("header says {count} points but payload has {} bytes", body.len())));
    }
    let f = |c: &[u8]| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64;
    let points: Vec<Point3> = body
        .chunks_exact(12)
        .map(|c| Point3::new(f(&c[0..4]), f(&c[4..8]), f(&c[8..12])))
        .collect();
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(bad(format!("point {i} is not finite")));
    }
    Ok(points)
}

/// Binary variant; coordinates are stored as f32.
pub fn write_cloud_bin(path: &Path, points: &[Point3]) -> Result<()> {
    let mut out = Vec::with_capacity(16 + 12 * points.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for p in points {
        for v in [p.x, p.y, p.z] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    write_file(path, &out)
}

/// Dispatches on the extension: `.bin` is binary, anything else text.
pub fn read_cloud(path: &Path) -> Result<Vec<Point3>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => read_cloud_bin(path),
        _ => read_xyz(path),
    }
}
