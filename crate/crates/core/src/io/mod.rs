//! Dataset and map file formats.
//!
//! | file | format |
//! |------|--------|
//! | poses | one frame per line, 12 reals: row-major 3x4 world-from-sensor |
//! | intrinsics | one line: `fx fy cx cy width height` |
//! | clouds (`.xyz`) | three reals per line, sensor frame |
//! | clouds (`.bin`) | `MLCLOUD1`, u64 count, then count x 3 little-endian f32 |
//! | labels / classes | binary PGM (P5, maxval 255); 255 marks an invalid pixel |
//! | depth | `DEPTH width height\n` then little-endian f32; non-positive or NaN is invalid |
//! | scalars | `x y z value` per line, sensor frame |
//! | maps | see [`mapfile`] |

mod cloud;
mod depth;
mod intrinsics;
pub mod mapfile;
mod pgm;
mod poses;
mod scalars;

pub use cloud::{read_cloud, read_cloud_bin, read_xyz, write_cloud_bin, write_xyz};
pub use depth::{read_depth, write_depth};
pub use intrinsics::{read_intrinsics, write_intrinsics};
pub use mapfile::{deserialize_map, read_map, serialize_map, write_map, MapLayer};
pub use pgm::{read_pgm, write_pgm};
pub use poses::{read_poses, write_poses};
pub use scalars::{read_scalars, write_scalars};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Parses a whitespace-separated line of reals, requiring exactly `n`.
pub(crate) fn parse_reals(path: &Path, lineno: usize, line: &str, n: usize) -> Result<Vec<f64>> {
    let vals = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(path, lineno, format!("not a number: {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != n {
        return Err(Error::parse(path, lineno, format!("expected {n} values, found {}", vals.len())));
    }
    if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
        return Err(Error::parse(path, lineno, format!("non-finite value {v}")));
    }
    Ok(vals)
}

/// Non-empty, non-comment lines with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}
