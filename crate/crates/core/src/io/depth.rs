use std::path::Path;

use super::{read_bytes, write_file};
use crate::error::{Error, Result};
use crate::raster::{Raster, RasterKind};

/// Reads `DEPTH width height\n` followed by little-endian f32 meters.
/// Zero, negative and non-finite values are invalid.
pub fn read_depth(path: &Path) -> Result<Raster> {
    let bytes = read_bytes(path)?;
    let bad = |msg: String| Error::Format {
        file: path.to_path_buf(),
        msg,
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing DEPTH header".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not text".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "DEPTH" {
        return Err(bad(format!("expected \"DEPTH width height\", found {header:?}")));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad dimension {s:?}")));
    let (w, h) = (dim(parts[1])?, dim(parts[2])?);
    let body = &bytes[nl + 1..];
    if Some(body.len()) != w.checked_mul(h).and_then(|n| n.checked_mul(4)) {
        return Err(bad(format!("expected {} depth values, payload has {} bytes", w * h, body.len())));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Raster::from_values(RasterKind::Depth, w, h, data).map_err(|e| bad(e.to_string()))
}

/// Writes depth as f32; invalid pixels are stored as 0.
pub fn write_depth(path: &Path, raster: &Raster) -> Result<()> {
    if raster.kind() != RasterKind::Depth {
        return Err(Error::Format {
            file: path.to_path_buf(),
            msg: format!("expected a depth raster, got {:?}", raster.kind()),
        });
    }
    let mut out = format!("DEPTH {} {}\n", raster.width(), raster.height()).into_bytes();
    for i in 0..raster.len() {
        let v = raster.get_index(i).unwrap_or(0.0) as f32;
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_file(path, &out)
}
