//! Versioned binary map format.
//!
//! All integers and reals are little-endian.
//!
//! ```text
//! magic       6 bytes   "MLMAP1"
//! layer       u8        1 semantic, 2 traversability, 3 gaussian
//! resolution  f64
//! origin      3 x f64
//! params      u32       values per cell (K, 2 or 2)
//! cells       u64
//! records     cells x (i32 i, i32 j, i32 k, params x i128)
//! ```
//!
//! Cell parameters are written as the raw fixed-point integers the grid
//! accumulates in (64 fractional bits), so a round trip reproduces the grid
//! exactly. Records are sorted by cell index, which makes the encoding of a
//! grid unique.

use std::path::Path;

use super::{read_bytes, write_file};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::gaussian::GaussianCell;
use crate::geometry::Point3;
use crate::grid::{CellCoord, VoxelGrid};
use crate::semantic::DirichletCell;
use crate::traversability::BetaCell;

const MAGIC: &[u8; 6] = b"MLMAP1";
const HEADER_LEN: usize = 6 + 1 + 8 + 24 + 4 + 8;

/// A deserialized map layer.
#[derive(Clone, Debug, PartialEq)]
pub enum MapLayer {
    Semantic(VoxelGrid<DirichletCell>),
    Traversability(VoxelGrid<BetaCell>),
    Gaussian(VoxelGrid<GaussianCell>),
}

impl MapLayer {
    fn tag(&self) -> u8 {
        match self {
            MapLayer::Semantic(_) => 1,
            MapLayer::Traversability(_) => 2,
            MapLayer::Gaussian(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MapLayer::Semantic(g) => g.len(),
            MapLayer::Traversability(g) => g.len(),
            MapLayer::Gaussian(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolution(&self) -> f64 {
        match self {
            MapLayer::Semantic(g) => g.resolution(),
            MapLayer::Traversability(g) => g.resolution(),
            MapLayer::Gaussian(g) => g.resolution(),
        }
    }

    pub fn origin(&self) -> Point3 {
        match self {
            MapLayer::Semantic(g) => g.origin(),
            MapLayer::Traversability(g) => g.origin(),
            MapLayer::Gaussian(g) => g.origin(),
        }
    }

    /// Cells in index order with their raw parameters.
    fn records(&self) -> Vec<(CellCoord, Vec<Fixed>)> {
        match self {
            MapLayer::Semantic(g) => g.iter_sorted().map(|(c, d)| (*c, d.alpha_fixed().to_vec())).collect(),
            MapLayer::Traversability(g) => g
                .iter_sorted()
                .map(|(c, b)| (*c, vec![b.alpha_fixed(), b.beta_fixed()]))
                .collect(),
            MapLayer::Gaussian(g) => g
                .iter_sorted()
                .map(|(c, b)| (*c, vec![b.weighted_sum_fixed(), b.weight_sum_fixed()]))
                .collect(),
        }
    }
}

/// Encodes a layer. Semantic layers whose cells disagree on the class
/// count are rejected.
pub fn serialize_map(layer: &MapLayer) -> Result<Vec<u8>> {
    let records = layer.records();
    let params = match layer {
        MapLayer::Semantic(_) => records.first().map_or(0, |(_, p)| p.len()),
        _ => 2,
    };
    if let Some((c, p)) = records.iter().find(|(_, p)| p.len() != params) {
        return Err(Error::InvalidParameter(format!(
            "cell {c:?} has {} classes, expected {params}",
            p.len()
        )));
    }

    let mut out = Vec::with_capacity(HEADER_LEN + records.len() * (12 + 16 * params));
    out.extend_from_slice(MAGIC);
    out.push(layer.tag());
    out.extend_from_slice(&layer.resolution().to_le_bytes());
    for v in layer.origin().to_array() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(params as u32).to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for (c, p) in &records {
        for idx in [c.i, c.j, c.k] {
            out.extend_from_slice(&idx.to_le_bytes());
        }
        for v in p {
            out.extend_from_slice(&v.raw().to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self.bytes.get(self.pos..end).ok_or_else(|| Error::Format {
            file: self.path.to_path_buf(),
            msg: format!("truncated at byte {}", self.pos),
        })?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Decodes bytes produced by [`serialize_map`]; `path` is used in errors.
pub fn deserialize_map(bytes: &[u8], path: &Path) -> Result<MapLayer> {
    let bad = |msg: String| Error::Format {
        file: path.to_path_buf(),
        msg,
    };
    let mut r = Reader { bytes, pos: 0, path };
    let magic: [u8; 6] = r.take()?;
    if &magic != MAGIC {
        if magic.starts_with(b"MLMAP") {
            return Err(Error::VersionMismatch {
                file: path.to_path_buf(),
                found: String::from_utf8_lossy(&magic).into_owned(),
            });
        }
        return Err(bad("not a map file".into()));
    }
    let [tag] = r.take()?;
    let resolution = r.f64()?;
    let origin = Point3::new(r.f64()?, r.f64()?, r.f64()?);
    let params = u32::from_le_bytes(r.take()?) as usize;
    let cells = u64::from_le_bytes(r.take()?);

    let expected_params = match tag {
        1 => None,
        2 | 3 => Some(2),
        t => return Err(bad(format!("unknown layer kind {t}"))),
    };
    if expected_params.is_some_and(|n| n != params) {
        return Err(bad(format!("layer kind {tag} expects 2 values per cell, header says {params}")));
    }
    let record_len = 12 + 16 * params as u64;
    let remaining = (bytes.len() - r.pos) as u64;
    if cells.checked_mul(record_len) != Some(remaining) {
        return Err(bad(format!("{cells} records of {record_len} bytes do not match {remaining} payload bytes")));
    }

    let mut records = Vec::with_capacity(cells as usize);
    let mut prev: Option<CellCoord> = None;
    for _ in 0..cells {
        let c = CellCoord::new(
            i32::from_le_bytes(r.take()?),
            i32::from_le_bytes(r.take()?),
            i32::from_le_bytes(r.take()?),
        );
        if prev.is_some_and(|p| p >= c) {
            return Err(bad(format!("records not strictly sorted at cell {c:?}")));
        }
        prev = Some(c);
        let p = (0..params)
            .map(|_| Ok(Fixed::from_raw(i128::from_le_bytes(r.take()?))))
            .collect::<Result<Vec<_>>>()?;
        if p.iter().any(|v| *v < Fixed::ZERO) {
            return Err(bad(format!("negative parameter in cell {c:?}")));
        }
        records.push((c, p));
    }

    let grid_err = |e: Error| bad(e.to_string());
    Ok(match tag {
        1 => {
            let mut g = VoxelGrid::new(resolution, origin).map_err(grid_err)?;
            for (c, p) in records {
                g.insert(c, DirichletCell::from_fixed(p));
            }
            MapLayer::Semantic(g)
        }
        2 => {
            let mut g = VoxelGrid::new(resolution, origin).map_err(grid_err)?;
            for (c, p) in records {
                g.insert(c, BetaCell::from_fixed(p[0], p[1]));
            }
            MapLayer::Traversability(g)
        }
        _ => {
            let mut g = VoxelGrid::new(resolution, origin).map_err(grid_err)?;
            for (c, p) in records {
                g.insert(c, GaussianCell::from_fixed(p[0], p[1]));
            }
            MapLayer::Gaussian(g)
        }
    })
}

pub fn write_map(path: &Path, layer: &MapLayer) -> Result<()> {
    write_file(path, &serialize_map(layer)?)
}

pub fn read_map(path: &Path) -> Result<MapLayer> {
    deserialize_map(&read_bytes(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn empty_grid_is_header_only() {
        let g: VoxelGrid<BetaCell> = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let layer = MapLayer::Traversability(g);
        let bytes = serialize_map(&layer).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(deserialize_map(&bytes, p()).unwrap(), layer);
    }

    #[test]
    fn single_dirichlet_cell_bit_exact() {
        let mut g = VoxelGrid::new(0.25, Point3::new(-1.0, 2.0, 0.5)).unwrap();
        g.insert(
            CellCoord::new(-3, 7, 0),
            DirichletCell::from_alpha(&[10.001, 0.001, 1.0 / 3.0]).unwrap(),
        );
        let layer = MapLayer::Semantic(g);
        let back = deserialize_map(&serialize_map(&layer).unwrap(), p()).unwrap();
        assert_eq!(back, layer);
        if let MapLayer::Semantic(g) = back {
            let a = g.get(&CellCoord::new(-3, 7, 0)).unwrap().alpha();
            assert_eq!(a[2].to_bits(), (1.0f64 / 3.0).to_bits());
        }
    }

    #[test]
    fn large_grid_round_trip_and_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        while g.len() < 100_000 {
            let c = CellCoord::new(rng.random_range(-200..200), rng.random_range(-200..200), rng.random_range(-5..5));
            g.insert(c, GaussianCell::new(rng.random_range(0.0..50.0), rng.random_range(0.0..50.0)).unwrap());
        }
        let layer = MapLayer::Gaussian(g);
        let bytes = serialize_map(&layer).unwrap();
        // raw payload: three i32 indices plus two f64 values per cell
        let raw = 100_000 * (12 + 2 * 8);
        assert!(bytes.len() <= 2 * raw, "{} vs {}", bytes.len(), raw);
        assert_eq!(deserialize_map(&bytes, p()).unwrap(), layer);
    }

    #[test]
    fn encoding_is_unique() {
        let mut a = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let mut b = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let cells: Vec<_> = (0..50).map(|i| CellCoord::new(i * 7 % 13, i, -i)).collect();
        for c in &cells {
            a.insert(*c, BetaCell::new(1.0 + c.i as f64, 2.0).unwrap());
        }
        for c in cells.iter().rev() {
            b.insert(*c, BetaCell::new(1.0 + c.i as f64, 2.0).unwrap());
        }
        assert_eq!(
            serialize_map(&MapLayer::Traversability(a)).unwrap(),
            serialize_map(&MapLayer::Traversability(b)).unwrap()
        );
    }

    #[test]
    fn rejects_corruption() {
        let mut g = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        g.insert(CellCoord::new(0, 0, 0), BetaCell::new(1.0, 2.0).unwrap());
        let bytes = serialize_map(&MapLayer::Traversability(g)).unwrap();

        let mut v2 = bytes.clone();
        v2[5] = b'2';
        assert!(matches!(deserialize_map(&v2, p()), Err(Error::VersionMismatch { .. })));

        let mut junk = bytes.clone();
        junk[0] = b'X';
        assert!(matches!(deserialize_map(&junk, p()), Err(Error::Format { .. })));

        assert!(deserialize_map(&bytes[..bytes.len() - 1], p()).is_err());

        let mut kind = bytes.clone();
        kind[6] = 9;
        assert!(deserialize_map(&kind, p()).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.mlmap");
        let mut g = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        g.insert(CellCoord::new(1, 2, 3), BetaCell::new(20.001, 0.001).unwrap());
        let layer = MapLayer::Traversability(g);
        write_map(&path, &layer).unwrap();
        assert_eq!(read_map(&path).unwrap(), layer);
        assert!(read_map(&dir.path().join("missing")).unwrap_err().is_io());
    }
}
