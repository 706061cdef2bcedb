//! Single-channel images with an explicit validity mask.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RasterKind {
    /// Semantic class indices `0..K`.
    ClassIndex,
    /// Traversability labels: [`UNTRAVERSABLE`] or [`TRAVERSABLE`].
    Binary,
    /// Camera-frame depth in meters.
    Depth,
    /// Real-valued scores.
    Score,
}

pub const UNTRAVERSABLE: u8 = 0;
pub const TRAVERSABLE: u8 = 1;

/// Row-major image. Pixel `(col, row)` lives at `row * width + col`.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    kind: RasterKind,
    data: Vec<f64>,
    valid: Vec<bool>,
}

impl Raster {
    pub fn new(kind: RasterKind, width: usize, height: usize, data: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("raster dimensions must be positive".into()));
        }
        if data.len() != width * height || valid.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "raster {width}x{height} needs {} values, got {} data / {} mask",
                width * height,
                data.len(),
                valid.len()
            )));
        }
        for (v, &ok) in data.iter().zip(&valid) {
            if ok && !Self::value_ok(kind, *v) {
                return Err(Error::InvalidParameter(format!("invalid {kind:?} value {v}")));
            }
        }
        Ok(Raster {
            width,
            height,
            kind,
            data,
            valid,
        })
    }

    /// Builds a raster whose mask is derived from the values: every pixel
    /// holding a legal value for `kind` is valid.
    pub fn from_values(kind: RasterKind, width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let valid = data.iter().map(|&v| Self::value_ok(kind, v)).collect();
        Raster::new(kind, width, height, data, valid)
    }

    /// All pixels invalid.
    pub fn invalid(kind: RasterKind, width: usize, height: usize) -> Result<Self> {
        Raster::new(kind, width, height, vec![0.0; width * height], vec![false; width * height])
    }

    fn value_ok(kind: RasterKind, v: f64) -> bool {
        match kind {
            RasterKind::ClassIndex => v.is_finite() && v >= 0.0 && v.fract() == 0.0,
            RasterKind::Binary => v == 0.0 || v == 1.0,
            RasterKind::Depth => v.is_finite() && v > 0.0,
            RasterKind::Score => v.is_finite(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn kind(&self) -> RasterKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn same_dims(&self, other: &Raster) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }

    /// Value at `(col, row)` when valid.
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        let idx = row * self.width + col;
        (col < self.width && row < self.height && self.valid[idx]).then(|| self.data[idx])
    }

    /// Value at flat index when valid.
    pub fn get_index(&self, idx: usize) -> Option<f64> {
        self.valid[idx].then(|| self.data[idx])
    }

    pub fn class_at(&self, col: usize, row: usize) -> Option<usize> {
        self.get(col, row).map(|v| v as usize)
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) -> Result<()> {
        if !Self::value_ok(self.kind, value) {
            return Err(Error::InvalidParameter(format!("invalid {:?} value {value}", self.kind)));
        }
        let idx = row * self.width + col;
        self.data[idx] = value;
        self.valid[idx] = true;
        Ok(())
    }

    pub fn invalidate(&mut self, col: usize, row: usize) {
        self.valid[row * self.width + col] = false;
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// `(col, row, value)` for every valid pixel in row-major order.
    pub fn valid_pixels(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.data.len())
            .filter(|&i| self.valid[i])
            .map(|i| (i % self.width, i / self.width, self.data[i]))
    }
}
