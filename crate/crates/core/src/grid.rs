//! Sparse voxel addressing.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Integer index of a voxel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    pub i: i32,
    pub j: i32,
    pub k: i32,
}

impl CellCoord {
    pub const fn new(i: i32, j: i32, k: i32) -> Self {
        CellCoord { i, j, k }
    }
}

fn floor_index(v: f64) -> Result<i32> {
    let f = v.floor();
    if f < i32::MIN as f64 || f > i32::MAX as f64 {
        return Err(Error::InvalidParameter(format!("cell index {f} out of range")));
    }
    Ok(f as i32)
}

/// `floor((x - origin) / resolution)` per axis.
pub fn world_to_cell(x: Point3, resolution: f64, origin: Point3) -> Result<CellCoord> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
    }
    if !x.is_finite() || !origin.is_finite() {
        return Err(Error::NonFinite("point"));
    }
    Ok(CellCoord {
        i: floor_index((x.x - origin.x) / resolution)?,
        j: floor_index((x.y - origin.y) / resolution)?,
        k: floor_index((x.z - origin.z) / resolution)?,
    })
}

/// Center of a cell: `origin + (index + 0.5) * resolution`.
pub fn cell_center(c: CellCoord, resolution: f64, origin: Point3) -> Point3 {
    Point3::new(
        origin.x + (c.i as f64 + 0.5) * resolution,
        origin.y + (c.j as f64 + 0.5) * resolution,
        origin.z + (c.k as f64 + 0.5) * resolution,
    )
}

/// Sparse grid of per-cell layer state. Only cells that have received
/// evidence are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid<L> {
    resolution: f64,
    origin: Point3,
    cells: HashMap<CellCoord, L>,
}

impl<L> VoxelGrid<L> {
    pub fn new(resolution: f64, origin: Point3) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
        }
        if !origin.is_finite() {
            return Err(Error::NonFinite("grid origin"));
        }
        Ok(VoxelGrid {
            resolution,
            origin,
            cells: HashMap::new(),
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point3 {
        self.origin
    }

    pub fn cell_of(&self, p: Point3) -> Result<CellCoord> {
        world_to_cell(p, self.resolution, self.origin)
    }

    pub fn center(&self, c: CellCoord) -> Point3 {
        cell_center(c, self.resolution, self.origin)
    }

    pub fn get(&self, c: &CellCoord) -> Option<&L> {
        self.cells.get(c)
    }

    pub fn get_mut(&mut self, c: &CellCoord) -> Option<&mut L> {
        self.cells.get_mut(c)
    }

    /// Cell containing a world point, if stored.
    pub fn at(&self, p: Point3) -> Option<&L> {
        self.cell_of(p).ok().and_then(|c| self.cells.get(&c))
    }

    pub fn insert(&mut self, c: CellCoord, cell: L) -> Option<L> {
        self.cells.insert(c, cell)
    }

    pub fn get_or_insert_with(&mut self, c: CellCoord, init: impl FnOnce() -> L) -> &mut L {
        self.cells.entry(c).or_insert_with(init)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Unordered iteration.
    pub fn iter(&self) -> impl Iterator<Item = (&CellCoord, &L)> {
        self.cells.iter()
    }

    /// Iteration in ascending `(i, j, k)` order.
    pub fn iter_sorted(&self) -> impl Iterator<Item = (&CellCoord, &L)> {
        let mut v: Vec<_> = self.cells.iter().collect();
        v.sort_unstable_by_key(|(c, _)| **c);
        v.into_iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn world_to_cell_examples() {
        let o = Point3::ORIGIN;
        assert_eq!(world_to_cell(Point3::new(0.05, 0.05, 0.05), 0.1, o).unwrap(), CellCoord::new(0, 0, 0));
        assert_eq!(world_to_cell(Point3::new(0.0, 0.0, 0.0), 0.1, o).unwrap(), CellCoord::new(0, 0, 0));
        assert_eq!(world_to_cell(Point3::new(0.15, -0.05, 0.25), 0.1, o).unwrap(), CellCoord::new(1, -1, 2));
    }

    #[test]
    fn world_to_cell_errors() {
        let o = Point3::ORIGIN;
        assert!(world_to_cell(Point3::new(f64::NAN, 0.0, 0.0), 0.1, o).is_err());
        assert!(world_to_cell(Point3::new(f64::INFINITY, 0.0, 0.0), 0.1, o).is_err());
        assert!(world_to_cell(Point3::new(0.0, 0.0, 0.0), 0.0, o).is_err());
        assert!(world_to_cell(Point3::new(1e12, 0.0, 0.0), 0.1, o).is_err());
    }

    #[test]
    fn center_lies_in_its_cell() {
        let o = Point3::new(-0.3, 1.7, 0.01);
        for c in [CellCoord::new(0, 0, 0), CellCoord::new(-5, 3, 12), CellCoord::new(100, -100, -1)] {
            assert_eq!(world_to_cell(cell_center(c, 0.1, o), 0.1, o).unwrap(), c);
        }
    }

    proptest! {
        #[test]
        fn translation_consistent(x in -50.0f64..50.0, y in -50.0f64..50.0, z in -50.0f64..50.0, axis in 0usize..3) {
            let res = 0.1;
            let p = Point3::new(x, y, z);
            let mut shift = [0.0; 3];
            shift[axis] = res;
            let a = world_to_cell(p, res, Point3::ORIGIN).unwrap();
            let b = world_to_cell(p + Point3::from_array(shift), res, Point3::ORIGIN).unwrap();
            let d = [b.i - a.i, b.j - a.j, b.k - a.k];
            for (ax, delta) in d.iter().enumerate() {
                prop_assert_eq!(*delta, if ax == axis { 1 } else { 0 });
            }
        }
    }
}
