use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Point3, Pose};

use super::TraversabilityLabelConfig;

/// Index of a 2.5D elevation map column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnCoord {
    pub i: i32,
    pub j: i32,
}

impl ColumnCoord {
    pub const fn new(i: i32, j: i32) -> Self {
        ColumnCoord { i, j }
    }
}

/// Running height statistics (Welford).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct HeightStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl HeightStats {
    pub fn push(&mut self, z: f64) {
        self.count += 1;
        let d = z - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (z - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

/// 2.5D grid of height statistics in the world frame, anchored at the world
/// origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ElevationMap {
    resolution: f64,
    cells: HashMap<ColumnCoord, HeightStats>,
}

impl ElevationMap {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
        }
        Ok(ElevationMap {
            resolution,
            cells: HashMap::new(),
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn column_of(&self, x: f64, y: f64) -> Option<ColumnCoord> {
        let i = (x / self.resolution).floor();
        let j = (y / self.resolution).floor();
        let range = i32::MIN as f64..=i32::MAX as f64;
        (range.contains(&i) && range.contains(&j)).then(|| ColumnCoord::new(i as i32, j as i32))
    }

    pub fn column_center(&self, c: ColumnCoord) -> (f64, f64) {
        ((c.i as f64 + 0.5) * self.resolution, (c.j as f64 + 0.5) * self.resolution)
    }

    /// Adds a world-frame point.
    pub fn insert(&mut self, p: Point3) {
        if !p.is_finite() {
            return;
        }
        if let Some(c) = self.column_of(p.x, p.y) {
            self.cells.entry(c).or_default().push(p.z);
        }
    }

    /// Statistics of a column; `None` when empty.
    pub fn get(&self, c: ColumnCoord) -> Option<&HeightStats> {
        self.cells.get(&c).filter(|s| !s.is_empty())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&ColumnCoord, &HeightStats)> {
        self.cells.iter()
    }
}

/// Fuses sensor-frame clouds, each with its world-from-sensor pose.
pub fn build_elevation_map(clouds: &[Vec<Point3>], poses: &[Pose], cfg: &TraversabilityLabelConfig) -> Result<ElevationMap> {
    if clouds.len() != poses.len() {
        return Err(Error::InvalidParameter(format!("{} clouds but {} poses", clouds.len(), poses.len())));
    }
    let mut map = ElevationMap::new(cfg.resolution)?;
    for (cloud, pose) in clouds.iter().zip(poses) {
        for p in cloud {
            map.insert(pose.transform_point(*p));
        }
    }
    Ok(map)
}
