use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::CellCoord;

use super::{ColumnCoord, ElevationMap, TraversabilityLabelConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerrainFeatures {
    /// Angle between the fitted plane normal and the vertical, radians.
    pub slope: f64,
    /// RMS height residual about the fitted plane, meters.
    pub roughness: f64,
    /// Largest absolute height difference to the center cell, meters.
    pub step_height: f64,
}

/// Slope, roughness and step height from a least-squares plane through the
/// non-empty cells whose centers lie within `window_radius` of `cell`.
pub fn terrain_features(map: &ElevationMap, cell: ColumnCoord, window_radius: f64) -> Result<TerrainFeatures> {
    let insufficient = || Error::InsufficientData(CellCoord::new(cell.i, cell.j, 0));
    let center = map.get(cell).ok_or_else(insufficient)?.mean();
    let res = map.resolution();
    let reach = (window_radius / res).floor() as i32;
    let mut samples = Vec::new();
    for di in -reach..=reach {
        for dj in -reach..=reach {
            let (dx, dy) = (di as f64 * res, dj as f64 * res);
            if dx.hypot(dy) > window_radius + 1e-9 * res {
                continue;
            }
            if let Some(s) = map.get(ColumnCoord::new(cell.i + di, cell.j + dj)) {
                samples.push((dx, dy, s.mean()));
            }
        }
    }
    if samples.len() < 3 {
        return Err(insufficient());
    }

    let n = samples.len() as f64;
    let (mx, my, mz) = samples
        .iter()
        .fold((0.0, 0.0, 0.0), |acc, s| (acc.0 + s.0 / n, acc.1 + s.1 / n, acc.2 + s.2 / n));
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, z) in &samples {
        let (x, y, z) = (x - mx, y - my, z - mz);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
    }
    let det = sxx * syy - sxy * sxy;
    // collinear cells do not determine a plane
    if det <= 1e-9 * (sxx * syy).max(f64::MIN_POSITIVE) {
        return Err(insufficient());
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;

    let mut sq = 0.0;
    let mut step: f64 = 0.0;
    for &(x, y, z) in &samples {
        let r = z - (mz + a * (x - mx) + b * (y - my));
        sq += r * r;
        step = step.max((z - center).abs());
    }
    Ok(TerrainFeatures {
        slope: a.hypot(b).atan(),
        roughness: (sq / n).sqrt(),
        step_height: step,
    })
}

/// Linear traversability score in [0, 1]; zero as soon as any feature
/// exceeds its critical value.
pub fn traversability_score(slope: f64, roughness: f64, step_height: f64, cfg: &TraversabilityLabelConfig) -> f64 {
    if slope > cfg.slope_crit || roughness > cfg.roughness_crit || step_height > cfg.step_crit {
        return 0.0;
    }
    let [w1, w2, w3] = cfg.weights;
    let t = 1.0 - w1 * slope / cfg.slope_crit - w2 * roughness / cfg.roughness_crit - w3 * step_height / cfg.step_crit;
    t.clamp(0.0, 1.0)
}

/// Per-column traversability scores of an elevation map.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMap {
    pub resolution: f64,
    pub scores: HashMap<ColumnCoord, f64>,
}

impl ScoreMap {
    pub fn score_at(&self, x: f64, y: f64) -> Option<f64> {
        let i = (x / self.resolution).floor();
        let j = (y / self.resolution).floor();
        if !(i.abs() < i32::MAX as f64 && j.abs() < i32::MAX as f64) {
            return None;
        }
        self.scores.get(&ColumnCoord::new(i as i32, j as i32)).copied()
    }
}

/// Scores every column with enough neighbouring data.
pub fn traversability_map(map: &ElevationMap, cfg: &TraversabilityLabelConfig) -> ScoreMap {
    let scores = map
        .columns()
        .filter_map(|(&c, _)| {
            let f = terrain_features(map, c, cfg.window_radius).ok()?;
            Some((c, traversability_score(f.slope, f.roughness, f.step_height, cfg)))
        })
        .collect();
    ScoreMap {
        resolution: map.resolution(),
        scores,
    }
}
