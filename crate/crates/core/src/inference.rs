//! Kernel-inference machinery shared by all layers: which cells a scan
//! touches, and the kernel weights of the training points around each one.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::fixed::Fixed;
use crate::geometry::Point3;
use crate::grid::{CellCoord, VoxelGrid};
use crate::kernel::KernelParams;
use crate::training::TrainingSet;

/// Kernel weights of the training points within support of one cell center,
/// sorted by point id.
pub type CellWeights = Vec<(usize, Fixed)>;

/// Cells whose center lies strictly within `radius` of at least one point,
/// in ascending order.
pub fn affected_cells<L>(grid: &VoxelGrid<L>, points: impl IntoIterator<Item = Point3>, radius: f64) -> Vec<CellCoord> {
    let res = grid.resolution();
    let o = grid.origin();
    let range = |p: f64, o: f64| -> (i32, i32) {
        let lo = ((p - radius - o) / res - 0.5).ceil() as i32;
        let hi = ((p + radius - o) / res - 0.5).floor() as i32;
        (lo, hi)
    };
    let mut set = HashSet::new();
    for p in points {
        let (il, ih) = range(p.x, o.x);
        let (jl, jh) = range(p.y, o.y);
        let (kl, kh) = range(p.z, o.z);
        for i in il..=ih {
            for j in jl..=jh {
                for k in kl..=kh {
                    let c = CellCoord::new(i, j, k);
                    if grid.center(c).distance(&p) < radius {
                        set.insert(c);
                    }
                }
            }
        }
    }
    let mut cells: Vec<_> = set.into_iter().collect();
    cells.sort_unstable();
    cells
}

/// Kernel weights around every affected cell, computed through the index.
/// Cells are independent, so the work is spread across threads; the result
/// is ordered by cell.
pub fn cell_weights<L: Sync>(grid: &VoxelGrid<L>, set: &TrainingSet, kernel: &KernelParams) -> Vec<(CellCoord, CellWeights)> {
    if set.is_empty() {
        return Vec::new();
    }
    let l = kernel.length_scale();
    let cells = affected_cells(grid, set.points().iter().map(|p| p.position), l);
    cells
        .into_par_iter()
        .filter_map(|c| {
            let center = grid.center(c);
            let mut w = Vec::new();
            set.index().for_each_within(center, l, |id, d| {
                w.push((id, Fixed::from_f64(kernel.eval(d)).expect("kernel value is bounded")));
            });
            if w.is_empty() {
                return None;
            }
            w.sort_unstable_by_key(|&(id, _)| id);
            Some((c, w))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::TrainingPoint;

    #[test]
    fn affected_cells_match_exhaustive_scan() {
        let grid: VoxelGrid<()> = VoxelGrid::new(0.1, Point3::new(0.03, -0.02, 0.0)).unwrap();
        let pts = [Point3::new(0.12, 0.31, -0.07), Point3::new(0.5, 0.5, 0.5)];
        let got = affected_cells(&grid, pts, 0.3);
        let mut want = Vec::new();
        for i in -10..20 {
            for j in -10..20 {
                for k in -10..20 {
                    let c = CellCoord::new(i, j, k);
                    if pts.iter().any(|p| grid.center(c).distance(p) < 0.3) {
                        want.push(c);
                    }
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn weights_sorted_by_id() {
        let grid: VoxelGrid<()> = VoxelGrid::new(0.1, Point3::ORIGIN).unwrap();
        let pts: Vec<_> = (0..50)
            .map(|i| TrainingPoint::binary(Point3::new(0.05 + 0.001 * (49 - i) as f64, 0.05, 0.05), 1))
            .collect();
        let set = TrainingSet::new(pts).unwrap();
        for (_, w) in cell_weights(&grid, &set, &KernelParams::default()) {
            assert!(w.windows(2).all(|p| p[0].0 < p[1].0));
        }
    }
}
