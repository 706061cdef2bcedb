//! Pixel-wise evaluation: projecting a traversability map into an image,
//! confusion matrices and IoU, and the multi-task performance delta.

use crate::error::{Error, Result};
use crate::geometry::{backproject_pixel, CameraIntrinsics, Pose};
use crate::grid::VoxelGrid;
use crate::raster::{Raster, RasterKind, TRAVERSABLE, UNTRAVERSABLE};
use crate::traversability::{query_traversability, BetaCell};

/// Point estimate thresholded when rendering a traversability map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Mean,
    /// Posterior mode where defined, the mean elsewhere.
    MapOrMean,
}

/// Renders binary labels by backprojecting every valid-depth pixel into the
/// map. Pixels landing in unmapped cells are invalid.
pub fn project_map_to_image_labels(
    grid: &VoxelGrid<BetaCell>,
    depth: &Raster,
    pose: &Pose,
    intr: &CameraIntrinsics,
    threshold: f64,
    estimator: Estimator,
) -> Result<Raster> {
    let mut out = Raster::invalid(RasterKind::Binary, depth.width(), depth.height())?;
    for (col, row, d) in depth.valid_pixels() {
        let p = backproject_pixel(col as f64, row as f64, d, pose, intr)?;
        if let Some(cell) = grid.at(p) {
            let est = query_traversability(cell);
            let value = match estimator {
                Estimator::Mean => est.mean,
                Estimator::MapOrMean => est.map_or_mean(),
            };
            let label = if value >= threshold { TRAVERSABLE } else { UNTRAVERSABLE };
            out.set(col, row, label as f64)?;
        }
    }
    Ok(out)
}

/// Counts indexed `[ground truth][prediction]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    ignored: u64,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; num_classes]; num_classes],
            ignored: 0,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    fn grow(&mut self, n: usize) {
        if n > self.counts.len() {
            for row in &mut self.counts {
                row.resize(n, 0);
            }
            self.counts.resize(n, vec![0; n]);
        }
    }

    pub fn record(&mut self, gt: usize, pred: usize) {
        self.grow(gt.max(pred) + 1);
        self.counts[gt][pred] += 1;
    }

    pub fn ignore(&mut self) {
        self.ignored += 1;
    }

    /// Accumulates every pixel valid in both rasters; the rest count as
    /// ignored.
    pub fn accumulate(&mut self, pred: &Raster, gt: &Raster) -> Result<()> {
        pred.same_dims(gt)?;
        for i in 0..pred.len() {
            match (pred.get_index(i), gt.get_index(i)) {
                (Some(p), Some(g)) => self.record(g as usize, p as usize),
                _ => self.ignore(),
            }
        }
        Ok(())
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts.get(gt).and_then(|r| r.get(pred)).copied().unwrap_or(0)
    }

    pub fn ignored(&self) -> u64 {
        self.ignored
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// IoU per class; `None` for classes with an empty union.
    pub fn iou(&self) -> Vec<Option<f64>> {
        let n = self.num_classes();
        (0..n)
            .map(|c| {
                let tp = self.counts[c][c];
                let fn_: u64 = self.counts[c].iter().sum::<u64>() - tp;
                let fp: u64 = (0..n).map(|g| self.counts[g][c]).sum::<u64>() - tp;
                let union = tp + fp + fn_;
                (union > 0).then(|| tp as f64 / union as f64)
            })
            .collect()
    }

    /// Mean IoU over the classes present in the ground truth.
    pub fn mean_iou(&self) -> Result<f64> {
        if self.total() == 0 {
            return Err(Error::NoEvaluablePixels);
        }
        let iou = self.iou();
        let present: Vec<f64> = (0..self.num_classes())
            .filter(|&c| self.counts[c].iter().any(|&v| v > 0))
            .filter_map(|c| iou[c])
            .collect();
        Ok(present.iter().sum::<f64>() / present.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IouReport {
    pub per_class: Vec<Option<f64>>,
    pub mean: f64,
    pub confusion: ConfusionMatrix,
}

/// IoU of `pred` against `gt` over pixels valid in both.
pub fn confusion_and_iou(pred: &Raster, gt: &Raster) -> Result<IouReport> {
    let mut cm = ConfusionMatrix::new(0);
    cm.accumulate(pred, gt)?;
    report(cm)
}

pub fn report(confusion: ConfusionMatrix) -> Result<IouReport> {
    let mean = confusion.mean_iou()?;
    Ok(IouReport {
        per_class: confusion.iou(),
        mean,
        confusion,
    })
}

/// One task's score and whether larger values are better.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaskScore {
    pub value: f64,
    pub higher_is_better: bool,
}

impl TaskScore {
    pub fn higher(value: f64) -> Self {
        TaskScore {
            value,
            higher_is_better: true,
        }
    }

    pub fn lower(value: f64) -> Self {
        TaskScore {
            value,
            higher_is_better: false,
        }
    }
}

/// Average signed relative improvement of multi-task over single-task
/// scores, as a fraction. Positive means the multi-task model is better.
pub fn mtl_delta(mtl: &[TaskScore], stl: &[TaskScore]) -> Result<f64> {
    if mtl.len() != stl.len() || mtl.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "need equal, non-zero task counts, got {} and {}",
            mtl.len(),
            stl.len()
        )));
    }
    let mut sum = 0.0;
    for (m, s) in mtl.iter().zip(stl) {
        if s.value == 0.0 || !s.value.is_finite() || !m.value.is_finite() {
            return Err(Error::InvalidParameter(format!("single-task score must be finite and non-zero, got {}", s.value)));
        }
        let sign = if m.higher_is_better { 1.0 } else { -1.0 };
        sum += sign * (m.value - s.value) / s.value;
    }
    Ok(sum / mtl.len() as f64)
}
