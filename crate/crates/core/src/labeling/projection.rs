use crate::error::Result;
use crate::geometry::{backproject_pixel, CameraIntrinsics, Pose};
use crate::raster::{Raster, RasterKind, TRAVERSABLE, UNTRAVERSABLE};

use super::ScoreMap;

/// Labels every valid-depth pixel by thresholding the score of the column it
/// backprojects into. Pixels with invalid depth or hitting unscored columns
/// stay invalid.
pub fn project_labels_to_image(
    scores: &ScoreMap,
    depth: &Raster,
    pose: &Pose,
    intr: &CameraIntrinsics,
    threshold: f64,
) -> Result<Raster> {
    let mut out = Raster::invalid(RasterKind::Binary, depth.width(), depth.height())?;
    for (col, row, d) in depth.valid_pixels() {
        let p = backproject_pixel(col as f64, row as f64, d, pose, intr)?;
        if let Some(s) = scores.score_at(p.x, p.y) {
            let label = if s >= threshold { TRAVERSABLE } else { UNTRAVERSABLE };
            out.set(col, row, label as f64)?;
        }
    }
    Ok(out)
}

/// Relabels traversable pixels whose semantic class is never traversable.
pub fn semantic_noise_filter(labels: &Raster, semantics: &Raster, untraversable_classes: &[usize]) -> Result<Raster> {
    labels.same_dims(semantics)?;
    let mut out = labels.clone();
    for (col, row, v) in labels.valid_pixels() {
        if v != TRAVERSABLE as f64 {
            continue;
        }
        if let Some(class) = semantics.class_at(col, row) {
            if untraversable_classes.contains(&class) {
                out.set(col, row, UNTRAVERSABLE as f64)?;
            }
        }
    }
    Ok(out)
}
