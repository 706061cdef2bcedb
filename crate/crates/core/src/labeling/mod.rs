//! Self-supervised traversability labels from geometry: an elevation map is
//! built from posed point clouds, each cell is scored from its slope,
//! roughness and step height, and the scores are projected into the image
//! through the depth channel. Semantics then remove false positives.

mod config;
mod elevation;
mod features;
mod projection;

pub use config::TraversabilityLabelConfig;
pub use elevation::{build_elevation_map, ColumnCoord, ElevationMap, HeightStats};
pub use features::{terrain_features, traversability_map, traversability_score, ScoreMap, TerrainFeatures};
pub use projection::{project_labels_to_image, semantic_noise_filter};
