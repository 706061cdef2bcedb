//! Multi-layer probabilistic voxel mapping for off-road traversability.
//!
//! Each layer is a sparse voxel grid updated with a compactly supported
//! kernel. The semantic layer holds Dirichlet posteriors, the
//! traversability layer Beta posteriors fed by both its own labels and
//! pseudo-measurements deduced from the semantic layer, and an optional
//! Gaussian layer holds a continuous terrain scalar.

pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fixed;
pub mod gaussian;
pub mod geometry;
pub mod grid;
pub mod inference;
pub mod io;
pub mod kdtree;
pub mod kernel;
pub mod labeling;
pub mod pipeline;
pub mod raster;
pub mod sampling;
pub mod semantic;
pub mod synth;
pub mod training;
pub mod traversability;

pub use config::RunConfig;
pub use dataset::{load_dataset, Dataset, ScanRecord};
pub use error::{Error, Result};
pub use fixed::Fixed;
pub use gaussian::{GaussianCell, GaussianEstimate, GaussianLayerConfig};
pub use geometry::{CameraIntrinsics, Point3, Pose};
pub use grid::{CellCoord, VoxelGrid};
pub use kdtree::PointIndex;
pub use io::MapLayer;
pub use kernel::{sparse_kernel_value, KernelParams};
pub use pipeline::{run_eval, run_labeling, run_mapping, MappingResult};
pub use raster::{Raster, RasterKind};
pub use sampling::PseudoSampler;
pub use semantic::{DirichletCell, SemanticConfig, SemanticEstimate};
pub use training::{OneHot, Payload, TrainingPoint, TrainingSet};
pub use traversability::{BetaCell, TraversabilityConfig, TraversabilityEstimate};
