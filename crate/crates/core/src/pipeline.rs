//! End-to-end runs over a loaded sequence: label generation, mapping,
//! evaluation and export.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::config::RunConfig;
use crate::dataset::ScanRecord;
use crate::error::{Error, Result};
use crate::eval::{project_map_to_image_labels, report, ConfusionMatrix, IouReport};
use crate::gaussian::{query_gaussian, update_gaussian, update_traversability_threeway, GaussianCell, GaussianLayerConfig};
use crate::geometry::{project_point, CameraIntrinsics, Pose};
use crate::grid::VoxelGrid;
use crate::io::{self, MapLayer};
use crate::kernel::KernelParams;
use crate::labeling::{build_elevation_map, project_labels_to_image, semantic_noise_filter, traversability_map};
use crate::raster::Raster;
use crate::sampling::PseudoSampler;
use crate::semantic::{query_semantic, update_semantic, DirichletCell, SemanticConfig};
use crate::training::{TrainingPoint, TrainingSet};
use crate::traversability::{query_traversability, update_traversability, BetaCell, TraversabilityConfig};

pub const SEMANTIC_MAP: &str = "semantic.mlmap";
pub const TRAVERSABILITY_MAP: &str = "traversability.mlmap";
pub const FRICTION_MAP: &str = "friction.mlmap";
pub const MAPPING_REPORT: &str = "mapping.txt";

/// Per-frame training sets built from a record.
#[derive(Clone, Debug, Default)]
pub struct FrameScans {
    pub semantic: Option<TrainingSet>,
    pub binary: Option<TrainingSet>,
    pub scalar: Option<TrainingSet>,
}

/// Attaches raster labels to cloud points by projecting every `stride`-th
/// point into the camera. Points outside the image or on invalid pixels
/// are skipped; semantic classes must be below `num_classes`.
pub fn frame_training_sets(
    record: &ScanRecord,
    intr: Option<&CameraIntrinsics>,
    num_classes: usize,
    stride: usize,
) -> Result<FrameScans> {
    let mut semantic = Vec::new();
    let mut binary = Vec::new();
    if record.semantic.is_some() || record.labels.is_some() {
        let intr = intr.ok_or_else(|| Error::InvalidParameter("rasters present but no camera intrinsics".into()))?;
        let camera = Pose::identity();
        for p in record.cloud.iter().step_by(stride.max(1)) {
            let Some((col, row)) = project_point(*p, &camera, intr).pixel_in(intr) else {
                continue;
            };
            let world = record.pose.transform_point(*p);
            if let Some(class) = record.semantic.as_ref().and_then(|r| r.class_at(col, row)) {
                semantic.push(TrainingPoint::semantic(world, class, num_classes)?);
            }
            if let Some(z) = record.labels.as_ref().and_then(|r| r.get(col, row)) {
                binary.push(TrainingPoint::binary(world, z as u8));
            }
        }
    }
    let scalar = record.scalars.as_ref().map(|values| {
        values
            .iter()
            .map(|(p, f)| TrainingPoint::scalar(record.pose.transform_point(*p), *f))
            .collect::<Vec<_>>()
    });
    Ok(FrameScans {
        semantic: record.semantic.is_some().then(|| TrainingSet::new(semantic)).transpose()?,
        binary: record.labels.is_some().then(|| TrainingSet::new(binary)).transpose()?,
        scalar: scalar.map(TrainingSet::new).transpose()?,
    })
}

/// What happened to one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameLog {
    pub id: usize,
    pub semantic_points: usize,
    pub label_points: usize,
    pub scalar_points: usize,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingReport {
    pub frames: Vec<FrameLog>,
    pub semantic_cells: usize,
    pub traversability_cells: usize,
    pub friction_cells: usize,
}

impl MappingReport {
    /// Deterministic summary; wall-clock times are left out.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sum = |f: fn(&FrameLog) -> usize| self.frames.iter().map(f).sum::<usize>();
        writeln!(out, "frames = {}", self.frames.len()).unwrap();
        writeln!(out, "semantic_points = {}", sum(|f| f.semantic_points)).unwrap();
        writeln!(out, "label_points = {}", sum(|f| f.label_points)).unwrap();
        writeln!(out, "scalar_points = {}", sum(|f| f.scalar_points)).unwrap();
        writeln!(out, "semantic_cells = {}", self.semantic_cells).unwrap();
        writeln!(out, "traversability_cells = {}", self.traversability_cells).unwrap();
        writeln!(out, "friction_cells = {}", self.friction_cells).unwrap();
        for f in &self.frames {
            writeln!(
                out,
                "frame.{} = semantic {} labels {} scalars {}",
                f.id, f.semantic_points, f.label_points, f.scalar_points
            )
            .unwrap();
        }
        out
    }

    pub fn total_time(&self) -> Duration {
        self.frames.iter().map(|f| f.elapsed).sum()
    }
}

/// Final grids of a mapping run.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingResult {
    pub semantic: VoxelGrid<DirichletCell>,
    pub traversability: VoxelGrid<BetaCell>,
    /// Present once any frame carried scalar measurements.
    pub friction: Option<VoxelGrid<GaussianCell>>,
    pub report: MappingReport,
}

impl MappingResult {
    /// Writes the grids and the deterministic report into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_map(&dir.join(SEMANTIC_MAP), &MapLayer::Semantic(self.semantic.clone()))?;
        io::write_map(&dir.join(TRAVERSABILITY_MAP), &MapLayer::Traversability(self.traversability.clone()))?;
        if let Some(f) = &self.friction {
            io::write_map(&dir.join(FRICTION_MAP), &MapLayer::Gaussian(f.clone()))?;
        }
        let path = dir.join(MAPPING_REPORT);
        std::fs::write(&path, self.report.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Incremental mapper; frames must be fed in order.
pub struct Mapper {
    kernel: KernelParams,
    sem_cfg: SemanticConfig,
    trav_cfg: TraversabilityConfig,
    friction_cfg: GaussianLayerConfig,
    fuse_friction: bool,
    stride: usize,
    seed: u64,
    intr: Option<CameraIntrinsics>,
    semantic: VoxelGrid<DirichletCell>,
    traversability: VoxelGrid<BetaCell>,
    friction: VoxelGrid<GaussianCell>,
    saw_scalars: bool,
    frames: Vec<FrameLog>,
}

impl Mapper {
    pub fn new(cfg: &RunConfig, intr: Option<CameraIntrinsics>) -> Result<Self> {
        cfg.validate()?;
        Ok(Mapper {
            kernel: cfg.kernel_params()?,
            sem_cfg: cfg.semantic_config()?,
            trav_cfg: cfg.traversability_config()?,
            friction_cfg: cfg.friction_config()?,
            fuse_friction: cfg.friction.fuse,
            stride: cfg.mapping.point_stride,
            seed: cfg.seed,
            intr,
            semantic: VoxelGrid::new(cfg.map.resolution, cfg.origin())?,
            traversability: VoxelGrid::new(cfg.map.resolution, cfg.origin())?,
            friction: VoxelGrid::new(cfg.map.resolution, cfg.origin())?,
            saw_scalars: false,
            frames: Vec::new(),
        })
    }

    pub fn process(&mut self, record: &ScanRecord) -> Result<&FrameLog> {
        let start = Instant::now();
        self.process_inner(record).map_err(|e| e.in_frame(record.id))?;
        let log = self.frames.last_mut().expect("frame logged");
        log.elapsed = start.elapsed();
        log::info!(
            "frame {}: {} semantic, {} label, {} scalar points in {:.1?}",
            log.id,
            log.semantic_points,
            log.label_points,
            log.scalar_points,
            log.elapsed
        );
        Ok(log)
    }

    fn process_inner(&mut self, record: &ScanRecord) -> Result<()> {
        let scans = frame_training_sets(record, self.intr.as_ref(), self.sem_cfg.num_classes(), self.stride)?;
        let sampler = PseudoSampler::new(self.seed, record.id as u64);
        let len = |s: &Option<TrainingSet>| s.as_ref().map_or(0, |s| s.len());

        if let Some(s) = &scans.semantic {
            update_semantic(&mut self.semantic, s, &self.sem_cfg, &self.kernel)?;
        }
        // With friction fusion the scalar layer is brought up to date first,
        // like the semantic layer, so both sources reflect this frame.
        if self.fuse_friction {
            self.update_friction(&scans)?;
        }
        if let Some(b) = &scans.binary {
            if self.fuse_friction {
                update_traversability_threeway(
                    &mut self.traversability,
                    &self.semantic,
                    &self.friction,
                    b,
                    &self.sem_cfg,
                    &self.trav_cfg,
                    &self.friction_cfg,
                    &self.kernel,
                    &sampler,
                )?;
            } else {
                update_traversability(
                    &mut self.traversability,
                    &self.semantic,
                    b,
                    &self.sem_cfg,
                    &self.trav_cfg,
                    &self.kernel,
                    &sampler,
                )?;
            }
        }
        if !self.fuse_friction {
            self.update_friction(&scans)?;
        }

        self.frames.push(FrameLog {
            id: record.id,
            semantic_points: len(&scans.semantic),
            label_points: len(&scans.binary),
            scalar_points: len(&scans.scalar),
            elapsed: Duration::ZERO,
        });
        Ok(())
    }

    fn update_friction(&mut self, scans: &FrameScans) -> Result<()> {
        if let Some(s) = &scans.scalar {
            self.saw_scalars = true;
            update_gaussian(&mut self.friction, s, &self.kernel)?;
        }
        Ok(())
    }

    pub fn traversability(&self) -> &VoxelGrid<BetaCell> {
        &self.traversability
    }

    pub fn semantic(&self) -> &VoxelGrid<DirichletCell> {
        &self.semantic
    }

    pub fn finish(self) -> MappingResult {
        let report = MappingReport {
            frames: self.frames,
            semantic_cells: self.semantic.len(),
            traversability_cells: self.traversability.len(),
            friction_cells: self.friction.len(),
        };
        MappingResult {
            semantic: self.semantic,
            traversability: self.traversability,
            friction: self.saw_scalars.then_some(self.friction),
            report,
        }
    }
}

/// Maps every record in order.
pub fn run_mapping(records: &[ScanRecord], cfg: &RunConfig, intr: Option<&CameraIntrinsics>) -> Result<MappingResult> {
    let mut mapper = Mapper::new(cfg, intr.copied())?;
    for r in records {
        mapper.process(r)?;
    }
    Ok(mapper.finish())
}

/// Generates traversability labels for every frame with a depth raster.
/// Frame `k` uses an elevation map built from frames `k` onward, up to the
/// configured window; semantic rasters, where present, veto traversable
/// labels on classes listed as never traversable.
pub fn run_labeling(records: &[ScanRecord], cfg: &RunConfig, intr: &CameraIntrinsics) -> Result<Vec<Option<Raster>>> {
    let lc = &cfg.labeling;
    lc.validate()?;
    let mut out = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        let Some(depth) = &rec.depth else {
            out.push(None);
            continue;
        };
        let window = &records[k..(k + lc.window_frames).min(records.len())];
        let clouds: Vec<_> = window.iter().map(|r| r.cloud.clone()).collect();
        let poses: Vec<_> = window.iter().map(|r| r.pose).collect();
        let labels = (|| {
            let elevation = build_elevation_map(&clouds, &poses, lc)?;
            let scores = traversability_map(&elevation, lc);
            let labels = project_labels_to_image(&scores, depth, &rec.pose, intr, lc.threshold)?;
            match &rec.semantic {
                Some(sem) if !lc.untraversable_classes.is_empty() => {
                    semantic_noise_filter(&labels, sem, &lc.untraversable_classes)
                }
                _ => Ok(labels),
            }
        })()
        .map_err(|e| e.in_frame(rec.id))?;
        out.push(Some(labels));
    }
    Ok(out)
}

/// Map and input-raster accuracy against ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub frames: usize,
    /// The traversability map projected into each frame.
    pub map: IouReport,
    /// The label rasters the map was built from, when present.
    pub raster: Option<IouReport>,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("frames = {}\n", self.frames);
        let mut section = |name: &str, r: &IouReport| {
            writeln!(out, "{name}.mean_iou = {:.6}", r.mean).unwrap();
            for (c, iou) in r.per_class.iter().enumerate() {
                match iou {
                    Some(v) => writeln!(out, "{name}.iou.{c} = {v:.6}").unwrap(),
                    None => writeln!(out, "{name}.iou.{c} = nan").unwrap(),
                }
            }
            writeln!(out, "{name}.evaluated_pixels = {}", r.confusion.total()).unwrap();
            writeln!(out, "{name}.ignored_pixels = {}", r.confusion.ignored()).unwrap();
        };
        section("map", &self.map);
        if let Some(r) = &self.raster {
            section("raster", r);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,map_iou,raster_iou\n");
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
        let n = self.map.per_class.len().max(self.raster.as_ref().map_or(0, |r| r.per_class.len()));
        for c in 0..n {
            let m = self.map.per_class.get(c).copied().flatten();
            let r = self.raster.as_ref().and_then(|r| r.per_class.get(c).copied().flatten());
            writeln!(out, "{c},{},{}", cell(m), cell(r)).unwrap();
        }
        writeln!(out, "mean,{:.6},{}", self.map.mean, cell(self.raster.as_ref().map(|r| r.mean))).unwrap();
        out
    }
}

/// Projects the map into every frame with depth and ground truth.
pub fn run_eval(
    records: &[ScanRecord],
    grid: &VoxelGrid<BetaCell>,
    cfg: &RunConfig,
    intr: &CameraIntrinsics,
) -> Result<EvalReport> {
    let mut map_cm = ConfusionMatrix::new(2);
    let mut raster_cm = ConfusionMatrix::new(2);
    let mut have_rasters = false;
    let mut frames = 0;
    for rec in records {
        let (Some(depth), Some(gt)) = (&rec.depth, &rec.ground_truth) else {
            continue;
        };
        frames += 1;
        let pred = project_map_to_image_labels(
            grid,
            depth,
            &rec.pose,
            intr,
            cfg.traversability.threshold,
            cfg.traversability.estimator,
        )
        .map_err(|e| e.in_frame(rec.id))?;
        map_cm.accumulate(&pred, gt).map_err(|e| e.in_frame(rec.id))?;
        if let Some(labels) = &rec.labels {
            have_rasters = true;
            raster_cm.accumulate(labels, gt).map_err(|e| e.in_frame(rec.id))?;
        }
    }
    Ok(EvalReport {
        frames,
        map: report(map_cm)?,
        raster: if have_rasters { Some(report(raster_cm)?) } else { None },
    })
}

/// One row per cell: `x,y,z,value,variance` at the cell center. The value
/// is the MAP class for semantic layers, the posterior mean for
/// traversability and friction layers; the variance belongs to that value.
pub fn export_csv(layer: &MapLayer, friction: &GaussianLayerConfig) -> String {
    let mut out = String::from("x,y,z,value,variance\n");
    let mut row = |c: crate::geometry::Point3, v: f64, var: f64| {
        writeln!(out, "{},{},{},{},{}", c.x, c.y, c.z, v, var).unwrap();
    };
    match layer {
        MapLayer::Semantic(g) => {
            for (c, cell) in g.iter_sorted() {
                let e = query_semantic(cell);
                row(g.center(*c), e.map_class as f64, e.variance[e.map_class]);
            }
        }
        MapLayer::Traversability(g) => {
            for (c, cell) in g.iter_sorted() {
                let e = query_traversability(cell);
                row(g.center(*c), e.mean, e.variance);
            }
        }
        MapLayer::Gaussian(g) => {
            for (c, cell) in g.iter_sorted() {
                let e = query_gaussian(cell, friction);
                row(g.center(*c), e.mean, e.variance);
            }
        }
    }
    out
}
