//! Synthetic corridor scenes with known ground truth.
//!
//! The world is flat ground (class 0, traversable) between two walls
//! (class 1) with box-shaped step obstacles (class 2) on the ground. A
//! camera drives down the corridor, pitched toward the ground, and every
//! frame is rendered by ray casting: depth, a sensor-frame cloud with one
//! point per valid pixel, ground truth, a semantic raster with independent
//! per-pixel class noise and a traversability raster corrupted by random
//! image-space blobs, mimicking the patchy errors of a segmentation network.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::RunConfig;
use crate::dataset::{write_dataset, ScanRecord};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Point3, Pose};
use crate::raster::{Raster, RasterKind, TRAVERSABLE, UNTRAVERSABLE};

pub const GROUND: usize = 0;
pub const WALL: usize = 1;
pub const OBSTACLE: usize = 2;
pub const NUM_CLASSES: usize = 3;

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// Entry distance along a ray, if the ray hits the box in front of the
    /// origin.
    fn hit(&self, o: Point3, d: Point3) -> Option<f64> {
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for (oa, da, lo, hi) in [
            (o.x, d.x, self.min.x, self.max.x),
            (o.y, d.y, self.min.y, self.max.y),
            (o.z, d.z, self.min.z, self.max.z),
        ] {
            if da == 0.0 {
                if oa < lo || oa > hi {
                    return None;
                }
                continue;
            }
            let (a, b) = ((lo - oa) / da, (hi - oa) / da);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1 && t0 > 0.0).then_some(t0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    /// Distance driven between frames, meters.
    pub step: f64,
    pub camera_height: f64,
    /// Downward pitch of the camera, radians.
    pub pitch: f64,
    pub corridor_half_width: f64,
    pub wall_height: f64,
    pub max_range: f64,
    pub obstacles: Vec<Aabb>,
    /// Fraction of semantic pixels keeping their true class.
    pub semantic_accuracy: f64,
    /// Fraction of traversability pixels keeping their true label.
    pub label_accuracy: f64,
    /// Blob radii in pixels for the label corruption.
    pub blob_radius: (f64, f64),
    /// Scalar measurements per frame; zero disables them.
    pub scalars_per_frame: usize,
    pub scalar_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            frames: 10,
            width: 64,
            height: 48,
            focal: 40.0,
            step: 0.25,
            camera_height: 1.0,
            pitch: 0.45,
            corridor_half_width: 2.0,
            wall_height: 2.0,
            max_range: 15.0,
            obstacles: vec![
                Aabb {
                    min: Point3::new(3.0, -0.6, 0.0),
                    max: Point3::new(3.8, 0.5, 0.3),
                },
                Aabb {
                    min: Point3::new(6.5, 0.7, 0.0),
                    max: Point3::new(7.2, 1.5, 0.3),
                },
            ],
            semantic_accuracy: 0.95,
            label_accuracy: 0.75,
            blob_radius: (2.0, 6.0),
            scalars_per_frame: 200,
            scalar_noise: 0.05,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return bad("frames and image size must be positive".into());
        }
        for (name, v) in [("semantic_accuracy", self.semantic_accuracy), ("label_accuracy", self.label_accuracy)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if !(self.blob_radius.0 > 0.0 && self.blob_radius.0 <= self.blob_radius.1) {
            return bad(format!("bad blob radius range {:?}", self.blob_radius));
        }
        if !(self.scalar_noise >= 0.0 && self.scalar_noise.is_finite()) {
            return bad(format!("scalar noise must be non-negative, got {}", self.scalar_noise));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::new(
            self.focal,
            self.focal,
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
            self.width,
            self.height,
        )
    }

    /// World-from-camera pose of a frame: driving along +x, looking ahead
    /// and down.
    pub fn pose(&self, frame: usize) -> Pose {
        let (s, c) = self.pitch.sin_cos();
        // columns: camera x (right), y (down), z (forward) in world axes
        let rotation = [[0.0, -s, c], [-1.0, 0.0, 0.0], [0.0, -c, -s]];
        let t = Point3::new(frame as f64 * self.step, 0.0, self.camera_height);
        Pose::new(rotation, t).expect("rotation is orthonormal")
    }

    /// First surface hit by a world ray and its class.
    fn cast(&self, o: Point3, d: Point3) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        let mut consider = |t: f64, class: usize| {
            if t > 0.0 && t <= self.max_range && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, class));
            }
        };
        if d.z < 0.0 {
            consider(-o.z / d.z, GROUND);
        }
        if d.y != 0.0 {
            for wall_y in [self.corridor_half_width, -self.corridor_half_width] {
                let t = (wall_y - o.y) / d.y;
                if (o.z + t * d.z) <= self.wall_height && (o.z + t * d.z) >= 0.0 {
                    consider(t, WALL);
                }
            }
        }
        for b in &self.obstacles {
            if let Some(t) = b.hit(o, d) {
                consider(t, OBSTACLE);
            }
        }
        best
    }
}

pub fn is_traversable_class(class: usize) -> bool {
    class == GROUND
}

/// Rendered scene: the dataset records plus the camera model.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthScene {
    pub intrinsics: CameraIntrinsics,
    pub records: Vec<ScanRecord>,
}

/// Renders one frame without noise: depth, class raster and the cloud.
fn render(cfg: &SynthConfig, intr: &CameraIntrinsics, pose: &Pose) -> (Raster, Raster, Vec<Point3>) {
    let n = cfg.width * cfg.height;
    let mut depth = vec![0.0; n];
    let mut class = vec![0.0; n];
    let mut valid = vec![false; n];
    let mut cloud = Vec::new();
    for row in 0..cfg.height {
        for col in 0..cfg.width {
            // camera ray with unit forward component, so t is the depth
            let ray = Point3::new((col as f64 - intr.cx) / intr.fx, (row as f64 - intr.cy) / intr.fy, 1.0);
            if let Some((t, c)) = cfg.cast(pose.translation(), pose.rotate(ray)) {
                let i = row * cfg.width + col;
                depth[i] = t;
                class[i] = c as f64;
                valid[i] = true;
                cloud.push(ray * t);
            }
        }
    }
    let depth = Raster::from_values(RasterKind::Depth, cfg.width, cfg.height, depth).expect("sizes match");
    let class = Raster::new(RasterKind::ClassIndex, cfg.width, cfg.height, class, valid).expect("sizes match");
    (depth, class, cloud)
}

fn corrupt_classes(truth: &Raster, accuracy: f64, rng: &mut ChaCha8Rng) -> Raster {
    let mut out = truth.clone();
    for (col, row, c) in truth.valid_pixels() {
        if rng.random::<f64>() >= accuracy {
            let shift = rng.random_range(1..NUM_CLASSES);
            out.set(col, row, ((c as usize + shift) % NUM_CLASSES) as f64).expect("in bounds");
        }
    }
    out
}

/// Flips labels inside random discs until the requested fraction of valid
/// pixels is wrong.
fn corrupt_labels(truth: &Raster, accuracy: f64, radius: (f64, f64), rng: &mut ChaCha8Rng) -> Raster {
    let (w, h) = (truth.width(), truth.height());
    let target = ((1.0 - accuracy) * truth.valid_count() as f64).round() as usize;
    let mut flip = vec![false; w * h];
    let mut flipped = 0;
    while flipped < target {
        let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let r = rng.random_range(radius.0..=radius.1);
        let (r0, r1) = ((cy - r).floor().max(0.0) as usize, ((cy + r).ceil() as usize).min(h - 1));
        let (c0, c1) = ((cx - r).floor().max(0.0) as usize, ((cx + r).ceil() as usize).min(w - 1));
        'disc: for row in r0..=r1 {
            for col in c0..=c1 {
                let i = row * w + col;
                if flipped >= target {
                    break 'disc;
                }
                let inside = (col as f64 - cx).hypot(row as f64 - cy) <= r;
                if inside && !flip[i] && truth.mask()[i] {
                    flip[i] = true;
                    flipped += 1;
                }
            }
        }
    }
    let mut out = truth.clone();
    for (col, row, z) in truth.valid_pixels() {
        if flip[row * w + col] {
            out.set(col, row, 1.0 - z).expect("in bounds");
        }
    }
    out
}

/// Friction-like scalar: high on open ground, low on obstacle tops.
fn scalar_truth(class: usize) -> Option<f64> {
    match class {
        GROUND => Some(0.8),
        OBSTACLE => Some(0.3),
        _ => None,
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthScene> {
    cfg.validate()?;
    let intr = cfg.intrinsics()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.scalar_noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut records = Vec::with_capacity(cfg.frames);
    for id in 0..cfg.frames {
        let pose = cfg.pose(id);
        let (depth, classes, cloud) = render(cfg, &intr, &pose);
        let mut gt = Raster::invalid(RasterKind::Binary, cfg.width, cfg.height)?;
        for (col, row, c) in classes.valid_pixels() {
            let z = if is_traversable_class(c as usize) { TRAVERSABLE } else { UNTRAVERSABLE };
            gt.set(col, row, z as f64)?;
        }
        let semantic = corrupt_classes(&classes, cfg.semantic_accuracy, &mut rng);
        let labels = corrupt_labels(&gt, cfg.label_accuracy, cfg.blob_radius, &mut rng);

        let candidates: Vec<(usize, usize, f64)> = classes.valid_pixels().collect();
        let scalars = (cfg.scalars_per_frame > 0).then(|| {
            let mut values = Vec::with_capacity(cfg.scalars_per_frame);
            for _ in 0..cfg.scalars_per_frame {
                if candidates.is_empty() {
                    break;
                }
                let (col, row, c) = candidates[rng.random_range(0..candidates.len())];
                if let Some(f) = scalar_truth(c as usize) {
                    let ray = Point3::new((col as f64 - intr.cx) / intr.fx, (row as f64 - intr.cy) / intr.fy, 1.0);
                    let d = depth.get(col, row).expect("valid pixel has depth");
                    values.push((ray * d, f + noise.sample(&mut rng)));
                }
            }
            values
        });

        records.push(ScanRecord {
            id,
            pose,
            cloud,
            semantic: Some(semantic),
            depth: Some(depth),
            labels: Some(labels),
            scalars,
            ground_truth: Some(gt),
        });
    }
    Ok(SynthScene { intrinsics: intr, records })
}

/// Run configuration matching the synthetic world's class layout.
pub fn run_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    cfg.semantic.num_classes = NUM_CLASSES;
    cfg.semantic.traversable_classes = vec![GROUND];
    cfg.labeling.untraversable_classes = vec![WALL];
    cfg.friction.prior_mean = 0.5;
    cfg.friction.d_low = 0.6;
    cfg.friction.d_high = 1.5;
    cfg
}

/// Writes the scene as a dataset plus a `config.toml` pointing at it.
pub fn write_scene(dir: &Path, scene: &SynthScene, cfg: &RunConfig) -> Result<()> {
    write_dataset(dir, Some(&scene.intrinsics), &scene.records, false)?;
    let mut cfg = cfg.clone();
    cfg.dataset.root = Some(".".into());
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml()).map_err(|e| Error::io(path, e))
}
