//! Sequence directory layout and loading.
//!
//! ```text
//! root/
//!   poses.txt          one world-from-sensor pose per frame (mandatory)
//!   intrinsics.txt     camera model (mandatory when any raster is present)
//!   clouds/000000.xyz  or .bin, sensor frame (mandatory per frame)
//!   semantic/000000.pgm  class-index raster
//!   depth/000000.depth   depth raster
//!   labels/000000.pgm    binary traversability raster
//!   scalars/000000.txt   scalar measurements, sensor frame
//!   gt/000000.pgm        ground-truth binary traversability raster
//! ```
//!
//! The camera frame coincides with the sensor frame: x right, y down,
//! z forward. Frame ids are the row numbers of `poses.txt`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Point3, Pose};
use crate::io;
use crate::raster::{Raster, RasterKind};

pub const POSES: &str = "poses.txt";
pub const INTRINSICS: &str = "intrinsics.txt";
pub const CLOUDS: &str = "clouds";
pub const SEMANTIC: &str = "semantic";
pub const DEPTH: &str = "depth";
pub const LABELS: &str = "labels";
pub const SCALARS: &str = "scalars";
pub const GROUND_TRUTH: &str = "gt";

/// File stem of a frame.
pub fn frame_name(id: usize) -> String {
    format!("{id:06}")
}

/// One frame of a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub id: usize,
    pub pose: Pose,
    /// Sensor-frame points.
    pub cloud: Vec<Point3>,
    pub semantic: Option<Raster>,
    pub depth: Option<Raster>,
    pub labels: Option<Raster>,
    /// Sensor-frame positions with their measured values.
    pub scalars: Option<Vec<(Point3, f64)>>,
    pub ground_truth: Option<Raster>,
}

impl ScanRecord {
    pub fn has_rasters(&self) -> bool {
        self.semantic.is_some() || self.depth.is_some() || self.labels.is_some() || self.ground_truth.is_some()
    }
}

/// A loaded sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub root: PathBuf,
    pub intrinsics: Option<CameraIntrinsics>,
    pub records: Vec<ScanRecord>,
}

impl Dataset {
    /// The camera model, required once rasters are involved.
    pub fn require_intrinsics(&self) -> Result<&CameraIntrinsics> {
        self.intrinsics.as_ref().ok_or_else(|| Error::Format {
            file: self.root.join(INTRINSICS),
            msg: "missing camera intrinsics".into(),
        })
    }
}

fn existing(path: PathBuf) -> Option<PathBuf> {
    path.is_file().then_some(path)
}

fn optional_raster(root: &Path, dir: &str, name: &str, ext: &str, kind: RasterKind) -> Result<Option<Raster>> {
    match existing(root.join(dir).join(format!("{name}.{ext}"))) {
        None => Ok(None),
        Some(p) if kind == RasterKind::Depth => io::read_depth(&p).map(Some),
        Some(p) => io::read_pgm(&p, kind).map(Some),
    }
}

fn check_dims(raster: &Option<Raster>, intr: &CameraIntrinsics, what: &str, id: usize) -> Result<()> {
    match raster {
        Some(r) if (r.width(), r.height()) != (intr.width, intr.height) => Err(Error::InvalidMeasurement(format!(
            "{what} raster is {}x{} but the camera is {}x{}",
            r.width(),
            r.height(),
            intr.width,
            intr.height
        ))
        .in_frame(id)),
        _ => Ok(()),
    }
}

/// Number of cloud files in `root/clouds`.
fn count_clouds(root: &Path) -> usize {
    std::fs::read_dir(root.join(CLOUDS))
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .filter(|e| {
                    let p = e.path();
                    matches!(p.extension().and_then(|x| x.to_str()), Some("xyz" | "bin"))
                })
                .count()
        })
        .unwrap_or(0)
}

/// Loads every frame listed in `poses.txt`, in id order.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let poses_path = root.join(POSES);
    if !poses_path.is_file() {
        if count_clouds(root) == 0 {
            return Err(Error::NoFrames(root.to_path_buf()));
        }
        return Err(Error::io(
            &poses_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "missing mandatory file"),
        ));
    }
    let poses = io::read_poses(&poses_path)?;
    if poses.is_empty() {
        return Err(Error::NoFrames(root.to_path_buf()));
    }
    let clouds = count_clouds(root);
    if clouds != poses.len() {
        return Err(Error::Format {
            file: poses_path,
            msg: format!("{} poses but {clouds} point clouds", poses.len()),
        });
    }
    let intrinsics = existing(root.join(INTRINSICS)).map(|p| io::read_intrinsics(&p)).transpose()?;

    let mut records = Vec::with_capacity(poses.len());
    for (id, pose) in poses.into_iter().enumerate() {
        let name = frame_name(id);
        let cloud_path = ["xyz", "bin"]
            .iter()
            .find_map(|ext| existing(root.join(CLOUDS).join(format!("{name}.{ext}"))))
            .ok_or_else(|| {
                Error::io(
                    root.join(CLOUDS).join(format!("{name}.xyz")),
                    std::io::Error::new(std::io::ErrorKind::NotFound, "missing mandatory file"),
                )
            })?;
        let record = ScanRecord {
            id,
            pose,
            cloud: io::read_cloud(&cloud_path)?,
            semantic: optional_raster(root, SEMANTIC, &name, "pgm", RasterKind::ClassIndex)?,
            depth: optional_raster(root, DEPTH, &name, "depth", RasterKind::Depth)?,
            labels: optional_raster(root, LABELS, &name, "pgm", RasterKind::Binary)?,
            scalars: existing(root.join(SCALARS).join(format!("{name}.txt")))
                .map(|p| io::read_scalars(&p))
                .transpose()?,
            ground_truth: optional_raster(root, GROUND_TRUTH, &name, "pgm", RasterKind::Binary)?,
        };
        if record.has_rasters() {
            let intr = intrinsics.as_ref().ok_or_else(|| Error::Format {
                file: root.join(INTRINSICS),
                msg: format!("frame {id} has rasters but the camera intrinsics are missing"),
            })?;
            check_dims(&record.semantic, intr, "semantic", id)?;
            check_dims(&record.depth, intr, "depth", id)?;
            check_dims(&record.labels, intr, "label", id)?;
            check_dims(&record.ground_truth, intr, "ground-truth", id)?;
        }
        records.push(record);
    }
    Ok(Dataset {
        root: root.to_path_buf(),
        intrinsics,
        records,
    })
}

/// Writes a dataset in the layout read by [`load_dataset`]. Clouds are
/// written as binary when `binary_clouds` is set.
pub fn write_dataset(root: &Path, intrinsics: Option<&CameraIntrinsics>, records: &[ScanRecord], binary_clouds: bool) -> Result<()> {
    let mkdir = |d: &Path| std::fs::create_dir_all(d).map_err(|e| Error::io(d, e));
    mkdir(&root.join(CLOUDS))?;
    let poses: Vec<Pose> = records.iter().map(|r| r.pose).collect();
    io::write_poses(&root.join(POSES), &poses)?;
    if let Some(intr) = intrinsics {
        io::write_intrinsics(&root.join(INTRINSICS), intr)?;
    }
    for (expected, r) in records.iter().enumerate() {
        if r.id != expected {
            return Err(Error::InvalidParameter(format!("frame ids must be 0..n in order, found {} at {expected}", r.id)));
        }
        let name = frame_name(r.id);
        if binary_clouds {
            io::write_cloud_bin(&root.join(CLOUDS).join(format!("{name}.bin")), &r.cloud)?;
        } else {
            io::write_xyz(&root.join(CLOUDS).join(format!("{name}.xyz")), &r.cloud)?;
        }
        for (dir, raster) in [(SEMANTIC, &r.semantic), (LABELS, &r.labels), (GROUND_TRUTH, &r.ground_truth)] {
            if let Some(raster) = raster {
                mkdir(&root.join(dir))?;
                io::write_pgm(&root.join(dir).join(format!("{name}.pgm")), raster)?;
            }
        }
        if let Some(d) = &r.depth {
            mkdir(&root.join(DEPTH))?;
            io::write_depth(&root.join(DEPTH).join(format!("{name}.depth")), d)?;
        }
        if let Some(s) = &r.scalars {
            mkdir(&root.join(SCALARS))?;
            io::write_scalars(&root.join(SCALARS).join(format!("{name}.txt")), s)?;
        }
    }
    Ok(())
}
