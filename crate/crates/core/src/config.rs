//! Run configuration.
//!
//! A TOML file; every key is optional and falls back to the defaults below.
//! Dotted keys keep the file flat:
//!
//! ```toml
//! seed = 7
//! kernel.length_scale = 0.3
//! semantic.num_classes = 3
//! semantic.traversable_classes = [0]
//! traversability.pseudo_measurements = true
//! ```
//!
//! Unknown keys are rejected and every value is checked against the
//! constraints of the module that consumes it when the file is loaded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Estimator;
use crate::gaussian::GaussianLayerConfig;
use crate::geometry::Point3;
use crate::kernel::KernelParams;
use crate::labeling::TraversabilityLabelConfig;
use crate::semantic::{SemanticConfig, DEFAULT_PRIOR};
use crate::traversability::TraversabilityConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub length_scale: f64,
    pub scale: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        let k = KernelParams::default();
        KernelSection {
            length_scale: k.length_scale(),
            scale: k.scale(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSection {
    pub resolution: f64,
    pub origin: [f64; 3],
}

impl Default for MapSection {
    fn default() -> Self {
        MapSection {
            resolution: 0.1,
            origin: [0.0; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemanticSection {
    pub num_classes: usize,
    pub prior: f64,
    pub traversable_classes: Vec<usize>,
}

impl Default for SemanticSection {
    fn default() -> Self {
        // Cityscapes train ids: road, sidewalk, terrain
        SemanticSection {
            num_classes: 19,
            prior: DEFAULT_PRIOR,
            traversable_classes: vec![0, 1, 9],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraversabilitySection {
    pub prior_alpha: f64,
    pub prior_beta: f64,
    /// Fuse pseudo-measurements deduced from the semantic layer.
    pub pseudo_measurements: bool,
    /// Decision threshold when rendering the map as labels.
    pub threshold: f64,
    pub estimator: Estimator,
}

impl Default for TraversabilitySection {
    fn default() -> Self {
        TraversabilitySection {
            prior_alpha: DEFAULT_PRIOR,
            prior_beta: DEFAULT_PRIOR,
            pseudo_measurements: true,
            threshold: 0.5,
            estimator: Estimator::Mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrictionSection {
    pub prior_mean: f64,
    pub noise_variance: f64,
    pub prior_confidence: f64,
    pub d_low: f64,
    pub d_high: f64,
    /// Also feed friction pseudo-measurements into the traversability layer.
    pub fuse: bool,
}

impl Default for FrictionSection {
    fn default() -> Self {
        FrictionSection {
            prior_mean: 0.5,
            noise_variance: 0.01,
            prior_confidence: 1.0,
            d_low: 0.4,
            d_high: 1.5,
            fuse: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingSection {
    /// Use every n-th cloud point as a training point.
    pub point_stride: usize,
}

impl Default for MappingSection {
    fn default() -> Self {
        MappingSection { point_stride: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Sequence directory; relative paths resolve against the config file.
    pub root: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub kernel: KernelSection,
    pub map: MapSection,
    pub semantic: SemanticSection,
    pub traversability: TraversabilitySection,
    pub friction: FrictionSection,
    pub labeling: TraversabilityLabelConfig,
    pub mapping: MappingSection,
    pub dataset: DatasetSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates a config file. A relative dataset root is
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Format {
                file: path.to_path_buf(),
                msg,
            },
            other => other,
        })?;
        if let (Some(root), Some(dir)) = (&cfg.dataset.root, path.parent()) {
            if root.is_relative() {
                cfg.dataset.root = Some(dir.join(root));
            }
        }
        Ok(cfg)
    }

    /// Serializes as flat `section.key = value` lines.
    pub fn to_toml(&self) -> String {
        let table = toml::Table::try_from(self).expect("config is always representable as TOML");
        let mut out = String::new();
        for (section, value) in &table {
            match value {
                toml::Value::Table(keys) => {
                    for (key, v) in keys {
                        out.push_str(&format!("{section}.{key} = {v}\n"));
                    }
                }
                v => out.push_str(&format!("{section} = {v}\n")),
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel_params()?;
        self.semantic_config()?;
        self.traversability_config()?;
        self.friction_config()?;
        self.labeling.validate()?;
        if !(self.map.resolution > 0.0 && self.map.resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "map.resolution must be positive, got {}",
                self.map.resolution
            )));
        }
        if !self.origin().is_finite() {
            return Err(Error::NonFinite("map.origin"));
        }
        let t = self.traversability.threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("traversability.threshold must lie in [0, 1], got {t}")));
        }
        if self.friction.fuse && !self.traversability.pseudo_measurements {
            return Err(Error::InvalidParameter(
                "friction.fuse needs traversability.pseudo_measurements = true".into(),
            ));
        }
        if self.mapping.point_stride == 0 {
            return Err(Error::InvalidParameter("mapping.point_stride must be at least 1".into()));
        }
        if let Some(c) = self.labeling.untraversable_classes.iter().find(|&&c| c >= self.semantic.num_classes) {
            return Err(Error::InvalidParameter(format!(
                "labeling.untraversable_classes: class {c} out of range for {} classes",
                self.semantic.num_classes
            )));
        }
        Ok(())
    }

    pub fn origin(&self) -> Point3 {
        Point3::from_array(self.map.origin)
    }

    pub fn kernel_params(&self) -> Result<KernelParams> {
        KernelParams::new(self.kernel.length_scale, self.kernel.scale)
    }

    pub fn semantic_config(&self) -> Result<SemanticConfig> {
        let s = &self.semantic;
        SemanticConfig::new(s.num_classes, s.prior, &s.traversable_classes)
    }

    pub fn traversability_config(&self) -> Result<TraversabilityConfig> {
        let t = &self.traversability;
        TraversabilityConfig::new(t.prior_alpha, t.prior_beta, t.pseudo_measurements)
    }

    pub fn friction_config(&self) -> Result<GaussianLayerConfig> {
        let f = &self.friction;
        GaussianLayerConfig::new(f.prior_mean, f.noise_variance, f.prior_confidence, f.d_low, f.d_high)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.kernel.length_scale, 0.3);
        assert_eq!(cfg.kernel.scale, 10.0);
        assert_eq!(cfg.map.resolution, 0.1);
        assert_eq!(cfg.semantic.prior, 0.001);
        assert_eq!(cfg.labeling.step_crit, 0.12);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn dotted_keys() {
        let cfg = RunConfig::from_toml(
            "seed = 3\nkernel.length_scale = 0.5\nsemantic.num_classes = 3\nsemantic.traversable_classes = [0]\n\
             traversability.estimator = \"map_or_mean\"\nlabeling.window_frames = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.kernel.length_scale, 0.5);
        assert_eq!(cfg.semantic.num_classes, 3);
        assert_eq!(cfg.traversability.estimator, Estimator::MapOrMean);
        assert_eq!(cfg.labeling.window_frames, 2);
    }

    #[test]
    fn rejects_invalid() {
        for text in [
            "kernel.length_scale = 0.0",
            "kernel.scale = -1.0",
            "semantic.num_classes = 0",
            "semantic.traversable_classes = [40]",
            "traversability.prior_beta = 0.0",
            "friction.d_low = 2.0",
            "labeling.weights = [1.0, 1.0, 1.0]",
            "map.resolution = 0.0",
            "mapping.point_stride = 0",
            "friction.fuse = true\ntraversability.pseudo_measurements = false",
            "kernal.length_scale = 0.3",
            "seed = \"x\"",
        ] {
            assert!(RunConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig {
            seed: 99,
            ..RunConfig::default()
        };
        cfg.friction.fuse = true;
        cfg.dataset.root = Some(PathBuf::from("/data/seq"));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn relative_root_resolves_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "dataset.root = \"seq\"\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.dataset.root, Some(dir.path().join("seq")));
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Format { .. })));
    }
}
