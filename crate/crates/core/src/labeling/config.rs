use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraversabilityLabelConfig {
    /// Weights of slope, roughness and step height; they sum to 1.
    pub weights: [f64; 3],
    /// Critical slope in radians.
    pub slope_crit: f64,
    /// Critical roughness in meters.
    pub roughness_crit: f64,
    /// Critical step height in meters.
    pub step_crit: f64,
    /// Scores at or above this threshold are labeled traversable.
    pub threshold: f64,
    /// Number of consecutive frames fused into the elevation map.
    pub window_frames: usize,
    /// Radius of the neighbourhood used for the terrain features, meters.
    pub window_radius: f64,
    /// Elevation map cell size, meters.
    pub resolution: f64,
    /// Semantic classes that can never be traversable.
    pub untraversable_classes: Vec<usize>,
}

impl Default for TraversabilityLabelConfig {
    fn default() -> Self {
        TraversabilityLabelConfig {
            // not published; uniform until tuned for a platform
            weights: [1.0 / 3.0; 3],
            slope_crit: 1.0,
            roughness_crit: 0.05,
            step_crit: 0.12,
            threshold: 0.5,
            window_frames: 5,
            window_radius: 0.3,
            resolution: 0.1,
            untraversable_classes: Vec::new(),
        }
    }
}

impl TraversabilityLabelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return bad(format!("label weights must be non-negative, got {:?}", self.weights));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("label weights must sum to 1, got {:?}", self.weights));
        }
        for (name, v) in [
            ("slope_crit", self.slope_crit),
            ("roughness_crit", self.roughness_crit),
            ("step_crit", self.step_crit),
            ("window_radius", self.window_radius),
            ("resolution", self.resolution),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("label threshold must lie in (0, 1), got {}", self.threshold));
        }
        if self.window_frames == 0 {
            return bad("window_frames must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        TraversabilityLabelConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let base = TraversabilityLabelConfig::default();
        let cases = [
            TraversabilityLabelConfig { weights: [0.5, 0.5, 0.5], ..base.clone() },
            TraversabilityLabelConfig { slope_crit: 0.0, ..base.clone() },
            TraversabilityLabelConfig { threshold: 1.0, ..base.clone() },
            TraversabilityLabelConfig { window_frames: 0, ..base.clone() },
            TraversabilityLabelConfig { weights: [1.5, -0.5, 0.0], ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
