//! Compactly supported kernel used to weight training points.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Length-scale (support radius, meters) and peak value of the sparse kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    length_scale: f64,
    scale: f64,
}

impl KernelParams {
    pub fn new(length_scale: f64, scale: f64) -> Result<Self> {
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel length scale must be positive, got {length_scale}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("kernel scale must be positive, got {scale}")));
        }
        Ok(KernelParams { length_scale, scale })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Kernel value for a distance already known to be non-negative.
    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        if d >= self.length_scale {
            return 0.0;
        }
        let r = d / self.length_scale;
        let a = 2.0 * PI * r;
        let v = (2.0 + a.cos()) / 3.0 * (1.0 - r) + a.sin() / (2.0 * PI);
        // The two terms cancel to third order near the boundary.
        (self.scale * v).max(0.0)
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            length_scale: 0.3,
            scale: 10.0,
        }
    }
}

/// Sparse kernel weight at distance `d`; exactly zero for `d >= l`.
pub fn sparse_kernel_value(d: f64, params: &KernelParams) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("kernel distance must be non-negative, got {d}")));
    }
    Ok(params.eval(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        let p = KernelParams::new(0.3, 10.0).unwrap();
        assert_eq!(sparse_kernel_value(0.0, &p).unwrap(), 10.0);
        assert_eq!(sparse_kernel_value(0.3, &p).unwrap(), 0.0);
        assert_eq!(sparse_kernel_value(5.0, &p).unwrap(), 0.0);
        let unit = KernelParams::new(0.3, 1.0).unwrap();
        // (2 + cos(pi)) / 3 * 1/2 + sin(pi) / (2 pi) = 1/6
        assert!((sparse_kernel_value(0.15, &unit).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn negative_distance_rejected() {
        let p = KernelParams::default();
        assert!(sparse_kernel_value(-1e-9, &p).is_err());
        assert!(sparse_kernel_value(f64::NAN, &p).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(KernelParams::new(0.0, 1.0).is_err());
        assert!(KernelParams::new(0.3, -1.0).is_err());
        assert!(KernelParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn monotone_and_bounded_on_support() {
        let p = KernelParams::new(0.3, 10.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=10_000 {
            let d = 0.3 * i as f64 / 10_000.0;
            let v = p.eval(d);
            assert!((0.0..=10.0).contains(&v));
            assert!(v <= prev, "not monotone at d={d}");
            prev = v;
        }
    }

    #[test]
    fn positive_strictly_inside_support() {
        let p = KernelParams::new(0.3, 10.0).unwrap();
        for d in [0.0, 0.1, 0.2, 0.29, 0.299] {
            assert!(p.eval(d) > 0.0);
        }
    }
}
