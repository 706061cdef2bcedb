//! Exact accumulation of kernel-weighted pseudo-counts.
//!
//! Posterior parameters are sums of many small non-negative terms. Floating
//! point addition is not associative, so applying a scan as one batch or as
//! several sub-batches would give slightly different posteriors. Every
//! parameter is instead held as a signed fixed-point integer with 64
//! fractional bits: each term is rounded once on entry, after which all
//! accumulation is exact integer arithmetic and therefore independent of
//! order and batching.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

const FRAC_BITS: i32 = 64;
const SCALE: f64 = 18446744073709551616.0; // 2^64
/// Largest magnitude accepted by [`Fixed::from_f64`].
pub const MAX_MAGNITUDE: f64 = 9.0e18;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed(i128);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);

    /// Rounds `x` to the nearest multiple of 2^-64. Returns `None` for
    /// non-finite values or magnitudes at or above [`MAX_MAGNITUDE`].
    pub fn from_f64(x: f64) -> Option<Fixed> {
        if !x.is_finite() || x.abs() >= MAX_MAGNITUDE {
            return None;
        }
        // Multiplication by a power of two is exact; the cast rounds toward
        // zero, so round explicitly first.
        Some(Fixed((x * SCALE).round() as i128))
    }

    /// Nearest `f64` to the stored value.
    pub fn to_f64(self) -> f64 {
        // i128 -> f64 rounds to nearest; scaling by 2^-64 is exact.
        (self.0 as f64) * (2f64).powi(-FRAC_BITS)
    }

    pub fn from_raw(raw: i128) -> Fixed {
        Fixed(raw)
    }

    pub fn raw(self) -> i128 {
        self.0
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

/// Integer multiples (pseudo-count weights 0..=3).
impl Mul<u32> for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: u32) -> Fixed {
        Fixed(self.0 * rhs as i128)
    }
}

impl std::iter::Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, Add::add)
    }
}
