//! Scalar abstraction for the numerical modules.
//!
//! Everything in [`crate::qsim`], [`crate::krr`], [`crate::rmt`] and
//! [`crate::estimate`] is written against [`Real`], so the same code runs in
//! `f64` (the default used by the harness) and `f32`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the kernel and theory code.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Machine epsilon.
    const EPSILON: Self;

    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Converts a count (sample size, dimension) to the scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Widens to `f64` for reporting and CSV output.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EPSILON: Self = f32::EPSILON;
}

impl Real for f64 {
    const EPSILON: Self = f64::EPSILON;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.25), 0.25f32);
        assert_eq!(f64::count(7), 7.0);
        assert_eq!(1.5f32.as_f64(), 1.5);
    }
}
