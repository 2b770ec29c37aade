//! Floating-point scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for angles, QUBO coefficients and estimator scores: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute tolerance when comparing angles and unitary entries.
    fn tolerance() -> Self;

    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("scalar conversion from f64")
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("scalar conversion from usize")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

/// Maps an angle onto the half-open interval (-pi, pi].
pub fn normalize_angle<T: Scalar>(theta: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut r = theta % two_pi;
    if r > pi {
        r = r - two_pi;
    } else if r <= -pi {
        r = r + two_pi;
    }
    // -pi can reappear from rounding on the subtraction above
    if r <= -pi {
        r = pi;
    }
    r
}

/// True when two angles agree modulo 2*pi within the scalar tolerance.
pub fn angles_close<T: Scalar>(a: T, b: T) -> bool {
    normalize_angle(a - b).abs() <= T::tolerance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_maps_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(2.0 * PI)).abs() < 1e-12);
        assert!((normalize_angle(-PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((normalize_angle(5.0f32) - (5.0 - 2.0 * std::f32::consts::PI)).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(theta in -1.0e3f64..1.0e3) {
            let once = normalize_angle(theta);
            prop_assert!(once > -PI && once <= PI);
            prop_assert_eq!(normalize_angle(once), once);
        }

        #[test]
        fn normalize_preserves_angle_mod_two_pi(theta in -50.0f64..50.0) {
            let r = normalize_angle(theta);
            prop_assert!((r.sin() - theta.sin()).abs() < 1e-9);
            prop_assert!((r.cos() - theta.cos()).abs() < 1e-9);
        }
    }
}
