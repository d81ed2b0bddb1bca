//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the laboratory can run on: `f32` or `f64`.
pub trait Real:
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
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::c(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|x|^q` with the convention `0^q = 0` and a fast path for `q == 2`.
#[inline]
pub fn abs_pow<T: Real>(x: T, q: T) -> T {
    let a = x.abs();
    if a == T::zero() {
        T::zero()
    } else if q == T::two() {
        a * a
    } else if q == T::one() {
        a
    } else {
        a.powf(q)
    }
}

/// Geometric sequence `start * ratio^k` for `k = 0..n`.
pub fn geomspace<T: Real>(start: T, stop: T, n: usize) -> Vec<T> {
    assert!(n >= 2);
    let (a, b) = (start.ln(), stop.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    let mut out: Vec<T> = (0..n).map(|k| (a + step * T::from_usize_lossy(k)).exp()).collect();
    out[0] = start;
    out[n - 1] = stop;
    out
}

/// Surface area of the unit sphere `S^{k}` in `R^{k+1}`.
pub fn sphere_area<T: Real>(k: usize) -> T {
    let pi = T::PI();
    match k {
        0 => T::two(),
        1 => T::two() * pi,
        _ => T::two() * pi / T::from_usize_lossy(k - 1) * sphere_area::<T>(k - 2),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume<T: Real>(n: usize) -> T {
    sphere_area::<T>(n - 1) / T::from_usize_lossy(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert_eq!(sphere_area::<f64>(0), 2.0);
        assert!((sphere_area::<f64>(2) - 4.0 * pi).abs() < 1e-14);
        assert!((sphere_area::<f64>(3) - 2.0 * pi * pi).abs() < 1e-13);
        assert!((ball_volume::<f64>(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert_eq!(ball_volume::<f64>(1), 2.0);
    }

    #[test]
    fn abs_pow_conventions() {
        assert_eq!(abs_pow(0.0_f64, 0.5), 0.0);
        assert_eq!(abs_pow(-3.0_f64, 2.0), 9.0);
        assert!((abs_pow(-2.0_f32, 1.5) - 2.0_f32.powf(1.5)).abs() < 1e-6);
    }
}
