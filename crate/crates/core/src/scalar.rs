//! Scalar abstraction shared by every model in the crate.
//!
//! All dynamics, constraint and analysis code is written against [`Real`], so the
//! same routines run in `f64` (the default everywhere in the CLI) or `f32`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the simulator: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Lossy conversion used for diagnostics and output.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let mut w = theta % two_pi;
    if w < T::zero() {
        w += two_pi;
    }
    if w >= two_pi {
        w -= two_pi;
    }
    w
}

/// Signed circular distance between two angles, in `(-π, π]`.
pub fn angle_diff<T: Real>(a: T, b: T) -> T {
    let d = wrap_two_pi(a - b);
    if d > T::pi() {
        d - T::two_pi()
    } else {
        d
    }
}

/// True when `theta` mod 2π lies within `tol` of `reference` mod 2π.
pub fn same_phase<T: Real>(theta: T, reference: T, tol: T) -> bool {
    angle_diff(theta, reference).abs() < tol
}

/// Default phase-membership tolerance for `f64` work, scaled up for narrower types.
pub fn phase_tolerance<T: Real>() -> T {
    let eps = T::default_epsilon() * lit(1.0e4);
    let base = lit::<T>(1.0e-9);
    if eps > base {
        eps
    } else {
        base
    }
}
