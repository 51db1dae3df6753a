//! Simulation and control of a planar devil-stick juggled by impulses alone.
//!
//! The models are generic over the floating point type through
//! [`scalar::Real`]; the aliases below fix it to `f64` (or `f32`).

// Parameter checks are written as `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_runner;
pub mod dvhc;
pub mod dynamics;
pub mod enforcement;
pub mod error;
pub mod orbit_stab;
pub mod scalar;
pub mod sim;
pub mod zerodyn;

pub use error::{Error, Result, RootBranch};
pub use scalar::Real;

pub type StickParams = dynamics::StickParams<f64>;
pub type StickState = dynamics::StickState<f64>;
pub type ImpulseInput = dynamics::ImpulseInput<f64>;
pub type FlightSegment = dynamics::FlightSegment<f64>;
pub type DvhcConfig = dvhc::DvhcConfig<f64>;
pub type ConstraintResidual = dvhc::ConstraintResidual<f64>;
pub type GainConfig = enforcement::GainConfig<f64>;
pub type ControlDecision = enforcement::ControlDecision<f64>;
pub type ZeroDynParams = zerodyn::ZeroDynParams<f64>;
pub type ZeroDynState = zerodyn::ZeroDynState<f64>;
pub type OrbitSpec = orbit_stab::OrbitSpec<f64>;
pub type PoincareArtifacts = orbit_stab::PoincareArtifacts<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type StickParams = crate::dynamics::StickParams<f32>;
    pub type StickState = crate::dynamics::StickState<f32>;
    pub type DvhcConfig = crate::dvhc::DvhcConfig<f32>;
    pub type GainConfig = crate::enforcement::GainConfig<f32>;
    pub type ZeroDynParams = crate::zerodyn::ZeroDynParams<f32>;
    pub type ZeroDynState = crate::zerodyn::ZeroDynState<f32>;
}
