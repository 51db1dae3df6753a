//! Circle-shaped discrete virtual holonomic constraint.
//!
//! At every impulse instant the center of mass is required to sit on a circle of
//! radius `R` whose angular position lags the stick orientation by `φ`. Because
//! the stick flies ballistically between impulses, the constraint also pins the
//! pre-impulse velocity to a function `Ψ(θ, ω)` of the passive coordinates.

use nalgebra::Vector2;

use crate::dynamics::StickState;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Geometry of the constraint and the angular spacing of impulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvhcConfig<T> {
    /// Circle radius `R` (m).
    pub radius: T,
    /// Phase offset `φ` in `(-π, π]` (rad).
    pub phase: T,
    /// Rotation `Δθ*` between impulses, in `(0, π)` (rad).
    pub dtheta: T,
    /// `N` when `Δθ* = 2π / N`.
    pub n_per_rev: Option<u32>,
}

impl<T: Real> DvhcConfig<T> {
    pub fn new(radius: T, phase: T, dtheta: T) -> Result<Self> {
        let cfg = Self {
            radius,
            phase,
            dtheta,
            n_per_rev: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Constraint with `N` impulses per revolution, `Δθ* = 2π / N`, `N ≥ 3`.
    pub fn per_revolution(radius: T, phase: T, n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                name: "n_per_rev",
                reason: format!("must be at least 3, got {n}"),
            });
        }
        let dtheta = T::two_pi() / lit(f64::from(n));
        let cfg = Self {
            radius,
            phase,
            dtheta,
            n_per_rev: Some(n),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be positive, got {}", to_f64(self.radius)),
            });
        }
        if !(self.phase > -T::pi() && self.phase <= T::pi()) {
            return Err(Error::InvalidParameter {
                name: "phase",
                reason: format!("must lie in (-pi, pi], got {}", to_f64(self.phase)),
            });
        }
        if !(self.dtheta > T::zero() && self.dtheta < T::pi()) {
            return Err(Error::InvalidParameter {
                name: "dtheta",
                reason: format!("must lie in (0, pi), got {}", to_f64(self.dtheta)),
            });
        }
        Ok(())
    }

    /// `+1` for `φ = -π/2`, `-1` for `φ = π/2`, `None` otherwise.
    pub fn vertical_phase_sign(&self) -> Option<T> {
        let tol = lit::<T>(1e-12).max(T::default_epsilon() * lit(8.0));
        if (self.phase - T::frac_pi_2()).abs() < tol {
            Some(-T::one())
        } else if (self.phase + T::frac_pi_2()).abs() < tol {
            Some(T::one())
        } else {
            None
        }
    }
}

/// Constraint residuals at an impulse instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintResidual<T: Real> {
    /// Position error `ρ = h − Φ(θ)`.
    pub rho: Vector2<T>,
    /// Velocity error `Dρ = v − Ψ(θ, ω)`.
    pub drho: Vector2<T>,
}

impl<T: Real> ConstraintResidual<T> {
    pub fn max_abs(&self) -> T {
        self.rho.amax().max(self.drho.amax())
    }
}

/// Point on the constraint circle for orientation `theta`.
pub fn phi<T: Real>(theta: T, config: &DvhcConfig<T>) -> Vector2<T> {
    let (s, c) = (theta - config.phase).sin_cos();
    Vector2::new(config.radius * c, config.radius * s)
}

/// Pre-impulse velocity compatible with the constraint at `(theta, omega)`.
pub fn psi<T: Real>(theta: T, omega: T, config: &DvhcConfig<T>, g: T) -> Result<Vector2<T>> {
    if !(omega > T::zero()) {
        return Err(Error::NonPositiveOmega {
            omega: to_f64(omega),
        });
    }
    let half = config.dtheta / lit(2.0);
    let chord = lit::<T>(2.0) * config.radius * half.sin() * omega / config.dtheta;
    let (s, c) = (theta - config.phase - half).sin_cos();
    Ok(Vector2::new(
        -chord * s,
        chord * c - g * config.dtheta / (lit::<T>(2.0) * omega),
    ))
}

pub fn residuals<T: Real>(
    state: &StickState<T>,
    config: &DvhcConfig<T>,
    g: T,
) -> Result<ConstraintResidual<T>> {
    let v_ref = psi(state.theta, state.omega, config, g)?;
    Ok(ConstraintResidual {
        rho: state.h - phi(state.theta, config),
        drho: state.v - v_ref,
    })
}

/// State that satisfies the constraint exactly at `(theta, omega)`.
pub fn on_constraint_state<T: Real>(
    theta: T,
    omega: T,
    config: &DvhcConfig<T>,
    g: T,
) -> Result<StickState<T>> {
    Ok(StickState::new(
        phi(theta, config),
        psi(theta, omega, config, g)?,
        theta,
        omega,
    ))
}
