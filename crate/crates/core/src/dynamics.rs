//! Closed-form hybrid dynamics of a free-flying stick hit by impulses normal to
//! its axis.
//!
//! Between impulses the stick is in torque-free ballistic flight, so both the
//! flight map and the impulse jump map are explicit. A hybrid step applies one
//! impulse and flies until the orientation has advanced by exactly `Δθ*`.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Physical constants of the stick and of gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickParams<T> {
    /// Mass (kg).
    pub mass: T,
    /// Length (m).
    pub length: T,
    /// Moment of inertia about the center of mass (kg m^2).
    pub inertia: T,
    /// Gravitational acceleration, positive down (m/s^2).
    pub gravity: T,
}

impl<T: Real> StickParams<T> {
    /// Uniform slender rod: `J = m ℓ² / 12`.
    pub fn new(mass: T, length: T, gravity: T) -> Result<Self> {
        let inertia = mass * length * length / lit(12.0);
        Self::with_inertia(mass, length, inertia, gravity)
    }

    pub fn with_inertia(mass: T, length: T, inertia: T, gravity: T) -> Result<Self> {
        for (name, value) in [
            ("mass", mass),
            ("length", length),
            ("inertia", inertia),
            ("gravity", gravity),
        ] {
            if !(value > T::zero()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {}", to_f64(value)),
                });
            }
        }
        Ok(Self {
            mass,
            length,
            inertia,
            gravity,
        })
    }

    pub fn half_length(&self) -> T {
        self.length / lit(2.0)
    }
}

/// Full continuous state of the stick at one instant.
///
/// `theta` is cumulative and never wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickState<T: Real> {
    pub h: Vector2<T>,
    pub v: Vector2<T>,
    pub theta: T,
    pub omega: T,
}

impl<T: Real> StickState<T> {
    pub fn new(h: Vector2<T>, v: Vector2<T>, theta: T, omega: T) -> Self {
        Self { h, v, theta, omega }
    }

    /// Builds a state from `[h_x, h_y, θ, v_x, v_y, ω]`, i.e. `[q; q̇]`.
    pub fn from_q_qdot(x: [T; 6]) -> Self {
        Self {
            h: Vector2::new(x[0], x[1]),
            v: Vector2::new(x[3], x[4]),
            theta: x[2],
            omega: x[5],
        }
    }

    pub fn to_q_qdot(&self) -> [T; 6] {
        [
            self.h.x, self.h.y, self.theta, self.v.x, self.v.y, self.omega,
        ]
    }

    /// Translational plus rotational kinetic energy and gravitational potential.
    pub fn energy(&self, params: &StickParams<T>) -> T {
        let half = lit::<T>(0.5);
        params.mass * params.gravity * self.h.y
            + half * params.mass * self.v.norm_squared()
            + half * params.inertia * self.omega * self.omega
    }
}

/// Impulse `I` (N s) applied normal to the stick at signed offset `r` (m) from the
/// center of mass; positive `r` gives a counter-clockwise moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseInput<T> {
    pub impulse: T,
    pub offset: T,
}

impl<T: Real> ImpulseInput<T> {
    pub fn new(impulse: T, offset: T) -> Self {
        Self { impulse, offset }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// True when the point of application lies strictly on the stick.
    pub fn on_stick(&self, params: &StickParams<T>) -> bool {
        self.offset.abs() < params.half_length()
    }
}

/// One impulse followed by the flight to the next impulse instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightSegment<T: Real> {
    /// Time of flight `δ_k` (s).
    pub delta: T,
    /// State just before the impulse, `t_k⁻`.
    pub pre: StickState<T>,
    /// State just after the impulse, `t_k⁺`.
    pub post_impulse: StickState<T>,
    /// State just before the next impulse, `t_{k+1}⁻`.
    pub next_pre: StickState<T>,
}

/// Instantaneous jump caused by an impulse; positions are unchanged.
pub fn apply_impulse<T: Real>(
    state: &StickState<T>,
    input: &ImpulseInput<T>,
    params: &StickParams<T>,
) -> StickState<T> {
    let (s, c) = state.theta.sin_cos();
    let dv = input.impulse / params.mass;
    StickState {
        h: state.h,
        v: Vector2::new(state.v.x - dv * s, state.v.y + dv * c),
        theta: state.theta,
        omega: state.omega + input.impulse * input.offset / params.inertia,
    }
}

/// Torque-free flight under gravity for `dt` seconds.
pub fn ballistic_flight<T: Real>(
    state: &StickState<T>,
    dt: T,
    params: &StickParams<T>,
) -> StickState<T> {
    let g = params.gravity;
    let half = lit::<T>(0.5);
    StickState {
        h: Vector2::new(
            state.h.x + state.v.x * dt,
            state.h.y + state.v.y * dt - half * g * dt * dt,
        ),
        v: Vector2::new(state.v.x, state.v.y - g * dt),
        theta: state.theta + state.omega * dt,
        omega: state.omega,
    }
}

/// Applies `input` at `state_pre` and flies until `θ` has advanced by `dtheta_star`.
///
/// The time of flight is `Δθ* / ω⁺`; the orientation of the returned state is set
/// to `θ_k + Δθ*` exactly.
pub fn hybrid_step<T: Real>(
    state_pre: &StickState<T>,
    input: &ImpulseInput<T>,
    params: &StickParams<T>,
    dtheta_star: T,
) -> Result<FlightSegment<T>> {
    let post = apply_impulse(state_pre, input, params);
    if !(post.omega > T::zero()) {
        return Err(Error::NonPositiveOmega {
            omega: to_f64(post.omega),
        });
    }
    let delta = dtheta_star / post.omega;
    let mut next = ballistic_flight(&post, delta, params);
    next.theta = state_pre.theta + dtheta_star;
    Ok(FlightSegment {
        delta,
        pre: *state_pre,
        post_impulse: post,
        next_pre: next,
    })
}
