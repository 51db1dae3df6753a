//! Impulsive controller that enforces the discrete constraint.
//!
//! Treating the time of flight `δ_k` as an auxiliary input, the position error is
//! forced to contract as `ρ_{k+1} = λ ρ_k`. Eliminating the impulse between the
//! two components gives `δ_k` (linear when `sin θ_k = 0`, quadratic otherwise);
//! the impulse then follows from one component, and the point of application
//! from the spin change needed to reach `θ_k + Δθ*` after `δ_k` seconds.

use nalgebra::Vector2;

use crate::dvhc::{phi, psi, residuals, ConstraintResidual, DvhcConfig};
use crate::dynamics::{ImpulseInput, StickParams, StickState};
use crate::error::{Error, Result, RootBranch};
use crate::scalar::{lit, to_f64, wrap_two_pi, Real};

/// Per-axis contraction factors `λ_x, λ_y ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConfig<T> {
    pub lambda_x: T,
    pub lambda_y: T,
}

impl<T: Real> GainConfig<T> {
    pub fn new(lambda_x: T, lambda_y: T) -> Result<Self> {
        for (name, l) in [("lambda_x", lambda_x), ("lambda_y", lambda_y)] {
            if !(l >= T::zero() && l < T::one()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie in [0, 1), got {}", to_f64(l)),
                });
            }
        }
        Ok(Self { lambda_x, lambda_y })
    }

    pub fn uniform(lambda: T) -> Result<Self> {
        Self::new(lambda, lambda)
    }

    pub fn as_vector(&self) -> Vector2<T> {
        Vector2::new(self.lambda_x, self.lambda_y)
    }
}

/// Quantities produced while solving for the time of flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlIntermediates<T: Real> {
    /// `η_k = Φ(θ_k + Δθ*) − Φ(θ_k)`.
    pub eta: Vector2<T>,
    pub delta: T,
    /// Coefficients of `a δ² + b δ + c = 0`; for the linear branch `a = 0` and the
    /// relation reads `b δ + c = 0`.
    pub a: T,
    pub b: T,
    pub c: T,
    pub branch: RootBranch,
    /// The root that was not selected, if it is also positive.
    pub other_root: Option<T>,
    /// Diagnostic: the unselected positive root is closer to the previous time of
    /// flight than the selected one.
    pub other_closer_to_previous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision<T: Real> {
    pub input: ImpulseInput<T>,
    pub residual: ConstraintResidual<T>,
    pub intermediates: ControlIntermediates<T>,
}

/// `|sin θ|` below this routes to the linear time-of-flight relation.
pub fn sin_zero_threshold<T: Real>() -> T {
    lit::<T>(1e-9).max(T::default_epsilon() * lit(16.0))
}

fn eta<T: Real>(theta: T, config: &DvhcConfig<T>) -> Vector2<T> {
    phi(theta + config.dtheta, config) - phi(theta, config)
}

/// Solves for the time of flight that yields `ρ_{k+1} = λ ρ_k`.
pub fn solve_delta<T: Real>(
    state: &StickState<T>,
    residual: &ConstraintResidual<T>,
    gains: &GainConfig<T>,
    config: &DvhcConfig<T>,
    g: T,
    prev_delta: Option<T>,
) -> Result<ControlIntermediates<T>> {
    let theta = state.theta;
    let eta = eta(theta, config);
    let vel = residual.drho + psi(theta, state.omega, config, g)?;
    let rho = residual.rho;
    let lx1 = gains.lambda_x - T::one();
    let ly1 = gains.lambda_y - T::one();
    let (s, c) = theta.sin_cos();

    if s.abs() < sin_zero_threshold() {
        let denom = vel.x;
        if denom.abs() < lit(1e-12) {
            return Err(Error::DegenerateLinear {
                denominator: to_f64(denom),
            });
        }
        let numer = lx1 * rho.x + eta.x;
        let delta = numer / denom;
        if !(delta > T::zero()) {
            return Err(Error::NonPositiveDelta {
                delta: to_f64(delta),
                branch: RootBranch::Linear,
                other: None,
            });
        }
        return Ok(ControlIntermediates {
            eta,
            delta,
            a: T::zero(),
            b: denom,
            c: -numer,
            branch: RootBranch::Linear,
            other_root: None,
            other_closer_to_previous: false,
        });
    }

    let cot = c / s;
    let two = lit::<T>(2.0);
    let a = g / two;
    let b = -(vel.x * cot + vel.y);
    let cc = eta.x * cot + eta.y + lx1 * rho.x * cot + ly1 * rho.y;
    let disc = b * b - lit::<T>(4.0) * a * cc;
    if disc < T::zero() {
        return Err(Error::ComplexRoots {
            a: to_f64(a),
            b: to_f64(b),
            c: to_f64(cc),
            discriminant: to_f64(disc),
        });
    }
    let sq = disc.sqrt();
    let minus = (-b - sq) / (two * a);
    let plus = (-b + sq) / (two * a);
    let (branch, delta, other) = if wrap_two_pi(theta) < T::pi() {
        (RootBranch::Minus, minus, plus)
    } else {
        (RootBranch::Plus, plus, minus)
    };
    let other_root = (other > T::zero()).then_some(other);
    if !(delta > T::zero()) {
        return Err(Error::NonPositiveDelta {
            delta: to_f64(delta),
            branch,
            other: other_root.map(to_f64),
        });
    }
    let other_closer_to_previous = match (prev_delta, other_root) {
        (Some(p), Some(o)) => (o - p).abs() < (delta - p).abs(),
        _ => false,
    };
    Ok(ControlIntermediates {
        eta,
        delta,
        a,
        b,
        c: cc,
        branch,
        other_root,
        other_closer_to_previous,
    })
}

/// Impulse magnitude for a known time of flight.
pub fn solve_impulse<T: Real>(
    state: &StickState<T>,
    residual: &ConstraintResidual<T>,
    inter: &ControlIntermediates<T>,
    gains: &GainConfig<T>,
    config: &DvhcConfig<T>,
    params: &StickParams<T>,
) -> Result<T> {
    let g = params.gravity;
    let vel = residual.drho + psi(state.theta, state.omega, config, g)?;
    let delta = inter.delta;
    let (s, c) = state.theta.sin_cos();
    let m = params.mass;
    if inter.branch == RootBranch::Linear {
        let num = (gains.lambda_y - T::one()) * residual.rho.y + inter.eta.y - vel.y * delta
            + lit::<T>(0.5) * g * delta * delta;
        Ok(m * num / (delta * c))
    } else {
        let num = (gains.lambda_x - T::one()) * residual.rho.x + inter.eta.x - vel.x * delta;
        Ok(-m * num / (delta * s))
    }
}

/// Point of application giving `ω_{k+1} = Δθ* / δ`.
pub fn solve_offset<T: Real>(
    omega: T,
    impulse: T,
    delta: T,
    params: &StickParams<T>,
    config: &DvhcConfig<T>,
) -> Result<T> {
    if impulse == T::zero() {
        return Err(Error::ZeroImpulse);
    }
    let j = params.inertia;
    let r = j * config.dtheta / (impulse * delta) - j * omega / impulse;
    if !(r.abs() < params.half_length()) {
        return Err(Error::OffsetOffStick {
            offset: to_f64(r),
            half_length: to_f64(params.half_length()),
        });
    }
    Ok(r)
}

/// Full controller evaluation at a pre-impulse state.
pub fn control_step<T: Real>(
    state: &StickState<T>,
    gains: &GainConfig<T>,
    config: &DvhcConfig<T>,
    params: &StickParams<T>,
    prev_delta: Option<T>,
) -> Result<ControlDecision<T>> {
    let g = params.gravity;
    let residual = residuals(state, config, g)?;
    let intermediates = solve_delta(state, &residual, gains, config, g, prev_delta)?;
    let impulse = solve_impulse(state, &residual, &intermediates, gains, config, params)?;
    let offset = solve_offset(state.omega, impulse, intermediates.delta, params, config)?;
    Ok(ControlDecision {
        input: ImpulseInput::new(impulse, offset),
        residual,
        intermediates,
    })
}
