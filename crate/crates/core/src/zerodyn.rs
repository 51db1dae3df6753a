//! Discrete zero dynamics on the constraint manifold.
//!
//! Once `ρ = Dρ = 0` the stick evolves on the two-dimensional map
//! `(θ_k, ω_k) ↦ (θ_k + Δθ*, ω_{k+1})` with `ω_{k+1}` the positive root of a
//! quadratic. This module iterates that map and provides the analysis used on
//! its trajectories: an approximate invariant, period detection, drift of `ω`
//! at recurring phases, and the Floquet matrix of periodic orbits.

use nalgebra::Matrix2;

use crate::dvhc::DvhcConfig;
use crate::error::{Error, Result};
use crate::scalar::{lit, phase_tolerance, same_phase, to_f64, Real};

/// Constants of the reduced map for a given constraint and gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroDynParams<T: Real> {
    pub k: T,
    pub s_m: T,
    pub s_p: T,
    /// Defined only for `φ = ±π/2`; negative for `+π/2`.
    pub p: Option<T>,
    pub l_e: T,
    pub l_t: T,
    pub config: DvhcConfig<T>,
    pub gravity: T,
}

impl<T: Real> ZeroDynParams<T> {
    pub fn new(config: &DvhcConfig<T>, gravity: T) -> Result<Self> {
        if !(gravity > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "gravity",
                reason: format!("must be positive, got {}", to_f64(gravity)),
            });
        }
        let d = config.dtheta;
        let half = d / lit(2.0);
        let (sh, ch) = half.sin_cos();
        let k = gravity * d * d / (lit::<T>(4.0) * config.radius * sh);
        let p = config
            .vertical_phase_sign()
            .map(|sign| sign * gravity * d * d / (lit::<T>(2.0) * config.radius * d.sin()));
        Ok(Self {
            k,
            s_m: (config.phase - half).sin(),
            s_p: (config.phase + half).sin(),
            p,
            l_e: (sh / half) / ch,
            l_t: (half * half / (sh * sh)) / ch,
            config: *config,
            gravity,
        })
    }

    pub fn dtheta(&self) -> T {
        self.config.dtheta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroDynState<T> {
    pub theta: T,
    pub omega: T,
}

impl<T: Real> ZeroDynState<T> {
    pub fn new(theta: T, omega: T) -> Self {
        Self { theta, omega }
    }
}

/// One application of the map.
pub fn dzd_step<T: Real>(
    state: &ZeroDynState<T>,
    zp: &ZeroDynParams<T>,
) -> Result<ZeroDynState<T>> {
    let w = state.omega;
    if !(w > T::zero()) {
        return Err(Error::NonPositiveOmega { omega: to_f64(w) });
    }
    let s = state.theta.sin();
    let two = lit::<T>(2.0);
    let w2 = w * w;
    let w4 = w2 * w2;
    let next = if let Some(p) = zp.p {
        let disc = T::one() + lit::<T>(6.0) * p * s / w2 + p * p * s * s / w4;
        if disc < T::zero() {
            return Err(no_real(state, disc));
        }
        w / two + p * s / (two * w) + w / two * disc.sqrt()
    } else {
        let (k, sm, sp) = (zp.k, zp.s_m, zp.s_p);
        let disc = T::one() - two * k * (sp + two * sm) * s / (sp * sp * w2)
            + k * k * s * s / (sp * sp * w4);
        if disc < T::zero() {
            return Err(no_real(state, disc));
        }
        let lead = sp * w / (two * sm);
        lead - k * s / (two * sm * w) + lead * disc.sqrt()
    };
    if !(next > T::zero()) {
        return Err(Error::NonPositiveOmega {
            omega: to_f64(next),
        });
    }
    Ok(ZeroDynState::new(state.theta + zp.dtheta(), next))
}

fn no_real<T: Real>(state: &ZeroDynState<T>, disc: T) -> Error {
    Error::NoRealSolution {
        theta: to_f64(state.theta),
        omega: to_f64(state.omega),
        discriminant: to_f64(disc),
    }
}

/// Residual of the implicit relation between consecutive points; zero on exact
/// solutions. Uses the `P` form when the phase is vertical.
pub fn implicit_residual<T: Real>(
    cur: &ZeroDynState<T>,
    next: &ZeroDynState<T>,
    zp: &ZeroDynParams<T>,
) -> T {
    let s = cur.theta.sin();
    let inv = T::one() / cur.omega + T::one() / next.omega;
    match zp.p {
        Some(p) => next.omega - cur.omega - p * s * inv,
        None => zp.s_m * next.omega - zp.s_p * cur.omega + zp.k * s * inv,
    }
}

/// Approximately conserved quantity `Ē` of the map.
pub fn approx_invariant<T: Real>(state: &ZeroDynState<T>, zp: &ZeroDynParams<T>) -> T {
    let half = zp.dtheta() / lit(2.0);
    let x = state.theta - half;
    let w2h = state.omega * state.omega / lit(2.0);
    let g = zp.gravity;
    let radius = zp.config.radius;
    if let Some(sign) = zp.config.vertical_phase_sign() {
        // sin φ = −sign, cot φ = 0
        return w2h + sign * g * zp.l_t * x.cos() / radius;
    }
    let (sphi, cphi) = zp.config.phase.sin_cos();
    let cot = cphi / sphi;
    let two = lit::<T>(2.0);
    let (sx, cx) = x.sin_cos();
    let bracket = two * cot * sx + cx;
    let denom = radius * sphi * (lit::<T>(4.0) * cot * cot + T::one());
    (-two * cot * zp.l_e * x).exp() * (w2h - g * zp.l_t * bracket / denom)
}

/// Integral of motion of the continuous-time zero dynamics.
pub fn continuous_invariant<T: Real>(
    theta: T,
    omega: T,
    config: &DvhcConfig<T>,
    g: T,
) -> Result<T> {
    let (sphi, cphi) = config.phase.sin_cos();
    if sphi.abs() < lit(1e-12) {
        return Err(Error::SingularPhase {
            phase: to_f64(config.phase),
        });
    }
    let cot = if config.vertical_phase_sign().is_some() {
        T::zero()
    } else {
        cphi / sphi
    };
    let two = lit::<T>(2.0);
    let (s, c) = theta.sin_cos();
    let denom = config.radius * sphi * (lit::<T>(4.0) * cot * cot + T::one());
    Ok((-two * theta * cot).exp() * (omega * omega / two - g * (two * s * cot + c) / denom))
}

/// Trajectory of the map and the reason it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDynRun<T> {
    pub states: Vec<ZeroDynState<T>>,
    /// Number of map applications carried out.
    pub steps_completed: usize,
    /// Set when the run ended early; the error is the one raised by the next step.
    pub stopped: Option<Error>,
}

/// Applies the map up to `steps` times, stopping at the first failure.
pub fn iterate<T: Real>(
    initial: ZeroDynState<T>,
    steps: usize,
    zp: &ZeroDynParams<T>,
) -> ZeroDynRun<T> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial);
    let mut stopped = None;
    let mut cur = initial;
    for _ in 0..steps {
        match dzd_step(&cur, zp) {
            Ok(next) => {
                states.push(next);
                cur = next;
            }
            Err(e) => {
                stopped = Some(e);
                break;
            }
        }
    }
    ZeroDynRun {
        steps_completed: states.len() - 1,
        states,
        stopped,
    }
}

/// Writes `x` as `p / q` in lowest terms when it is rational with a small
/// denominator, using continued-fraction convergents.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodReport<T> {
    /// `Δθ* = (p/q)·2π` in lowest terms.
    pub p: u64,
    pub q: u64,
    /// `Some(q)` when `|ω_{k+q} − ω_k| < tol` for every applicable `k`.
    pub period: Option<usize>,
    pub max_deviation: T,
    pub omega_min: T,
    /// `ω_min² > |P|`; `None` when `P` is undefined (non-vertical phase).
    pub assumption_holds: Option<bool>,
}

pub fn detect_period<T: Real>(
    trajectory: &[ZeroDynState<T>],
    zp: &ZeroDynParams<T>,
    tol: T,
) -> Result<PeriodReport<T>> {
    let ratio = to_f64(zp.dtheta() / T::two_pi());
    let (p, q) =
        rational_approx(ratio, 10_000, 1e-12).ok_or(Error::NotRationalMultiple { ratio })?;
    let qn = q as usize;
    if trajectory.len() < 2 * qn {
        return Err(Error::TrajectoryTooShort {
            len: trajectory.len(),
            required: 2 * qn,
        });
    }
    let max_deviation = trajectory
        .iter()
        .zip(&trajectory[qn..])
        .map(|(a, b)| (b.omega - a.omega).abs())
        .fold(T::zero(), |m, d| m.max(d));
    let omega_min = trajectory
        .iter()
        .map(|s| s.omega)
        .fold(trajectory[0].omega, |m, w| m.min(w));
    Ok(PeriodReport {
        p,
        q,
        period: (max_deviation < tol).then_some(qn),
        max_deviation,
        omega_min,
        assumption_holds: zp.p.map(|p| omega_min * omega_min > p.abs()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport<T> {
    pub recurrences: usize,
    pub first_index: usize,
    pub last_index: usize,
    pub omega_first: T,
    pub omega_last: T,
    /// `(ω_last − ω_first) / ω_first × 100`.
    pub percent: T,
}

/// Drift of `ω` between the first and last visit to `theta_ref` (mod 2π).
pub fn drift_stats<T: Real>(
    trajectory: &[ZeroDynState<T>],
    theta_ref: T,
) -> Result<DriftReport<T>> {
    let tol = phase_tolerance::<T>();
    let hits: Vec<usize> = trajectory
        .iter()
        .enumerate()
        .filter(|(_, s)| same_phase(s.theta, theta_ref, tol))
        .map(|(i, _)| i)
        .collect();
    if hits.len() < 2 {
        return Err(Error::InsufficientRecurrences { found: hits.len() });
    }
    let (i0, i1) = (hits[0], hits[hits.len() - 1]);
    let (w0, w1) = (trajectory[i0].omega, trajectory[i1].omega);
    Ok(DriftReport {
        recurrences: hits.len(),
        first_index: i0,
        last_index: i1,
        omega_first: w0,
        omega_last: w1,
        percent: (w1 - w0) / w0 * lit(100.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetResult<T: Real> {
    pub monodromy: Matrix2<T>,
    pub step_jacobians: Vec<Matrix2<T>>,
    pub eigen_magnitudes: [T; 2],
}

/// Jacobian of one map step. The `θ` row is exact; the `ω` row uses central
/// differences with step `fd_eps · max(|x|, 1)`.
pub fn step_jacobian<T: Real>(
    state: &ZeroDynState<T>,
    zp: &ZeroDynParams<T>,
    fd_eps: T,
) -> Result<Matrix2<T>> {
    let two = lit::<T>(2.0);
    let ht = fd_eps * state.theta.abs().max(T::one());
    let hw = fd_eps * state.omega.abs().max(T::one());
    let at = |th: T| dzd_step(&ZeroDynState::new(th, state.omega), zp).map(|s| s.omega);
    let aw = |w: T| dzd_step(&ZeroDynState::new(state.theta, w), zp).map(|s| s.omega);
    let d_theta = (at(state.theta + ht)? - at(state.theta - ht)?) / (two * ht);
    let d_omega = (aw(state.omega + hw)? - aw(state.omega - hw)?) / (two * hw);
    Ok(Matrix2::new(T::one(), T::zero(), d_theta, d_omega))
}

/// Eigenvalue magnitudes of a 2×2 matrix from its characteristic polynomial.
pub fn eigen_magnitudes_2x2<T: Real>(m: &Matrix2<T>) -> [T; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - lit::<T>(4.0) * det;
    if disc >= T::zero() {
        let sq = disc.sqrt();
        let two = lit::<T>(2.0);
        [((tr + sq) / two).abs(), ((tr - sq) / two).abs()]
    } else {
        let r = det.abs().sqrt();
        [r, r]
    }
}

/// Floquet matrix `M = J_N ⋯ J_1` over one period of the supplied orbit.
pub fn floquet<T: Real>(
    orbit: &[ZeroDynState<T>],
    zp: &ZeroDynParams<T>,
    fd_eps: T,
) -> Result<FloquetResult<T>> {
    let mut step_jacobians = Vec::with_capacity(orbit.len());
    let mut m = Matrix2::identity();
    for s in orbit {
        let j = step_jacobian(s, zp, fd_eps)?;
        m = j * m;
        step_jacobians.push(j);
    }
    Ok(FloquetResult {
        eigen_magnitudes: eigen_magnitudes_2x2(&m),
        monodromy: m,
        step_jacobians,
    })
}
