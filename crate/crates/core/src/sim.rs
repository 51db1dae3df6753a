//! Closed-loop simulation of the full hybrid system under the enforcing
//! controller, optionally with a correction applied at a Poincaré section.

use nalgebra::{SMatrix, SVector, Vector2};

use crate::dvhc::{ConstraintResidual, DvhcConfig};
use crate::dynamics::{hybrid_step, ImpulseInput, StickParams, StickState};
use crate::enforcement::{control_step, GainConfig};
use crate::error::{Error, Result};
use crate::scalar::{phase_tolerance, same_phase, to_f64, Real};
use crate::zerodyn::{approx_invariant, ZeroDynParams, ZeroDynState};

/// One impulse of a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord<T: Real> {
    /// One-based impulse index.
    pub k: usize,
    /// Time of the impulse, with `t_1 = 0`.
    pub t: T,
    /// State just before the impulse.
    pub state: StickState<T>,
    /// Input actually applied (including any section correction).
    pub input: ImpulseInput<T>,
    /// Time of flight that follows the impulse.
    pub delta: T,
    pub residual: ConstraintResidual<T>,
    /// Approximate invariant at `(θ_k, ω_k)`; absent when it is undefined.
    pub ebar: Option<T>,
    /// Section crossing index `j` when `θ_k` lies on the section.
    pub section: Option<usize>,
    /// Correction added at the section, when active.
    pub correction: Option<Vector2<T>>,
}

/// Section feedback `u = K (z − z*)` applied at `θ mod 2π = θ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionFeedback<T: Real> {
    pub theta_star: T,
    pub z_star: SVector<T, 5>,
    pub gain: SMatrix<T, 2, 5>,
    /// The correction is skipped while `‖z − z*‖₂` is below this value.
    pub deadband: T,
}

/// Error and correction recorded at a section crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRecord<T: Real> {
    pub j: usize,
    pub k: usize,
    pub error: SVector<T, 5>,
    pub correction: Vector2<T>,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput<T: Real> {
    pub records: Vec<RunRecord<T>>,
    pub crossings: Vec<CrossingRecord<T>>,
}

impl<T: Real> SimOutput<T> {
    /// Time of the last impulse.
    pub fn elapsed(&self) -> T {
        self.records.last().map_or(T::zero(), |r| r.t)
    }
}

/// Section coordinates `(h_x, h_y, v_x, v_y, ω)` of a state.
pub fn section_coords<T: Real>(s: &StickState<T>) -> SVector<T, 5> {
    SVector::<T, 5>::new(s.h.x, s.h.y, s.v.x, s.v.y, s.omega)
}

pub(crate) fn infeasible<T: Real>(step: usize, s: &StickState<T>, source: Error) -> Error {
    Error::Infeasible {
        step,
        theta: to_f64(s.theta),
        omega: to_f64(s.omega),
        h: [to_f64(s.h.x), to_f64(s.h.y)],
        v: [to_f64(s.v.x), to_f64(s.v.y)],
        source: Box::new(source),
    }
}

/// Simulates `impulses` impulses starting from `initial`.
///
/// Each record carries the control computed at that impulse; the flight after
/// the final impulse is not taken.
pub fn simulate<T: Real>(
    initial: &StickState<T>,
    impulses: usize,
    gains: &GainConfig<T>,
    config: &DvhcConfig<T>,
    params: &StickParams<T>,
    feedback: Option<&SectionFeedback<T>>,
) -> Result<SimOutput<T>> {
    let zp = ZeroDynParams::new(config, params.gravity)?;
    let has_ebar = config.phase.sin().abs() > T::default_epsilon().sqrt();
    let tol = phase_tolerance::<T>();
    let mut records = Vec::with_capacity(impulses);
    let mut crossings = Vec::new();
    let mut state = *initial;
    let mut t = T::zero();
    let mut prev_delta = None;
    for k in 1..=impulses {
        let decision = control_step(&state, gains, config, params, prev_delta)
            .map_err(|e| infeasible(k, &state, e))?;
        let mut input = decision.input;
        let mut section = None;
        let mut correction = None;
        if let Some(fb) = feedback {
            if same_phase(state.theta, fb.theta_star, tol) {
                let j = crossings.len() + 1;
                let e = section_coords(&state) - fb.z_star;
                let u = fb.gain * e;
                let active = e.norm() >= fb.deadband;
                if active {
                    input.impulse += u.x;
                    input.offset += u.y;
                    correction = Some(u);
                }
                section = Some(j);
                crossings.push(CrossingRecord {
                    j,
                    k,
                    error: e,
                    correction: u,
                    active,
                });
            }
        }
        if !input.on_stick(params) {
            return Err(infeasible(
                k,
                &state,
                Error::OffsetOffStick {
                    offset: to_f64(input.offset),
                    half_length: to_f64(params.half_length()),
                },
            ));
        }
        let mut delta = decision.intermediates.delta;
        let mut next = None;
        if k < impulses {
            let seg = hybrid_step(&state, &input, params, config.dtheta)
                .map_err(|e| infeasible(k, &state, e))?;
            delta = seg.delta;
            next = Some(seg.next_pre);
        }
        records.push(RunRecord {
            k,
            t,
            state,
            input,
            delta,
            residual: decision.residual,
            ebar: has_ebar
                .then(|| approx_invariant(&ZeroDynState::new(state.theta, state.omega), &zp)),
            section,
            correction,
        });
        if let Some(n) = next {
            t += delta;
            prev_delta = Some(delta);
            state = n;
        }
    }
    Ok(SimOutput { records, crossings })
}
