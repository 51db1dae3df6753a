//! Orbital stabilization through a once-per-revolution Poincaré map.
//!
//! The section is `θ mod 2π = θ*`. Between crossings the enforcing controller
//! runs unchanged; at a crossing its input may be corrected by `u`. The map is
//! linearized by forward differences about its fixed point and an LQR gain is
//! designed for the linearization.

use nalgebra::{DMatrix, Matrix5, SMatrix, SVector, Vector2};

use crate::dvhc::{on_constraint_state, DvhcConfig};
use crate::dynamics::{hybrid_step, StickParams, StickState};
use crate::enforcement::{control_step, GainConfig};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, wrap_two_pi, Real};
use crate::sim::{infeasible, section_coords, simulate, SectionFeedback, SimOutput};

pub type Vector5<T> = SVector<T, 5>;
pub type Matrix5x2<T> = SMatrix<T, 5, 2>;
pub type Matrix2x5<T> = SMatrix<T, 2, 5>;

/// Desired orbit: `ω = ω*` whenever `θ mod 2π = θ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec<T: Real> {
    pub theta_star: T,
    pub omega_star: T,
    pub config: DvhcConfig<T>,
}

impl<T: Real> OrbitSpec<T> {
    pub fn new(theta_star: T, omega_star: T, config: DvhcConfig<T>) -> Result<Self> {
        if config.n_per_rev.is_none() {
            return Err(Error::InvalidParameter {
                name: "n_per_rev",
                reason: "the section map needs an integer number of impulses per revolution".into(),
            });
        }
        if !(omega_star > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "omega_star",
                reason: format!("must be positive, got {}", to_f64(omega_star)),
            });
        }
        Ok(Self {
            theta_star: wrap_two_pi(theta_star),
            omega_star,
            config,
        })
    }

    pub fn impulses_per_revolution(&self) -> usize {
        self.config.n_per_rev.unwrap_or(0) as usize
    }
}

/// Point on the section: `z = (h_x, h_y, v_x, v_y, ω)` at orientation `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionState<T: Real> {
    pub z: Vector5<T>,
    pub theta: T,
}

impl<T: Real> SectionState<T> {
    pub fn from_stick(s: &StickState<T>) -> Self {
        Self {
            z: section_coords(s),
            theta: s.theta,
        }
    }

    pub fn to_stick(&self) -> StickState<T> {
        StickState::from_q_qdot([
            self.z[0], self.z[1], self.theta, self.z[2], self.z[3], self.z[4],
        ])
    }
}

/// Fixed point of the section map with its nominal inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint<T: Real> {
    pub z_star: SectionState<T>,
    pub i_star: T,
    pub r_star: T,
    pub delta: T,
}

/// One revolution of the closed loop from the section back to the section.
///
/// At the section the enforcing input for `z` plus the correction `u` is
/// applied; the remaining `N − 1` impulses are the enforcing inputs. With
/// `u = (I − I*, r − r*)` this is the map `P(z, I, r)`; `u = 0` at `z*` gives
/// `(I*, r*)` exactly.
pub fn poincare_map<T: Real>(
    z: &SectionState<T>,
    u: &Vector2<T>,
    spec: &OrbitSpec<T>,
    gains: &GainConfig<T>,
    params: &StickParams<T>,
) -> Result<SectionState<T>> {
    let cfg = &spec.config;
    let mut s = z.to_stick();
    let mut prev = None;
    for sub in 0..spec.impulses_per_revolution() {
        let d =
            control_step(&s, gains, cfg, params, prev).map_err(|e| infeasible(sub + 1, &s, e))?;
        let mut input = d.input;
        if sub == 0 {
            input.impulse += u.x;
            input.offset += u.y;
        }
        let seg =
            hybrid_step(&s, &input, params, cfg.dtheta).map_err(|e| infeasible(sub + 1, &s, e))?;
        prev = Some(seg.delta);
        s = seg.next_pre;
    }
    Ok(SectionState::from_stick(&s))
}

/// `P(z, I, r)` with explicit section inputs relative to a fixed point.
pub fn poincare_map_inputs<T: Real>(
    z: &SectionState<T>,
    impulse: T,
    offset: T,
    fp: &FixedPoint<T>,
    spec: &OrbitSpec<T>,
    gains: &GainConfig<T>,
    params: &StickParams<T>,
) -> Result<SectionState<T>> {
    let u = Vector2::new(impulse - fp.i_star, offset - fp.r_star);
    poincare_map(z, &u, spec, gains, params)
}

/// On-constraint state at `(θ*, ω*)` and the enforcing inputs there.
pub fn fixed_point<T: Real>(
    spec: &OrbitSpec<T>,
    gains: &GainConfig<T>,
    params: &StickParams<T>,
) -> Result<FixedPoint<T>> {
    let s = on_constraint_state(
        spec.theta_star,
        spec.omega_star,
        &spec.config,
        params.gravity,
    )?;
    let d = control_step(&s, gains, &spec.config, params, None)?;
    Ok(FixedPoint {
        z_star: SectionState::from_stick(&s),
        i_star: d.input.impulse,
        r_star: d.input.offset,
        delta: d.intermediates.delta,
    })
}

/// Forward-difference linearization `(A, B)` of the section map at `fp`.
pub fn linearize<T: Real>(
    fp: &FixedPoint<T>,
    eps1: T,
    eps2: T,
    spec: &OrbitSpec<T>,
    gains: &GainConfig<T>,
    params: &StickParams<T>,
) -> Result<(Matrix5<T>, Matrix5x2<T>)> {
    let z0 = fp.z_star.z;
    let mut a = Matrix5::zeros();
    for i in 0..5 {
        let mut z = fp.z_star;
        z.z[i] += eps1;
        let p = poincare_map(&z, &Vector2::zeros(), spec, gains, params)?;
        a.set_column(i, &((p.z - z0) / eps1));
    }
    let mut b = Matrix5x2::zeros();
    for i in 0..2 {
        let mut u = Vector2::zeros();
        u[i] = eps2;
        let p = poincare_map(&fp.z_star, &u, spec, gains, params)?;
        b.set_column(i, &((p.z - z0) / eps2));
    }
    Ok((a, b))
}

/// Spectral radius from Gelfand's formula, `lim ‖Mᵏ‖^{1/k}`, evaluated by
/// repeated normalized squaring.
pub fn spectral_radius<T: Real, const N: usize>(m: &SMatrix<T, N, N>) -> T {
    let mut p = *m;
    let mut log_scale = T::zero();
    let mut k = T::one();
    for _ in 0..40 {
        let n = p.abs().max();
        if n == T::zero() {
            return T::zero();
        }
        p /= n;
        log_scale += n.ln() / k;
        p = p * p;
        k *= lit(2.0);
    }
    let n = p.abs().max();
    if n == T::zero() {
        return log_scale.exp();
    }
    (log_scale + n.ln() / k).exp()
}

/// Numerical rank of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInfo<T> {
    pub rank: usize,
    pub dim: usize,
    pub singular_values: Vec<T>,
}

impl<T> RankInfo<T> {
    pub fn full(&self) -> bool {
        self.rank == self.dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport<T> {
    pub full: RankInfo<T>,
    /// One entry per input channel.
    pub per_column: Vec<RankInfo<T>>,
}

/// Singular values below this fraction of the largest count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;

fn ctrb_rank<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> RankInfo<T> {
    let n = a.nrows();
    let m = b.ncols();
    let mut c = DMatrix::zeros(n, n * m);
    let mut blk = b.clone();
    for i in 0..n {
        c.view_mut((0, i * m), (n, m)).copy_from(&blk);
        blk = a * blk;
    }
    let mut sv: Vec<T> = c.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    let smax = sv.first().copied().unwrap_or(T::zero());
    let cut = smax * lit(RANK_THRESHOLD);
    let rank = if smax > T::zero() {
        sv.iter().filter(|&&s| s > cut).count()
    } else {
        0
    };
    RankInfo {
        rank,
        dim: n,
        singular_values: sv,
    }
}

/// Rank of `[B, AB, …, Aⁿ⁻¹B]` for the full input matrix and for each column.
pub fn controllability_report<T: Real, const N: usize, const M: usize>(
    a: &SMatrix<T, N, N>,
    b: &SMatrix<T, N, M>,
) -> ControllabilityReport<T> {
    let ad = DMatrix::from_column_slice(N, N, a.as_slice());
    let bd = DMatrix::from_column_slice(N, M, b.as_slice());
    let per_column = (0..M)
        .map(|i| ctrb_rank(&ad, &bd.columns(i, 1).into_owned()))
        .collect();
    ControllabilityReport {
        full: ctrb_rank(&ad, &bd),
        per_column,
    }
}

/// Discrete LQR gain for `u = K x` minimising `Σ xᵀQx + uᵀRu`.
///
/// The Riccati recursion is iterated from `S = Q` until successive iterates
/// differ by less than `1e-12` elementwise (10⁵ iterations at most).
pub fn dlqr<T: Real, const N: usize, const M: usize>(
    a: &SMatrix<T, N, N>,
    b: &SMatrix<T, N, M>,
    q: &SMatrix<T, N, N>,
    r: &SMatrix<T, M, M>,
) -> Result<SMatrix<T, M, N>> {
    let tol = lit::<T>(1e-12).max(T::default_epsilon() * lit(100.0));
    let not_stab = |reason: &str| {
        let rep = controllability_report(a, b);
        Error::NotStabilizable {
            reason: reason.to_string(),
            rank: rep.full.rank,
            dim: N,
        }
    };
    let at = a.transpose();
    let bt = b.transpose();
    let gain = |s: &SMatrix<T, N, N>| -> Result<SMatrix<T, M, N>> {
        let inv = (r + bt * s * b).try_inverse().ok_or(Error::Singular {
            context: "R + BᵀSB",
        })?;
        Ok(-(inv * bt * s * a))
    };
    let mut s = *q;
    let mut converged = false;
    for _ in 0..100_000 {
        let k = gain(&s)?;
        let next = at * s * a + at * s * b * k + q;
        if !next.iter().all(|x| x.is_finite()) {
            return Err(not_stab("Riccati iteration diverged"));
        }
        let diff = (next - s).abs().max();
        s = next;
        if diff < tol * s.abs().max().max(T::one()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(not_stab("Riccati iteration did not converge"));
    }
    let k = gain(&s)?;
    if !(spectral_radius(&(a + b * k)) < T::one()) {
        return Err(not_stab("closed loop is not contractive"));
    }
    Ok(k)
}

/// Everything needed to run the stabilizing controller.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareArtifacts<T: Real> {
    pub fixed: FixedPoint<T>,
    pub a: Matrix5<T>,
    pub b: Matrix5x2<T>,
    pub k_fb: Matrix2x5<T>,
    pub eps1: T,
    pub eps2: T,
    pub lqr_q: Matrix5<T>,
    pub lqr_r: nalgebra::Matrix2<T>,
}

impl<T: Real> PoincareArtifacts<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        spec: &OrbitSpec<T>,
        gains: &GainConfig<T>,
        params: &StickParams<T>,
        eps1: T,
        eps2: T,
        lqr_q: Matrix5<T>,
        lqr_r: nalgebra::Matrix2<T>,
    ) -> Result<Self> {
        let fixed = fixed_point(spec, gains, params)?;
        let (a, b) = linearize(&fixed, eps1, eps2, spec, gains, params)?;
        let k_fb = dlqr(&a, &b, &lqr_q, &lqr_r)?;
        Ok(Self {
            fixed,
            a,
            b,
            k_fb,
            eps1,
            eps2,
            lqr_q,
            lqr_r,
        })
    }

    pub fn closed_loop_radius(&self) -> T {
        spectral_radius(&(self.a + self.b * self.k_fb))
    }
}

/// Runs `impulses` impulses with the section correction `u = K_fb e(j)`.
pub fn stabilized_run<T: Real>(
    initial: &StickState<T>,
    spec: &OrbitSpec<T>,
    artifacts: &PoincareArtifacts<T>,
    gains: &GainConfig<T>,
    params: &StickParams<T>,
    impulses: usize,
    deadband: T,
) -> Result<SimOutput<T>> {
    let fb = SectionFeedback {
        theta_star: spec.theta_star,
        z_star: artifacts.fixed.z_star.z,
        gain: artifacts.k_fb,
        deadband,
    };
    simulate(initial, impulses, gains, &spec.config, params, Some(&fb))
}
