//! Executes parsed scenarios and collects their tables and summaries.

use nalgebra::{Matrix2, Matrix5, Vector2};
use rayon::prelude::*;

use crate::dvhc::residuals;
use crate::error::{Error, Result};
use crate::orbit_stab::{
    controllability_report, fixed_point, poincare_map, stabilized_run, OrbitSpec, PoincareArtifacts,
};
use crate::scalar::{phase_tolerance, same_phase};
use crate::sim::{simulate, SimOutput};
use crate::zerodyn::{detect_period, drift_stats, floquet, iterate, ZeroDynParams, ZeroDynState};

use super::config::{Mode, OrbitSetup, ScenarioConfig, ZeroDynSetup};
use super::table::TableRow;

/// Ordered `key = value` pairs describing a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Vec<(String, String)>);

impl Summary {
    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    fn num(&mut self, key: impl Into<String>, v: f64) {
        self.put(key, fmt_num(v));
    }

    fn put_vec(&mut self, key: &str, values: impl IntoIterator<Item = f64>) {
        self.put(key, fmt_row(values.into_iter()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub rows: Vec<TableRow>,
    pub summary: Summary,
}

fn orbit_spec(cfg: &ScenarioConfig, o: &OrbitSetup) -> Result<OrbitSpec<f64>> {
    OrbitSpec::new(o.theta_star, o.omega_star, cfg.dvhc)
}

fn artifacts(cfg: &ScenarioConfig, o: &OrbitSetup) -> Result<PoincareArtifacts<f64>> {
    PoincareArtifacts::build(
        &orbit_spec(cfg, o)?,
        &cfg.gains,
        &cfg.stick,
        o.eps1,
        o.eps2,
        Matrix5::identity() * o.q_weight,
        Matrix2::identity() * o.r_weight,
    )
}

fn missing(what: &'static str) -> Error {
    Error::InvalidParameter {
        name: what,
        reason: "section required for this mode".into(),
    }
}

fn summarize_sim(
    cfg: &ScenarioConfig,
    out: &SimOutput<f64>,
    phase: f64,
    s: &mut Summary,
) -> Result<()> {
    let recs = &out.records;
    s.put("impulses", recs.len());
    s.num("elapsed", out.elapsed());
    let last = recs.last().expect("at least one impulse");
    s.num("final_rho_norm", last.residual.rho.norm());
    s.num("final_drho_norm", last.residual.drho.norm());
    let tol = phase_tolerance::<f64>();
    let at_phase: Vec<f64> = recs
        .iter()
        .filter(|r| same_phase(r.state.theta, phase, tol))
        .map(|r| r.state.omega)
        .collect();
    s.num("phase", phase);
    s.put_vec("omega_at_phase", at_phase.iter().copied());
    // Periodicity of the zero dynamics continued from the final state.
    let zp = ZeroDynParams::new(&cfg.dvhc, cfg.stick.gravity)?;
    let cont = iterate(
        ZeroDynState::new(last.state.theta, last.state.omega),
        1200,
        &zp,
    );
    let period = match detect_period(&cont.states, &zp, 1e-9) {
        Ok(rep) => rep.period.map_or("none".to_string(), |q| q.to_string()),
        Err(e) => format!("none ({e})"),
    };
    s.put("limit_period", period);
    // worst deviation from ρ_{k+1} = λ ρ_k
    let lam = cfg.gains.as_vector();
    let worst = recs
        .windows(2)
        .filter(|w| w[0].correction.is_none())
        .map(|w| (w[1].residual.rho - w[0].residual.rho.component_mul(&lam)).amax())
        .fold(0.0, f64::max);
    s.num("max_contraction_error", worst);
    let _ = residuals(&last.state, &cfg.dvhc, cfg.stick.gravity)?;
    Ok(())
}

fn run_enforce(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let init = cfg.initial.ok_or_else(|| missing("initial"))?;
    let out = simulate(&init, cfg.impulses, &cfg.gains, &cfg.dvhc, &cfg.stick, None)?;
    let mut s = Summary::default();
    s.put("mode", cfg.mode);
    summarize_sim(cfg, &out, crate::scalar::wrap_two_pi(init.theta), &mut s)?;
    Ok(ScenarioOutput {
        rows: out.records.iter().map(TableRow::from_record).collect(),
        summary: s,
    })
}

fn run_stabilize(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let init = cfg.initial.ok_or_else(|| missing("initial"))?;
    let o = cfg.orbit.as_ref().ok_or_else(|| missing("orbit"))?;
    let spec = orbit_spec(cfg, o)?;
    let art = artifacts(cfg, o)?;
    let out = stabilized_run(
        &init,
        &spec,
        &art,
        &cfg.gains,
        &cfg.stick,
        cfg.impulses,
        o.deadband,
    )?;
    let mut s = Summary::default();
    s.put("mode", cfg.mode);
    summarize_sim(cfg, &out, spec.theta_star, &mut s)?;
    for c in &out.crossings {
        s.put(
            format!("crossing_{}", c.j),
            format!(
                "k={} e_norm={} active={} u_I={} u_r={}",
                c.k,
                fmt_num(c.error.norm()),
                c.active,
                fmt_num(c.correction.x),
                fmt_num(c.correction.y)
            ),
        );
    }
    let active: Vec<String> = out
        .crossings
        .iter()
        .filter(|c| c.active)
        .map(|c| c.k.to_string())
        .collect();
    s.put("active_k", active.join(" "));
    Ok(ScenarioOutput {
        rows: out.records.iter().map(TableRow::from_record).collect(),
        summary: s,
    })
}

/// Analysis of one zero-dynamics run.
pub fn zero_dyn_summary(
    zp: &ZeroDynParams<f64>,
    z: &ZeroDynSetup,
    theta: f64,
    omega: f64,
) -> ScenarioOutput {
    let run = iterate(ZeroDynState::new(theta, omega), z.steps, zp);
    let mut s = Summary::default();
    s.num("theta1", theta);
    s.num("omega1", omega);
    s.put("steps_requested", z.steps);
    s.put("steps_completed", run.steps_completed);
    s.put(
        "stopped",
        run.stopped
            .as_ref()
            .map_or("no".to_string(), |e| e.to_string()),
    );
    match detect_period(&run.states, zp, z.period_tol) {
        Ok(rep) => {
            s.put("rational", format!("{}/{}", rep.p, rep.q));
            s.put(
                "period",
                rep.period.map_or("none".into(), |q| q.to_string()),
            );
            s.num("max_period_deviation", rep.max_deviation);
            s.num("omega_min", rep.omega_min);
            s.put(
                "assumption_holds",
                rep.assumption_holds.map_or("n/a".into(), |b| b.to_string()),
            );
            if let Some(q) = rep.period {
                match floquet(&run.states[..q], zp, z.fd_eps) {
                    Ok(f) => s.put_vec("floquet_magnitudes", f.eigen_magnitudes),
                    Err(e) => s.put("floquet_magnitudes", format!("error: {e}")),
                }
            }
        }
        Err(e) => s.put("period", format!("none ({e})")),
    }
    match drift_stats(&run.states, z.theta_ref) {
        Ok(d) => {
            s.num("drift_percent", d.percent);
            s.put("drift_recurrences", d.recurrences);
            s.put("drift_last_index", d.last_index);
        }
        Err(e) => s.put("drift_percent", format!("n/a ({e})")),
    }
    let rows = run
        .states
        .iter()
        .enumerate()
        .map(|(i, st)| TableRow::from_zero_dyn(i + 1, st, zp))
        .collect();
    ScenarioOutput { rows, summary: s }
}

fn run_dzd(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let z = cfg.zerodyn.as_ref().ok_or_else(|| missing("zerodyn"))?;
    let zp = ZeroDynParams::new(&cfg.dvhc, cfg.stick.gravity)?;
    let mut out = zero_dyn_summary(&zp, z, z.theta, z.omega);
    out.summary.0.insert(0, ("mode".into(), "dzd".into()));
    Ok(out)
}

/// Shortest round-trip form, switching to an exponent for very small or large
/// magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn fmt_row(v: impl Iterator<Item = f64>) -> String {
    v.map(fmt_num).collect::<Vec<_>>().join(" ")
}

fn run_fixed_point(cfg: &ScenarioConfig, s: &mut Summary) -> Result<()> {
    let o = cfg.orbit.as_ref().ok_or_else(|| missing("orbit"))?;
    let spec = orbit_spec(cfg, o)?;
    let fp = fixed_point(&spec, &cfg.gains, &cfg.stick)?;
    let back = poincare_map(&fp.z_star, &Vector2::zeros(), &spec, &cfg.gains, &cfg.stick)?;
    s.put("z_star", fmt_row(fp.z_star.z.iter().copied()));
    s.num("i_star", fp.i_star);
    s.num("r_star", fp.r_star);
    s.num("delta_star", fp.delta);
    s.num("closure_residual", (back.z - fp.z_star.z).amax());
    Ok(())
}

fn run_linearize(cfg: &ScenarioConfig, s: &mut Summary) -> Result<()> {
    let o = cfg.orbit.as_ref().ok_or_else(|| missing("orbit"))?;
    run_fixed_point(cfg, s)?;
    let art = artifacts(cfg, o)?;
    s.num("eps1", o.eps1);
    s.num("eps2", o.eps2);
    for i in 0..5 {
        s.put(
            format!("A_row{}", i + 1),
            fmt_row(art.a.row(i).iter().copied()),
        );
    }
    for i in 0..5 {
        s.put(
            format!("B_row{}", i + 1),
            fmt_row(art.b.row(i).iter().copied()),
        );
    }
    for i in 0..2 {
        s.put(
            format!("K_row{}", i + 1),
            fmt_row(art.k_fb.row(i).iter().copied()),
        );
    }
    s.num("closed_loop_radius", art.closed_loop_radius());
    let rep = controllability_report(&art.a, &art.b);
    s.put("ctrb_rank", rep.full.rank);
    s.put(
        "ctrb_singular_values",
        fmt_row(rep.full.singular_values.iter().copied()),
    );
    for (i, c) in rep.per_column.iter().enumerate() {
        s.put(format!("ctrb_rank_B{}", i + 1), c.rank);
    }
    Ok(())
}

/// Runs one scenario according to its mode.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    match cfg.mode {
        Mode::Enforce => run_enforce(cfg),
        Mode::Stabilize => run_stabilize(cfg),
        Mode::Dzd => run_dzd(cfg),
        Mode::FixedPoint | Mode::Linearize => {
            let mut s = Summary::default();
            s.put("mode", cfg.mode);
            if cfg.mode == Mode::FixedPoint {
                run_fixed_point(cfg, &mut s)?;
            } else {
                run_linearize(cfg, &mut s)?;
            }
            Ok(ScenarioOutput {
                rows: Vec::new(),
                summary: s,
            })
        }
        Mode::Sweep => Err(Error::InvalidParameter {
            name: "mode",
            reason: "sweep scenarios produce several tables; use run_sweep".into(),
        }),
    }
}

/// Zero-dynamics runs over every `(theta, omega)` pair of a sweep scenario,
/// evaluated in parallel and returned in input order.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<ScenarioOutput>> {
    let z = cfg.zerodyn.as_ref().ok_or_else(|| missing("zerodyn"))?;
    let zp = ZeroDynParams::new(&cfg.dvhc, cfg.stick.gravity)?;
    let pairs: Vec<(f64, f64)> = z
        .sweep_thetas
        .iter()
        .flat_map(|&t| z.sweep_omegas.iter().map(move |&w| (t, w)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(t, w)| {
            let zs = ZeroDynSetup {
                theta_ref: t,
                ..z.clone()
            };
            zero_dyn_summary(&zp, &zs, t, w)
        })
        .collect())
}

/// Re-runs a scenario under a different mode, keeping every other setting.
pub fn with_mode(cfg: &ScenarioConfig, mode: Mode) -> ScenarioConfig {
    ScenarioConfig {
        mode,
        ..cfg.clone()
    }
}
