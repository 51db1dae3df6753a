//! Acceptance checks. Each criterion prints one PASS/FAIL line followed by the
//! individual checks; the binary exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::{Matrix2, Matrix5, SMatrix, Vector2};

use devilstick::dvhc::{on_constraint_state, phi, psi, residuals, DvhcConfig};
use devilstick::dynamics::{
    apply_impulse, ballistic_flight, ImpulseInput, StickParams, StickState,
};
use devilstick::enforcement::GainConfig;
use devilstick::error::Error;
use devilstick::orbit_stab::{
    controllability_report, dlqr, fixed_point, linearize, poincare_map, spectral_radius,
    stabilized_run, Matrix5x2, OrbitSpec, PoincareArtifacts,
};
use devilstick::scalar::same_phase;
use devilstick::sim::{simulate, SimOutput};
use devilstick::zerodyn::{
    approx_invariant, continuous_invariant, detect_period, drift_stats, floquet, iterate,
    ZeroDynParams, ZeroDynState,
};

struct Check {
    what: String,
    ok: bool,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.0.push(Check {
            what: what.into(),
            ok,
        });
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check(
            (got - want).abs() <= tol,
            format!("{label}: {got:.10} vs {want} (tol {tol:e})"),
        );
    }

    fn below(&mut self, label: &str, got: f64, limit: f64) {
        self.check(got < limit, format!("{label}: {got:e} < {limit:e}"));
    }

    fn within_factor(&mut self, label: &str, got: f64, want: f64, factor: f64) {
        let ratio = got / want;
        self.check(
            ratio >= 1.0 / factor && ratio <= factor,
            format!("{label}: {got:e} vs {want:e} (ratio {ratio:.4}, allowed factor {factor})"),
        );
    }

    fn note(&mut self, what: impl Into<String>) {
        self.0.push(Check {
            what: format!("note: {}", what.into()),
            ok: true,
        });
    }
}

const G: f64 = 9.81;
const FIG3_IC: [f64; 6] = [0.4, -1.2, 0.0, 6.1, -6.0, 9.0];

const REF_A: [[f64; 5]; 5] = [
    [0.0156, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0156, 0.0, 0.0, 0.0],
    [2.1827, 1.4297, 0.4612, 0.7989, 0.0],
    [1.5525, 0.8448, 0.3111, 0.5388, 0.0],
    [2.7837, 1.7288, 0.5577, 0.9660, 0.0],
];
const REF_BT: [[f64; 5]; 2] = [
    [-0.0436, 0.0334, 8.7712, 5.4318, 10.2021],
    [0.0, -1.4029, -27.6739, -8.0578, -33.4632],
];
const REF_K: [[f64; 5]; 2] = [
    [-0.2439, -0.1185, -0.0486, -0.0842, 0.0],
    [0.0066, 0.0153, 0.0018, 0.0030, 0.0],
];

fn ref_a() -> Matrix5<f64> {
    Matrix5::from_fn(|i, j| REF_A[i][j])
}

fn ref_b() -> Matrix5x2<f64> {
    Matrix5x2::from_fn(|i, j| REF_BT[j][i])
}

fn ref_k() -> SMatrix<f64, 2, 5> {
    SMatrix::<f64, 2, 5>::from_fn(|i, j| REF_K[i][j])
}

fn params() -> StickParams<f64> {
    StickParams::new(0.1, 0.5, G).unwrap()
}

fn cfg6(phase: f64) -> DvhcConfig<f64> {
    DvhcConfig::per_revolution(1.0, phase, 6).unwrap()
}

fn half() -> GainConfig<f64> {
    GainConfig::uniform(0.5).unwrap()
}

fn spec() -> OrbitSpec<f64> {
    OrbitSpec::new(FRAC_PI_3, 8.0, cfg6(FRAC_PI_2)).unwrap()
}

fn max_abs_diff<const R: usize, const C: usize>(
    a: &SMatrix<f64, R, C>,
    b: &SMatrix<f64, R, C>,
) -> f64 {
    (a - b).abs().max()
}

fn omega_at_phase(out: &SimOutput<f64>, phase: f64) -> Vec<f64> {
    out.records
        .iter()
        .filter(|r| same_phase(r.state.theta, phase, 1e-9))
        .map(|r| r.state.omega)
        .collect()
}

/// `ρ_{k+1} = λ ρ_k` and `Dρ_{k+1} = (λ − 1) ρ_k / δ_k` over a run, worst case.
fn recursion_errors(out: &SimOutput<f64>, lambda: f64) -> (f64, f64) {
    let mut e_rho: f64 = 0.0;
    let mut e_drho: f64 = 0.0;
    for w in out.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        e_rho = e_rho.max((b.residual.rho - a.residual.rho * lambda).amax());
        e_drho = e_drho.max((b.residual.drho - a.residual.rho * ((lambda - 1.0) / a.delta)).amax());
    }
    (e_rho, e_drho)
}

fn limit_period(out: &SimOutput<f64>, cfg: &DvhcConfig<f64>) -> Option<usize> {
    let last = out.records.last().unwrap().state;
    let zp = ZeroDynParams::new(cfg, G).unwrap();
    let run = iterate(ZeroDynState::new(last.theta, last.omega), 1200, &zp);
    detect_period(&run.states, &zp, 1e-9)
        .ok()
        .and_then(|r| r.period)
}

fn c1(c: &mut Checks) {
    let fp = fixed_point(&spec(), &half(), &params()).unwrap();
    let want = [0.8660, -0.5000, 6.6159, 3.1777, 8.0];
    for (i, w) in want.iter().enumerate() {
        c.near(&format!("z*[{}]", i + 1), fp.z_star.z[i], *w, 1e-3);
    }
    c.near("I*", fp.i_star, 0.7639, 1e-3);
    c.near("r*", fp.r_star, -0.0041, 1e-3);
}

fn c2(c: &mut Checks) {
    let (s, l, p) = (spec(), half(), params());
    let fp = fixed_point(&s, &l, &p).unwrap();
    let back = poincare_map(&fp.z_star, &Vector2::zeros(), &s, &l, &p).unwrap();
    c.below(
        "|P(z*, I*, r*) - z*|_inf",
        (back.z - fp.z_star.z).amax(),
        1e-8,
    );
}

fn c3(c: &mut Checks) {
    let (s, l, p) = (spec(), half(), params());
    let fp = fixed_point(&s, &l, &p).unwrap();
    let (a, b) = linearize(&fp, 1e-6, 1e-6, &s, &l, &p).unwrap();
    c.below(
        "max |A - A_ref| (eps1 = eps2 = 1e-6)",
        max_abs_diff(&a, &ref_a()),
        1e-2,
    );
    c.below(
        "max |B - B_ref| (eps1 = eps2 = 1e-6)",
        max_abs_diff(&b, &ref_b()),
        1e-2,
    );
    c.note(format!(
        "B column 2 at 1e-6: {:.4?}",
        b.column(1).as_slice()
    ));
    let (a3, b3) = linearize(&fp, 1e-3, 2e-3, &s, &l, &p).unwrap();
    c.note(format!(
        "at eps1 = 1e-3, eps2 = 2e-3: max |A - A_ref| = {:.2e}, max |B - B_ref| = {:.2e}",
        max_abs_diff(&a3, &ref_a()),
        max_abs_diff(&b3, &ref_b())
    ));
}

fn c4(c: &mut Checks) {
    let (s, l, p) = (spec(), half(), params());
    let q = Matrix5::identity();
    let r = Matrix2::identity() * 2.0;
    let k_ref = dlqr(&ref_a(), &ref_b(), &q, &r).unwrap();
    c.below(
        "reference (A, B): max |K - K_ref|",
        max_abs_diff(&k_ref, &ref_k()),
        1e-2,
    );
    c.below(
        "reference (A, B): closed-loop radius",
        spectral_radius(&(ref_a() + ref_b() * k_ref)),
        1.0,
    );
    let art = PoincareArtifacts::build(&s, &l, &p, 1e-3, 2e-3, q, r).unwrap();
    c.below(
        "computed (A, B): max |K - K_ref|",
        max_abs_diff(&art.k_fb, &ref_k()),
        1e-2,
    );
    c.below(
        "computed (A, B): closed-loop radius",
        art.closed_loop_radius(),
        1.0,
    );

    let rep = controllability_report(&ref_a(), &ref_b());
    c.check(
        rep.full.full(),
        format!("reference (A, B) rank {} of 5", rep.full.rank),
    );
    c.check(
        !rep.per_column[0].full(),
        format!("reference (A, B1) rank {} < 5", rep.per_column[0].rank),
    );
    let rep = controllability_report(&art.a, &art.b);
    c.check(
        rep.full.full(),
        format!("computed (A, B) rank {} of 5", rep.full.rank),
    );
    c.check(
        !rep.per_column[0].full(),
        format!("computed (A, B1) rank {} < 5", rep.per_column[0].rank),
    );

    let dead = GainConfig::uniform(0.0).unwrap();
    let fp0 = fixed_point(&s, &dead, &p).unwrap();
    let (a0, b0) = linearize(&fp0, 1e-3, 2e-3, &s, &dead, &p).unwrap();
    let rep0 = controllability_report(&a0, &b0);
    c.check(
        !rep0.full.full(),
        format!("lambda = 0 rebuild: (A, B) rank {} < 5", rep0.full.rank),
    );
}

fn c5(c: &mut Checks) {
    let s0 = StickState::from_q_qdot(FIG3_IC);
    let cfg = cfg6(FRAC_PI_2);
    let out = simulate(&s0, 25, &half(), &cfg, &params(), None).unwrap();
    c.check(
        out.records.len() == 25,
        format!("{} impulses", out.records.len()),
    );
    let (er, ed) = recursion_errors(&out, 0.5);
    c.below("max |rho_{k+1} - 0.5 rho_k|", er, 1e-9);
    c.below("max |Drho_{k+1} + 0.5 rho_k / delta_k|", ed, 1e-9);
    c.near("elapsed (s)", out.elapsed(), 2.91, 0.02);
    let w = omega_at_phase(&out, 0.0);
    c.near(
        "omega at theta = 0 (last crossing)",
        *w.last().unwrap(),
        9.9963,
        1e-2,
    );
}

fn c6(c: &mut Checks) {
    let mut ic = FIG3_IC;
    ic[2] = 0.1;
    let cfg = cfg6(FRAC_PI_2);
    let out = simulate(
        &StickState::from_q_qdot(ic),
        25,
        &half(),
        &cfg,
        &params(),
        None,
    )
    .unwrap();
    c.near("elapsed (s)", out.elapsed(), 3.05, 0.02);
    c.check(limit_period(&out, &cfg).is_none(), "no period detected");
    let (er, ed) = recursion_errors(&out, 0.5);
    c.below("max |rho_{k+1} - 0.5 rho_k|", er, 1e-9);
    c.below("max |Drho_{k+1} + 0.5 rho_k / delta_k|", ed, 1e-9);
    let last = out.records.last().unwrap().residual;
    c.below("final |rho|", last.rho.norm(), 1e-6);
}

fn c7(c: &mut Checks) {
    let (s, l, p) = (spec(), half(), params());
    let art = PoincareArtifacts::build(
        &s,
        &l,
        &p,
        1e-3,
        2e-3,
        Matrix5::identity(),
        Matrix2::identity() * 2.0,
    )
    .unwrap();
    let s0 = StickState::from_q_qdot(FIG3_IC);
    let out = stabilized_run(&s0, &s, &art, &l, &p, 25, 1e-3).unwrap();
    let active: Vec<usize> = out
        .crossings
        .iter()
        .filter(|x| x.active)
        .map(|x| x.k)
        .collect();
    c.check(
        active == [2, 8, 14],
        format!("correction active at k = {active:?}"),
    );
    let js: Vec<usize> = out
        .crossings
        .iter()
        .filter(|x| x.active)
        .map(|x| x.j)
        .collect();
    c.check(js == [1, 2, 3], format!("active crossings j = {js:?}"));
    c.near("elapsed (s)", out.elapsed(), 4.05, 0.02);
    let w = omega_at_phase(&out, FRAC_PI_3);
    c.near(
        "omega at theta = pi/3 (last crossing)",
        *w.last().unwrap(),
        8.0,
        1e-3,
    );
    // Continue the same closed loop until it has settled.
    let long = stabilized_run(&s0, &s, &art, &l, &p, 49, 1e-3).unwrap();
    let r = long.records.last().unwrap().residual;
    c.below("rho after 8 revolutions", r.rho.amax(), 1e-6);
    c.below("Drho after 8 revolutions", r.drho.amax(), 1e-6);
    c.note(format!(
        "at k = 25: |rho| = {:.2e}, |Drho| = {:.2e}",
        out.records[24].residual.rho.amax(),
        out.records[24].residual.drho.amax()
    ));
}

fn c8(c: &mut Checks) {
    let zp = ZeroDynParams::new(&cfg6(FRAC_PI_2), G).unwrap();
    for theta in [0.0, PI / 6.0] {
        let run = iterate(ZeroDynState::new(theta, 8.0), 1200, &zp);
        c.check(
            run.stopped.is_none(),
            format!("theta1 = {theta:.4}: 1200 steps completed"),
        );
        let rep = detect_period(&run.states, &zp, 1e-9).unwrap();
        c.check(
            rep.period == Some(6),
            format!(
                "theta1 = {theta:.4}: period {:?}, max |w_(k+6) - w_k| = {:e}",
                rep.period, rep.max_deviation
            ),
        );
        c.check(
            rep.assumption_holds == Some(true),
            format!(
                "theta1 = {theta:.4}: w_min^2 = {:.4} > |P| = {:.4}",
                rep.omega_min.powi(2),
                zp.p.unwrap().abs()
            ),
        );
    }
}

fn c9(c: &mut Checks) {
    let zp = ZeroDynParams::new(&cfg6(FRAC_PI_2), G).unwrap();
    let run = iterate(ZeroDynState::new(0.1, 8.0), 1200, &zp);
    c.check(
        matches!(run.stopped, Some(Error::NoRealSolution { .. })),
        "(0.1, 8): stops with no real solution",
    );
    c.near(
        "(0.1, 8): steps completed",
        run.steps_completed as f64,
        516.0,
        2.0,
    );
    let d = drift_stats(&run.states, 0.1).unwrap();
    c.near("(0.1, 8): drift %", d.percent, -7.48, 0.05);
    let run = iterate(ZeroDynState::new(0.1, 30.0), 1200, &zp);
    let d = drift_stats(&run.states, 0.1).unwrap();
    c.within_factor("(0.1, 30): drift %", d.percent, -5.05e-5, 2.0);
}

fn c10(c: &mut Checks) {
    let cfg = DvhcConfig::new(1.0, FRAC_PI_2, 3.0 / 7.0 * 2.0 * PI).unwrap();
    let zp = ZeroDynParams::new(&cfg, G).unwrap();
    let run = iterate(ZeroDynState::new(0.0, 19.0), 1200, &zp);
    let rep = detect_period(&run.states, &zp, 1e-9).unwrap();
    c.check(
        rep.period == Some(7),
        format!(
            "(0, 19): period {:?}, max dev {:e}",
            rep.period, rep.max_deviation
        ),
    );
    let run = iterate(ZeroDynState::new(0.1, 19.0), 1200, &zp);
    c.check(run.stopped.is_none(), "(0.1, 19): 1200 steps completed");
    c.near(
        "(0.1, 19): drift %",
        drift_stats(&run.states, 0.1).unwrap().percent,
        8.41,
        0.05,
    );
    let run = iterate(ZeroDynState::new(0.1, 30.0), 1200, &zp);
    c.within_factor(
        "(0.1, 30): drift %",
        drift_stats(&run.states, 0.1).unwrap().percent,
        5.54e-3,
        2.0,
    );
}

fn c11(c: &mut Checks) {
    let zp = ZeroDynParams::new(&cfg6(FRAC_PI_2), G).unwrap();
    let run = iterate(ZeroDynState::new(0.0, 8.0), 12, &zp);
    let f = floquet(&run.states[..6], &zp, 1e-7).unwrap();
    for (i, m) in f.eigen_magnitudes.iter().enumerate() {
        c.near(&format!("|mu_{}|", i + 1), *m, 1.0, 1e-6);
    }
}

fn c12(c: &mut Checks) {
    // Constraint velocity against the continuous tangent velocity. Ψ is the chord
    // velocity of the flight that ends at θ, so the tangent is taken at θ − Δθ*/2.
    let d = 2.0 * PI / 1e5;
    let cfg = DvhcConfig::new(1.0, FRAC_PI_2, d).unwrap();
    let tangent = |th: f64, w: f64| {
        let (s, co) = (th - cfg.phase).sin_cos();
        Vector2::new(-s, co) * (cfg.radius * w)
    };
    let rel = |th: f64, w: f64, at: f64| {
        let p = psi(th, w, &cfg, G).unwrap();
        (p - tangent(at, w)).norm() / tangent(th, w).norm()
    };
    let mut worst_mid: f64 = 0.0;
    let mut worst_same: f64 = 0.0;
    // Speeds used by the orbit and the zero dynamics experiments.
    for th in [0.0, 0.7, 2.0, 3.5, 5.1] {
        for w in [8.0, 19.0, 30.0] {
            worst_mid = worst_mid.max(rel(th, w, th - d / 2.0));
            worst_same = worst_same.max(rel(th, w, th));
        }
    }
    c.below(
        "Psi vs Phi' omega at the chord midpoint, relative, omega >= 8",
        worst_mid,
        1e-5,
    );
    c.note(format!("same-angle comparison gives {worst_same:.2e}"));
    // The gravity part of Ψ is g Δθ*/(2ω), so slow rotation sits above the bound.
    c.note(format!(
        "at omega = 3 the midpoint comparison gives {:.2e}",
        rel(0.7, 3.0, 0.7 - d / 2.0)
    ));

    // One rotation of the zero dynamics against RK4 of θ̈ = −g sin θ / R.
    let n = 6000;
    let d = 2.0 * PI / n as f64;
    let zp = ZeroDynParams::new(
        &DvhcConfig::per_revolution(1.0, FRAC_PI_2, n as u32).unwrap(),
        G,
    )
    .unwrap();
    let run = iterate(ZeroDynState::new(0.0, 8.0), n, &zp);
    // RK4 in time with fine steps, recording ω when θ crosses each θ_k − Δθ*/2.
    let f = |th: f64, w: f64| (w, -G * th.sin());
    let (mut th, mut w) = (0.0_f64, 8.0_f64);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_same: f64 = 0.0;
    let mut k = 1;
    let mut same_k = 1;
    while k <= n {
        let k1 = f(th, w);
        let k2 = f(th + h / 2.0 * k1.0, w + h / 2.0 * k1.1);
        let k3 = f(th + h / 2.0 * k2.0, w + h / 2.0 * k2.1);
        let k4 = f(th + h * k3.0, w + h * k3.1);
        let nth = th + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let nw = w + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        while k <= n && nth >= k as f64 * d - d / 2.0 {
            let target = k as f64 * d - d / 2.0;
            let wi = w + (nw - w) * (target - th) / (nth - th);
            worst = worst.max((run.states[k].omega - wi).abs() / wi);
            k += 1;
        }
        while same_k <= n && nth >= same_k as f64 * d {
            let target = same_k as f64 * d;
            let wi = w + (nw - w) * (target - th) / (nth - th);
            worst_same = worst_same.max((run.states[same_k].omega - wi).abs() / wi);
            same_k += 1;
        }
        th = nth;
        w = nw;
    }
    c.below(
        "zero dynamics vs RK4 over one rotation, relative in omega",
        worst,
        1e-4,
    );
    c.note(format!(
        "sampling RK4 at theta_k instead gives {worst_same:.2e}"
    ));

    // Approximate invariant against the continuous one.
    let d = 2.0 * PI / 1e5;
    let mut worst: f64 = 0.0;
    for phase in [FRAC_PI_2, FRAC_PI_2 - 0.01, 1.2, -FRAC_PI_2] {
        let cfg = DvhcConfig::new(1.0, phase, d).unwrap();
        let zp = ZeroDynParams::new(&cfg, G).unwrap();
        for th in [0.0, 0.4, 1.9, 3.3, 5.8] {
            let e_bar = approx_invariant(&ZeroDynState::new(th, 8.0), &zp);
            let e = continuous_invariant(th - d / 2.0, 8.0, &cfg, G).unwrap();
            worst = worst.max((e_bar - e).abs() / e.abs().max(1.0));
        }
    }
    c.below("Ebar vs E (E at theta - dtheta/2)", worst, 1e-6);
}

/// Fixed-step RK4 of the free flight equations.
fn rk4_flight(s: &StickState<f64>, dt: f64, n: usize) -> StickState<f64> {
    let f = |x: [f64; 6]| [x[3], x[4], x[5], 0.0, -G, 0.0];
    let mut x = s.to_q_qdot();
    let h = dt / n as f64;
    for _ in 0..n {
        let add = |a: [f64; 6], b: [f64; 6], c: f64| {
            std::array::from_fn::<f64, 6, _>(|i| a[i] + c * b[i])
        };
        let k1 = f(x);
        let k2 = f(add(x, k1, h / 2.0));
        let k3 = f(add(x, k2, h / 2.0));
        let k4 = f(add(x, k3, h));
        x = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    StickState::from_q_qdot(x)
}

fn c13(c: &mut Checks) {
    let p = params();
    let states = [
        StickState::from_q_qdot(FIG3_IC),
        StickState::from_q_qdot([0.0, -1.0, 1.3, 6.6, 3.2, 8.0]),
        StickState::from_q_qdot([-2.0, 0.5, -0.4, -1.0, 9.0, 0.3]),
    ];
    let mut flight: f64 = 0.0;
    let mut energy: f64 = 0.0;
    for s in &states {
        for dt in [0.05, 0.16, 0.7] {
            let a = ballistic_flight(s, dt, &p).to_q_qdot();
            let b = rk4_flight(s, dt, 10_000).to_q_qdot();
            flight = flight.max(
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            );
            let e0 = s.energy(&p);
            let e1 = ballistic_flight(s, dt, &p).energy(&p);
            energy = energy.max((e1 - e0).abs() / e0.abs());
        }
    }
    c.below("closed-form flight vs RK4 (10^4 substeps)", flight, 1e-9);
    c.below("flight energy drift, relative", energy, 1e-9);
    let mut momentum: f64 = 0.0;
    for s in &states {
        for (i, r) in [(0.76, -0.004), (-0.3, 0.2), (1.5, 0.0)] {
            let post = apply_impulse(s, &ImpulseInput::new(i, r), &p);
            let dv = (post.v - s.v) * p.mass - Vector2::new(-s.theta.sin(), s.theta.cos()) * i;
            let dl = p.inertia * (post.omega - s.omega) - i * r;
            momentum = momentum.max(dv.amax()).max(dl.abs());
            momentum = momentum
                .max((post.h - s.h).amax())
                .max((post.theta - s.theta).abs());
        }
    }
    c.below("impulse momentum bookkeeping", momentum, 1e-12);
}

fn c14(c: &mut Checks) {
    let cfg = cfg6(FRAC_PI_2 - 0.01);
    let s0 = on_constraint_state(0.0, 8.0, &cfg, G).unwrap();
    c.note(format!(
        "on-constraint start: h = ({:.4}, {:.4}), v = ({:.4}, {:.4})",
        s0.h.x, s0.h.y, s0.v.x, s0.v.y
    ));
    let listed = StickState::from_q_qdot([0.0, -1.0, 0.0, 6.6538, -4.3954, 8.0]);
    c.note(format!(
        "listed start lies {:.2e} from the constraint in position, {:.2e} in velocity",
        (listed.h - phi(0.0, &cfg)).amax(),
        (listed.v - s0.v).amax()
    ));
    let out = simulate(&s0, 25, &half(), &cfg, &params(), None).unwrap();
    let worst = out
        .records
        .iter()
        .map(|r| r.residual.max_abs())
        .fold(0.0, f64::max);
    c.below("max |rho|, |Drho| over 25 impulses", worst, 1e-9);
    let w = omega_at_phase(&out, 0.0);
    let increasing = w.windows(2).all(|p| p[1] > p[0]);
    c.check(
        increasing && w.len() >= 4,
        format!("omega at theta = 0 strictly increasing: {w:.4?}"),
    );
    c.near("elapsed (s)", out.elapsed(), 3.50, 0.02);
}

fn c15(c: &mut Checks) {
    let cfg = cfg6(FRAC_PI_2);
    let dead = GainConfig::uniform(0.0).unwrap();
    let out = simulate(
        &StickState::from_q_qdot(FIG3_IC),
        3,
        &dead,
        &cfg,
        &params(),
        None,
    )
    .unwrap();
    c.below("|rho_2|", out.records[1].residual.rho.amax(), 1e-9);
    c.below("|Drho_3|", out.records[2].residual.drho.amax(), 1e-9);
    let r3 = residuals(&out.records[2].state, &cfg, G).unwrap();
    c.below("|rho_3|", r3.rho.amax(), 1e-9);
}

type Criterion = fn(&mut Checks);

fn main() {
    let criteria: [(&str, Criterion); 15] = [
        ("fixed point", c1),
        ("fixed-point closure", c2),
        ("linearization", c3),
        ("LQR gain and controllability", c4),
        ("enforcement run, theta1 = 0", c5),
        ("enforcement run, theta1 = 0.1", c6),
        ("stabilized run", c7),
        ("zero dynamics periodicity, N = 6", c8),
        ("zero dynamics drift, N = 6", c9),
        ("zero dynamics, dtheta = (3/7) 2pi", c10),
        ("Floquet multipliers", c11),
        ("continuous limits", c12),
        ("flight and impulse oracles", c13),
        ("tilted phase, aperiodic", c14),
        ("deadbeat gains", c15),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        let mut checks = Checks::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| f(&mut checks)));
        let ok = outcome.is_ok() && checks.0.iter().all(|c| c.ok);
        println!(
            "criterion {n:>2} [{name}]: {}",
            if ok { "PASS" } else { "FAIL" }
        );
        for ch in &checks.0 {
            println!("      {} {}", if ch.ok { "ok  " } else { "FAIL" }, ch.what);
        }
        if outcome.is_err() {
            println!("      FAIL panicked");
        }
        if !ok {
            failed.push(n);
        }
    }
    println!(
        "acceptance: {} of {} criteria pass{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
