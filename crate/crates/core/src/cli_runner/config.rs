//! Scenario files: flat `key = value` lines grouped under `[section]` headers,
//! `#` starts a comment. Numeric values accept arithmetic with `pi` and `sqrt`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::dvhc::DvhcConfig;
use crate::dynamics::{StickParams, StickState};
use crate::enforcement::GainConfig;

use super::expr;

/// A problem found in a scenario file. `line` is 1-based; 0 means the problem
/// is not tied to a line (typically a missing key).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    UnknownKey {
        line: usize,
        key: String,
        reason: String,
    },
    OutOfRange {
        line: usize,
        key: String,
        reason: String,
    },
    MissingRequired {
        line: usize,
        key: String,
        reason: String,
    },
}

impl ConfigError {
    pub fn key(&self) -> &str {
        match self {
            Self::UnknownKey { key, .. }
            | Self::OutOfRange { key, .. }
            | Self::MissingRequired { key, .. } => key,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, line, key, reason) = match self {
            Self::UnknownKey { line, key, reason } => ("unknown key", line, key, reason),
            Self::OutOfRange { line, key, reason } => ("out of range", line, key, reason),
            Self::MissingRequired { line, key, reason } => ("missing required", line, key, reason),
        };
        if *line > 0 {
            write!(f, "line {line}: {kind} `{key}`: {reason}")
        } else {
            write!(f, "{kind} `{key}`: {reason}")
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Enforce,
    Stabilize,
    Dzd,
    FixedPoint,
    Linearize,
    Sweep,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "enforce" => Self::Enforce,
            "stabilize" => Self::Stabilize,
            "dzd" => Self::Dzd,
            "fixed_point" => Self::FixedPoint,
            "linearize" => Self::Linearize,
            "sweep" => Self::Sweep,
            _ => {
                return Err(format!(
                    "`{s}` is not one of enforce, stabilize, dzd, fixed_point, linearize, sweep"
                ))
            }
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Enforce => "enforce",
            Self::Stabilize => "stabilize",
            Self::Dzd => "dzd",
            Self::FixedPoint => "fixed_point",
            Self::Linearize => "linearize",
            Self::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDynSetup {
    pub theta: f64,
    pub omega: f64,
    pub steps: usize,
    /// Phase at which drift is measured; defaults to `theta`.
    pub theta_ref: f64,
    pub period_tol: f64,
    pub fd_eps: f64,
    /// Extra initial conditions for sweeps.
    pub sweep_thetas: Vec<f64>,
    pub sweep_omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSetup {
    pub theta_star: f64,
    pub omega_star: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub deadband: f64,
    /// `Q = q_weight · I₅`.
    pub q_weight: f64,
    /// `R_u = r_weight · I₂`.
    pub r_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub mode: Mode,
    pub stick: StickParams<f64>,
    pub dvhc: DvhcConfig<f64>,
    pub gains: GainConfig<f64>,
    pub initial: Option<StickState<f64>>,
    pub zerodyn: Option<ZeroDynSetup>,
    pub orbit: Option<OrbitSetup>,
    pub impulses: usize,
    pub output: Option<String>,
}

const KEYS: &[(&str, &[&str])] = &[
    ("", &["mode", "name"]),
    ("stick", &["mass", "length", "gravity", "inertia"]),
    ("constraint", &["radius", "phase", "n_per_rev", "dtheta"]),
    ("gains", &["lambda_x", "lambda_y", "lambda"]),
    (
        "initial",
        &["hx", "hy", "theta", "vx", "vy", "omega", "on_constraint"],
    ),
    ("run", &["impulses", "out"]),
    (
        "zerodyn",
        &[
            "theta",
            "omega",
            "steps",
            "theta_ref",
            "period_tol",
            "fd_eps",
            "thetas",
            "omegas",
        ],
    ),
    (
        "orbit",
        &[
            "theta_star",
            "omega_star",
            "eps1",
            "eps2",
            "deadband",
            "q_weight",
            "r_weight",
        ],
    ),
];

struct Raw {
    entries: BTreeMap<(String, String), (usize, String)>,
    errors: Vec<ConfigError>,
}

impl Raw {
    fn get(&self, sec: &str, key: &str) -> Option<&(usize, String)> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn has_section(&self, sec: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == sec)
    }

    fn qualified(sec: &str, key: &str) -> String {
        if sec.is_empty() {
            key.to_string()
        } else {
            format!("{sec}.{key}")
        }
    }

    fn missing(&mut self, sec: &str, key: &str, reason: &str) {
        self.errors.push(ConfigError::MissingRequired {
            line: 0,
            key: Self::qualified(sec, key),
            reason: reason.to_string(),
        });
    }

    fn range(&mut self, line: usize, sec: &str, key: &str, reason: String) {
        self.errors.push(ConfigError::OutOfRange {
            line,
            key: Self::qualified(sec, key),
            reason,
        });
    }

    /// Optional number, checked by `check` (which returns a reason on failure).
    fn num(&mut self, sec: &str, key: &str, check: impl Fn(f64) -> Option<String>) -> Option<f64> {
        let (line, raw) = self.get(sec, key)?.clone();
        match expr::eval(&raw) {
            Ok(v) => match check(v) {
                None => Some(v),
                Some(reason) => {
                    self.range(line, sec, key, reason);
                    None
                }
            },
            Err(e) => {
                self.range(line, sec, key, format!("cannot evaluate `{raw}`: {e}"));
                None
            }
        }
    }

    fn req(&mut self, sec: &str, key: &str, check: impl Fn(f64) -> Option<String>) -> Option<f64> {
        if self.get(sec, key).is_none() {
            self.missing(sec, key, "required");
            return None;
        }
        self.num(sec, key, check)
    }

    fn count(&mut self, sec: &str, key: &str, min: usize) -> Option<usize> {
        let (line, raw) = self.get(sec, key)?.clone();
        match raw.parse::<usize>() {
            Ok(v) if v >= min => Some(v),
            Ok(v) => {
                self.range(line, sec, key, format!("must be at least {min}, got {v}"));
                None
            }
            Err(_) => {
                self.range(
                    line,
                    sec,
                    key,
                    format!("`{raw}` is not a non-negative integer"),
                );
                None
            }
        }
    }

    fn list(&mut self, sec: &str, key: &str, check: impl Fn(f64) -> Option<String>) -> Vec<f64> {
        let Some((line, raw)) = self.get(sec, key).cloned() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for part in raw.split(',') {
            match expr::eval(part.trim()).and_then(|v| check(v).map_or(Ok(v), Err)) {
                Ok(v) => out.push(v),
                Err(reason) => self.range(line, sec, key, reason),
            }
        }
        out
    }

    fn flag(&mut self, sec: &str, key: &str) -> bool {
        match self.get(sec, key).cloned() {
            None => false,
            Some((_, v)) if v == "true" => true,
            Some((_, v)) if v == "false" => false,
            Some((line, v)) => {
                self.range(line, sec, key, format!("expected true or false, got `{v}`"));
                false
            }
        }
    }
}

fn positive(v: f64) -> Option<String> {
    (v <= 0.0).then(|| format!("must be positive, got {v}"))
}

fn any(_: f64) -> Option<String> {
    None
}

fn unit_interval(v: f64) -> Option<String> {
    (!(0.0..1.0).contains(&v)).then(|| format!("must lie in [0, 1), got {v}"))
}

fn split_lines(text: &str) -> Raw {
    let mut raw = Raw {
        entries: BTreeMap::new(),
        errors: Vec::new(),
    };
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                raw.errors.push(ConfigError::UnknownKey {
                    line: n,
                    key: line.to_string(),
                    reason: "malformed section header".into(),
                });
                continue;
            };
            let name = name.trim().to_string();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                raw.errors.push(ConfigError::UnknownKey {
                    line: n,
                    key: format!("[{name}]"),
                    reason: "unknown section".into(),
                });
            }
            section = name;
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            raw.errors.push(ConfigError::UnknownKey {
                line: n,
                key: line.to_string(),
                reason: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .is_some_and(|(_, keys)| keys.contains(&key.as_str()));
        if !known {
            if KEYS.iter().any(|(s, _)| *s == section) {
                raw.errors.push(ConfigError::UnknownKey {
                    line: n,
                    key: Raw::qualified(&section, &key),
                    reason: if section.is_empty() {
                        "not a top-level key".into()
                    } else {
                        format!("not a key of [{section}]")
                    },
                });
            }
            continue;
        }
        if let Some((first, _)) = raw.entries.get(&(section.clone(), key.clone())) {
            raw.errors.push(ConfigError::UnknownKey {
                line: n,
                key: Raw::qualified(&section, &key),
                reason: format!("duplicate of line {first}"),
            });
            continue;
        }
        raw.entries.insert((section.clone(), key), (n, value));
    }
    raw
}

/// Parses and validates a scenario file, collecting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let mut raw = split_lines(text);

    let mode = match raw.get("", "mode").cloned() {
        None => {
            raw.missing("", "mode", "every scenario needs a mode");
            None
        }
        Some((line, v)) => match v.parse::<Mode>() {
            Ok(m) => Some(m),
            Err(reason) => {
                raw.range(line, "", "mode", reason);
                None
            }
        },
    };
    let name = raw.get("", "name").map(|(_, v)| v.clone());

    // stick
    let mass = raw.num("stick", "mass", positive).unwrap_or(0.1);
    let length = raw.num("stick", "length", positive).unwrap_or(0.5);
    let gravity = raw.num("stick", "gravity", positive).unwrap_or(9.81);
    let inertia = raw.num("stick", "inertia", positive);
    let stick = match inertia {
        Some(j) => StickParams::with_inertia(mass, length, j, gravity),
        None => StickParams::new(mass, length, gravity),
    }
    .expect("validated above");

    // constraint
    let radius = raw.num("constraint", "radius", positive).unwrap_or(1.0);
    let phase = raw
        .num("constraint", "phase", |v| {
            (!(v > -std::f64::consts::PI && v <= std::f64::consts::PI))
                .then(|| format!("must lie in (-pi, pi], got {v}"))
        })
        .unwrap_or(std::f64::consts::FRAC_PI_2);
    let n_per_rev = raw.count("constraint", "n_per_rev", 3);
    let dtheta = raw.num("constraint", "dtheta", |v| {
        (!(v > 0.0 && v < std::f64::consts::PI)).then(|| format!("must lie in (0, pi), got {v}"))
    });
    let dvhc = match (
        n_per_rev,
        dtheta,
        raw.get("constraint", "n_per_rev"),
        raw.get("constraint", "dtheta"),
    ) {
        (Some(n), None, _, None) => DvhcConfig::per_revolution(radius, phase, n as u32).ok(),
        (None, Some(d), None, _) => DvhcConfig::new(radius, phase, d).ok(),
        (_, _, Some(_), Some(&(line, _))) => {
            raw.range(
                line,
                "constraint",
                "dtheta",
                "give either n_per_rev or dtheta, not both".into(),
            );
            None
        }
        (_, _, None, None) => {
            raw.missing(
                "constraint",
                "n_per_rev",
                "either n_per_rev or dtheta is required",
            );
            None
        }
        _ => None,
    };

    // gains
    let both = raw.num("gains", "lambda", unit_interval);
    let lx = raw
        .num("gains", "lambda_x", unit_interval)
        .or(both)
        .unwrap_or(0.5);
    let ly = raw
        .num("gains", "lambda_y", unit_interval)
        .or(both)
        .unwrap_or(0.5);
    let gains = GainConfig::new(lx, ly).unwrap_or(GainConfig {
        lambda_x: 0.5,
        lambda_y: 0.5,
    });

    let impulses = raw.count("run", "impulses", 1).unwrap_or(25);
    let output = raw.get("run", "out").map(|(_, v)| v.clone());

    let needs_initial = matches!(mode, Some(Mode::Enforce) | Some(Mode::Stabilize));
    let initial = if needs_initial || raw.has_section("initial") {
        if raw.flag("initial", "on_constraint") {
            let th = raw.req("initial", "theta", any);
            let w = raw.req("initial", "omega", positive);
            match (th, w, dvhc) {
                (Some(th), Some(w), Some(c)) => {
                    crate::dvhc::on_constraint_state(th, w, &c, gravity).ok()
                }
                _ => None,
            }
        } else {
            let mut vals: Vec<Option<f64>> = ["hx", "hy", "theta", "vx", "vy"]
                .iter()
                .map(|k| raw.req("initial", k, any))
                .collect();
            vals.push(raw.req("initial", "omega", positive));
            if vals.iter().all(Option::is_some) {
                let v: Vec<f64> = vals.into_iter().flatten().collect();
                Some(StickState::from_q_qdot([
                    v[0], v[1], v[2], v[3], v[4], v[5],
                ]))
            } else {
                None
            }
        }
    } else {
        None
    };

    let needs_zd = matches!(mode, Some(Mode::Dzd) | Some(Mode::Sweep));
    let zerodyn = if needs_zd || raw.has_section("zerodyn") {
        let sweep = mode == Some(Mode::Sweep);
        let theta = if sweep {
            raw.num("zerodyn", "theta", any)
        } else {
            raw.req("zerodyn", "theta", any)
        };
        let omega = if sweep {
            raw.num("zerodyn", "omega", positive)
        } else {
            raw.req("zerodyn", "omega", positive)
        };
        let steps = raw.count("zerodyn", "steps", 1).unwrap_or(1200);
        let theta_ref = raw.num("zerodyn", "theta_ref", any);
        let period_tol = raw.num("zerodyn", "period_tol", positive).unwrap_or(1e-9);
        let fd_eps = raw.num("zerodyn", "fd_eps", positive).unwrap_or(1e-7);
        let sweep_thetas = raw.list("zerodyn", "thetas", any);
        let sweep_omegas = raw.list("zerodyn", "omegas", positive);
        if sweep && (sweep_thetas.is_empty() || sweep_omegas.is_empty()) {
            raw.missing(
                "zerodyn",
                "thetas",
                "sweep needs non-empty thetas and omegas lists",
            );
        }
        Some(ZeroDynSetup {
            theta: theta.unwrap_or(0.0),
            omega: omega.unwrap_or(1.0),
            steps,
            theta_ref: theta_ref.or(theta).unwrap_or(0.0),
            period_tol,
            fd_eps,
            sweep_thetas,
            sweep_omegas,
        })
    } else {
        None
    };

    let needs_orbit = matches!(
        mode,
        Some(Mode::Stabilize) | Some(Mode::FixedPoint) | Some(Mode::Linearize)
    );
    let orbit = if needs_orbit || raw.has_section("orbit") {
        let theta_star = raw.req("orbit", "theta_star", any);
        let omega_star = raw.req("orbit", "omega_star", positive);
        if needs_orbit && dvhc.is_some_and(|c| c.n_per_rev.is_none()) {
            if let Some(&(line, _)) = raw.get("constraint", "dtheta") {
                raw.range(
                    line,
                    "constraint",
                    "dtheta",
                    "the section map needs n_per_rev".into(),
                );
            }
        }
        let setup = OrbitSetup {
            theta_star: theta_star.unwrap_or(0.0),
            omega_star: omega_star.unwrap_or(1.0),
            eps1: raw.num("orbit", "eps1", positive).unwrap_or(1e-3),
            eps2: raw.num("orbit", "eps2", positive).unwrap_or(2e-3),
            deadband: raw
                .num("orbit", "deadband", |v| {
                    (v < 0.0).then(|| format!("must be non-negative, got {v}"))
                })
                .unwrap_or(1e-3),
            q_weight: raw.num("orbit", "q_weight", positive).unwrap_or(1.0),
            r_weight: raw.num("orbit", "r_weight", positive).unwrap_or(2.0),
        };
        Some(setup)
    } else {
        None
    };

    if !raw.errors.is_empty() {
        raw.errors.sort_by_key(|e| match e {
            ConfigError::UnknownKey { line, .. }
            | ConfigError::OutOfRange { line, .. }
            | ConfigError::MissingRequired { line, .. } => {
                if *line == 0 {
                    usize::MAX
                } else {
                    *line
                }
            }
        });
        return Err(raw.errors);
    }
    Ok(ScenarioConfig {
        name,
        mode: mode.expect("no errors"),
        stick,
        dvhc: dvhc.expect("no errors"),
        gains,
        initial,
        zerodyn,
        orbit,
        impulses,
        output,
    })
}
