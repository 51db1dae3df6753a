//! CSV output with a fixed column set.

use std::io::{self, Write};
use std::path::Path;

use crate::scalar::{to_f64, Real};
use crate::sim::RunRecord;
use crate::zerodyn::{approx_invariant, ZeroDynParams, ZeroDynState};

pub const HEADER: &str =
    "k,t,hx,hy,vx,vy,theta,omega,I,r,delta,rho_x,rho_y,Drho_x,Drho_y,Ebar,j,u_I,u_r";

/// One output line; `None` renders as an empty field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TableRow {
    pub k: usize,
    pub t: Option<f64>,
    pub hx: Option<f64>,
    pub hy: Option<f64>,
    pub vx: Option<f64>,
    pub vy: Option<f64>,
    pub theta: Option<f64>,
    pub omega: Option<f64>,
    pub impulse: Option<f64>,
    pub offset: Option<f64>,
    pub delta: Option<f64>,
    pub rho_x: Option<f64>,
    pub rho_y: Option<f64>,
    pub drho_x: Option<f64>,
    pub drho_y: Option<f64>,
    pub ebar: Option<f64>,
    pub j: Option<usize>,
    pub u_i: Option<f64>,
    pub u_r: Option<f64>,
}

impl TableRow {
    pub fn from_record<T: Real>(r: &RunRecord<T>) -> Self {
        let f = |x: T| Some(to_f64(x));
        Self {
            k: r.k,
            t: f(r.t),
            hx: f(r.state.h.x),
            hy: f(r.state.h.y),
            vx: f(r.state.v.x),
            vy: f(r.state.v.y),
            theta: f(r.state.theta),
            omega: f(r.state.omega),
            impulse: f(r.input.impulse),
            offset: f(r.input.offset),
            delta: f(r.delta),
            rho_x: f(r.residual.rho.x),
            rho_y: f(r.residual.rho.y),
            drho_x: f(r.residual.drho.x),
            drho_y: f(r.residual.drho.y),
            ebar: r.ebar.map(to_f64),
            j: r.section,
            u_i: r.correction.map(|u| to_f64(u.x)),
            u_r: r.correction.map(|u| to_f64(u.y)),
        }
    }

    /// Zero-dynamics point; `k` is one-based.
    pub fn from_zero_dyn<T: Real>(k: usize, s: &ZeroDynState<T>, zp: &ZeroDynParams<T>) -> Self {
        Self {
            k,
            theta: Some(to_f64(s.theta)),
            omega: Some(to_f64(s.omega)),
            ebar: Some(to_f64(approx_invariant(s, zp))),
            ..Self::default()
        }
    }
}

fn num(out: &mut String, x: Option<f64>) {
    out.push(',');
    if let Some(v) = x {
        out.push_str(&format!("{v:.16e}"));
    }
}

/// Renders the header and rows; 17 significant digits per value.
pub fn render(rows: &[TableRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.k.to_string());
        for v in [
            r.t, r.hx, r.hy, r.vx, r.vy, r.theta, r.omega, r.impulse, r.offset, r.delta, r.rho_x,
            r.rho_y, r.drho_x, r.drho_y, r.ebar,
        ] {
            num(&mut s, v);
        }
        s.push(',');
        if let Some(j) = r.j {
            s.push_str(&j.to_string());
        }
        num(&mut s, r.u_i);
        num(&mut s, r.u_r);
        s.push('\n');
    }
    s
}

pub fn write_table<W: Write>(rows: &[TableRow], mut w: W) -> io::Result<()> {
    w.write_all(render(rows).as_bytes())
}

/// Writes the table to `path`.
pub fn emit_table(rows: &[TableRow], path: &Path) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "no records to write",
        ));
    }
    std::fs::write(path, render(rows))
}
