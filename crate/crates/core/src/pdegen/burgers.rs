//! Viscous Burgers solver on the periodic interval [-1, 1]: backward
//! Euler in time, centered differences in space, Newton with the
//! analytic cyclic-tridiagonal Jacobian per step.

use crate::error::{Error, Result};
use crate::models::FunctionSample;
use crate::pdegen::linalg::cyclic_thomas;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersSpec {
    pub nu: f64,
    pub dt: f64,
    pub steps: usize,
    pub newton_tol: f64,
    pub newton_max: usize,
}

impl Default for BurgersSpec {
    fn default() -> Self {
        BurgersSpec {
            nu: 0.1,
            dt: 0.01,
            steps: 100,
            newton_tol: 1e-10,
            newton_max: 50,
        }
    }
}

/// Residual of the implicit step at state u (unknown nodes only):
/// F(u) = u - prev + dt (u D1 u - nu D2 u), periodic wrap.
fn residual(u: &[f64], prev: &[f64], h: f64, spec: &BurgersSpec) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
            let d1 = (u[ip] - u[im]) / (2.0 * h);
            let d2 = (u[ip] - 2.0 * u[i] + u[im]) / (h * h);
            u[i] - prev[i] + spec.dt * (u[i] * d1 - spec.nu * d2)
        })
        .collect()
}

/// One backward-Euler step by Newton iteration.
fn implicit_step(prev: &[f64], h: f64, spec: &BurgersSpec, step: usize) -> Result<Vec<f64>> {
    let n = prev.len();
    let mut u = prev.to_vec();
    for _ in 0..spec.newton_max {
        let f = residual(&u, prev, h, spec);
        let worst = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if worst <= spec.newton_tol {
            return Ok(u);
        }
        // Row i of the Jacobian: diagonal 1 + dt (D1 u)_i + 2 dt nu/h^2,
        // neighbors dt (+-u_i/(2h) - nu/h^2), wrapping at the corners.
        let visc = spec.dt * spec.nu / (h * h);
        let mut sub = vec![0.0; n - 1];
        let mut sup = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
            let d1 = (u[ip] - u[im]) / (2.0 * h);
            diag[i] = 1.0 + spec.dt * d1 + 2.0 * visc;
        }
        let off = |ui: f64, sign: f64| spec.dt * sign * ui / (2.0 * h) - visc;
        for i in 0..n - 1 {
            sup[i] = off(u[i], 1.0);
            sub[i] = off(u[i + 1], -1.0);
        }
        let corner_top = off(u[0], -1.0);
        let corner_bot = off(u[n - 1], 1.0);
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = cyclic_thomas(&sub, &diag, &sup, corner_top, corner_bot, &neg_f)?;
        for i in 0..n {
            u[i] += delta[i];
        }
    }
    let f = residual(&u, prev, h, spec);
    let worst = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Err(Error::numerical(
        "burgers_newton",
        format!("no convergence at step {step}, residual {worst:.3e}"),
    ))
}

/// Space-time field including the initial slice: steps+1 rows of m
/// values each, where node m-1 duplicates node 0 (periodic seam).
pub fn solve_burgers(u0: &FunctionSample, spec: &BurgersSpec) -> Result<Vec<Vec<f64>>> {
    if u0.channels() != 1 {
        return Err(Error::shape("solve_burgers", "initial state must be single-channel"));
    }
    if !(spec.nu > 0.0) || !(spec.dt > 0.0) {
        return Err(Error::InvalidArg("burgers needs positive viscosity and dt".into()));
    }
    let m = u0.grid.m;
    if m < 4 {
        return Err(Error::InvalidArg("burgers needs at least 4 grid nodes".into()));
    }
    let vals = u0.values.data();
    if (vals[0] - vals[m - 1]).abs() > 1e-12 {
        return Err(Error::InvalidArg(format!(
            "periodic initial state must match at the seam, gap {:.3e}",
            (vals[0] - vals[m - 1]).abs()
        )));
    }
    let n = m - 1;
    let h = u0.grid.h();
    let close = |u: &[f64]| {
        let mut row = u.to_vec();
        row.push(u[0]);
        row
    };
    let mut field = Vec::with_capacity(spec.steps + 1);
    let mut u = vals[..n].to_vec();
    field.push(close(&u));
    for step in 1..=spec.steps {
        u = implicit_step(&u, h, spec, step)?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(
                "solve_burgers",
                format!("non-finite state at step {step}"),
            ));
        }
        field.push(close(&u));
    }
    Ok(field)
}
