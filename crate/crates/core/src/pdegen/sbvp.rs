//! 1-D steady diffusion-reaction solver: -(a u')' + c u = f on [0, 1]
//! with Dirichlet ends, conservative second-order finite differences.

use crate::error::{Error, Result};
use crate::models::FunctionSample;
use crate::pdegen::linalg::thomas;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbvpSpec {
    pub c: f64,
    pub f: f64,
    pub u_lo: f64,
    pub u_hi: f64,
}

impl Default for SbvpSpec {
    fn default() -> Self {
        SbvpSpec {
            c: 15.0,
            f: 10.0,
            u_lo: 1.0,
            u_hi: 0.0,
        }
    }
}

/// Solve on the grid of `a`. The flux coefficient is averaged at cell
/// midpoints, so the interior stencil is
///   -[a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})]/h^2 + c u_i = f,
/// and the Dirichlet rows are pinned, never touched by the stencil.
pub fn solve_sbvp(a: &FunctionSample, spec: &SbvpSpec) -> Result<FunctionSample> {
    if a.channels() != 1 {
        return Err(Error::shape("solve_sbvp", "coefficient must be single-channel"));
    }
    let m = a.grid.m;
    if m < 3 {
        return Err(Error::InvalidArg("sbvp needs at least 3 grid nodes".into()));
    }
    let av = a.values.data();
    if let Some(&bad) = av.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidArg(format!(
            "sbvp needs strictly positive a, found {bad}"
        )));
    }
    let h = a.grid.h();
    let h2 = h * h;
    let mid = |i: usize| 0.5 * (av[i] + av[i + 1]);

    let n = m - 2;
    let mut sub = vec![0.0; n - 1];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n - 1];
    let mut rhs = vec![spec.f; n];
    for row in 0..n {
        let i = row + 1;
        let (alo, ahi) = (mid(i - 1), mid(i));
        diag[row] = (alo + ahi) / h2 + spec.c;
        if row > 0 {
            sub[row - 1] = -alo / h2;
        } else {
            rhs[row] += alo / h2 * spec.u_lo;
        }
        if row < n - 1 {
            sup[row] = -ahi / h2;
        } else {
            rhs[row] += ahi / h2 * spec.u_hi;
        }
    }
    let interior = thomas(&sub, &diag, &sup, &rhs)?;

    let mut u = Vec::with_capacity(m);
    u.push(spec.u_lo);
    u.extend(interior);
    u.push(spec.u_hi);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("solve_sbvp", "non-finite solution values"));
    }
    FunctionSample::new(a.grid, Tensor::column(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_function, GridSpec};

    fn grid(m: usize) -> GridSpec {
        GridSpec::new(0.0, 1.0, m).unwrap()
    }

    fn ones(m: usize) -> FunctionSample {
        sample_function(|_| 1.0, grid(m))
    }

    #[test]
    fn pure_diffusion_reproduces_the_linear_solution() {
        let spec = SbvpSpec {
            c: 0.0,
            f: 0.0,
            u_lo: 1.0,
            u_hi: 0.0,
        };
        let u = solve_sbvp(&ones(33), &spec).unwrap();
        for (i, &v) in u.values.data().iter().enumerate() {
            let x = grid(33).node(i);
            assert!((v - (1.0 - x)).abs() < 1e-12);
        }
    }

    // Closed form for a = 1: u = f/c + A e^{sqrt(c) x} + B e^{-sqrt(c) x},
    // with A, B from the two boundary equations.
    fn analytic(c: f64, f: f64, u_lo: f64, u_hi: f64, x: f64) -> f64 {
        let s = c.sqrt();
        let part = f / c;
        // A + B = u_lo - part; A e^s + B e^{-s} = u_hi - part.
        let (r1, r2) = (u_lo - part, u_hi - part);
        let det = (-s).exp() - s.exp();
        let a = (r1 * (-s).exp() - r2) / det;
        let b = (r2 - r1 * s.exp()) / det;
        part + a * (s * x).exp() + b * (-s * x).exp()
    }

    #[test]
    fn constant_coefficients_match_the_closed_form() {
        let spec = SbvpSpec::default();
        let u = solve_sbvp(&ones(129), &spec).unwrap();
        let mut worst = 0.0f64;
        for (i, &v) in u.values.data().iter().enumerate() {
            let x = grid(129).node(i);
            worst = worst.max((v - analytic(15.0, 10.0, 1.0, 0.0, x)).abs());
        }
        assert!(worst < 1e-3, "max error {worst}");
    }

    #[test]
    fn refinement_shows_second_order_convergence() {
        // Variable a; reference by Richardson extrapolation of the two
        // finest nested solves.
        let a_fn = |x: f64| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).sin();
        let spec = SbvpSpec::default();
        let solve = |m: usize| solve_sbvp(&sample_function(a_fn, grid(m)), &spec).unwrap();
        let fine = solve(513);
        let finer = solve(1025);
        let reference: Vec<f64> = (0..513)
            .map(|i| {
                let uf = finer.values.data()[2 * i];
                (4.0 * uf - fine.values.data()[i]) / 3.0
            })
            .collect();
        let err = |m: usize| {
            let u = solve(m);
            let stride = 512 / (m - 1);
            let mut worst = 0.0f64;
            for i in 0..m {
                worst = worst.max((u.values.data()[i] - reference[i * stride]).abs());
            }
            worst
        };
        let (e33, e65, e129) = (err(33), err(65), err(129));
        let o1 = (e33 / e65).log2();
        let o2 = (e65 / e129).log2();
        for o in [o1, o2] {
            assert!((1.8..=2.2).contains(&o), "observed order {o}");
        }
    }

    #[test]
    fn maximum_principle_without_source() {
        let spec = SbvpSpec {
            c: 15.0,
            f: 0.0,
            u_lo: 1.0,
            u_hi: 0.0,
        };
        let a = sample_function(|x| (0.8 * (3.0 * x).cos()).exp(), grid(65));
        let u = solve_sbvp(&a, &spec).unwrap();
        for &v in u.values.data() {
            assert!((0.0..=1.0).contains(&v), "value {v} escapes [0, 1]");
        }
    }

    #[test]
    fn nonpositive_coefficient_is_rejected() {
        let a = sample_function(|x| x - 0.5, grid(17));
        assert!(solve_sbvp(&a, &SbvpSpec::default()).is_err());
    }
}
