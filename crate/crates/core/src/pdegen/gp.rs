//! Gaussian-process input sampling.
//!
//! Draws come from a Cholesky factor of the kernel matrix computed
//! once per point set; each draw is mean + L z with z standard normal
//! from the caller's seeded generator, so samples are reproducible and
//! independent of how work is distributed across threads.

use crate::error::{Error, Result};
use crate::models::{FunctionSample, GridSpec};
use crate::pdegen::linalg::cholesky_with_jitter;
use crate::tensor::Tensor;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Base jitter added to the covariance diagonal before factoring,
/// relative to the kernel variance so a degenerate variance still
/// yields draws equal to the mean.
pub const JITTER0: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Exponential,
    SquaredExponential,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Exponential => "exponential",
            KernelKind::SquaredExponential => "squared_exponential",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(KernelKind::Exponential),
            "squared_exponential" => Ok(KernelKind::SquaredExponential),
            other => Err(Error::InvalidArg(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpKernelSpec {
    pub kind: KernelKind,
    pub variance: f64,
    pub length_scale: f64,
    pub mean: f64,
}

impl GpKernelSpec {
    pub fn new(kind: KernelKind, variance: f64, length_scale: f64, mean: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::InvalidArg(format!("kernel variance must be positive, got {variance}")));
        }
        if !(length_scale > 0.0) {
            return Err(Error::InvalidArg(format!("length scale must be positive, got {length_scale}")));
        }
        Ok(GpKernelSpec {
            kind,
            variance,
            length_scale,
            mean,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = (x - y).abs();
        match self.kind {
            KernelKind::Exponential => self.variance * (-r / self.length_scale).exp(),
            KernelKind::SquaredExponential => {
                self.variance * (-r * r / (2.0 * self.length_scale * self.length_scale)).exp()
            }
        }
    }

    fn matrix(&self, points: &[f64]) -> Vec<f64> {
        let n = points.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = self.eval(points[i], points[j]);
            }
        }
        k
    }
}

/// Factored sampler over a fixed point set.
#[derive(Debug, Clone)]
pub struct GpSampler {
    pub points: Vec<f64>,
    mean: f64,
    chol: Vec<f64>,
    n: usize,
}

impl GpSampler {
    pub fn new(spec: &GpKernelSpec, points: &[f64]) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidArg("gp sampler needs at least one point".into()));
        }
        let k = spec.matrix(points);
        let chol = cholesky_with_jitter(&k, n, JITTER0, spec.variance)?;
        Ok(GpSampler {
            points: points.to_vec(),
            mean: spec.mean,
            chol,
            n,
        })
    }

    /// Sampler for draws conditioned on equal first and last values:
    /// the covariance is updated by the Schur complement of the linear
    /// constraint c^T b = 0 with c = e_0 - e_{n-1}. Used for functions
    /// on a closed perimeter, where the seam must be continuous.
    pub fn conditioned_periodic(spec: &GpKernelSpec, points: &[f64]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::InvalidArg("periodic conditioning needs at least two points".into()));
        }
        let k = spec.matrix(points);
        // kc = K c; ctkc = c^T K c.
        let kc: Vec<f64> = (0..n).map(|i| k[i * n] - k[i * n + n - 1]).collect();
        let ctkc = kc[0] - kc[n - 1];
        if !(ctkc > 0.0) {
            return Err(Error::numerical(
                "gp_conditioning",
                format!("constraint variance {ctkc:.3e} not positive"),
            ));
        }
        let mut k2 = k;
        for i in 0..n {
            for j in 0..n {
                k2[i * n + j] -= kc[i] * kc[j] / ctkc;
            }
        }
        let chol = cholesky_with_jitter(&k2, n, JITTER0, spec.variance)?;
        Ok(GpSampler {
            points: points.to_vec(),
            mean: spec.mean,
            chol,
            n,
        })
    }

    /// One draw: mean + L z.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(rng)).collect();
        (0..self.n)
            .map(|i| {
                let mut v = self.mean;
                for j in 0..=i {
                    v += self.chol[i * self.n + j] * z[j];
                }
                v
            })
            .collect()
    }
}

/// One seeded draw on a grid.
pub fn gp_sample_1d(spec: &GpKernelSpec, grid: &GridSpec, seed: u64) -> Result<FunctionSample> {
    let sampler = GpSampler::new(spec, &grid.nodes())?;
    let mut rng = crate::rng::rng_for(seed, crate::rng::stream::DATA);
    let vals = sampler.sample(&mut rng);
    FunctionSample::new(*grid, Tensor::column(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn exp_spec(variance: f64, ell: f64) -> GpKernelSpec {
        GpKernelSpec::new(KernelKind::Exponential, variance, ell, 0.0).unwrap()
    }

    #[test]
    fn exponential_kernel_hand_value() {
        let spec = exp_spec(1.0, 1.0);
        assert!((spec.eval(0.2, 0.5) - 0.740818).abs() < 1e-6);
    }

    #[test]
    fn squared_exponential_kernel_hand_value() {
        let spec = GpKernelSpec::new(KernelKind::SquaredExponential, 1.0, 0.2, 0.0).unwrap();
        // exp(-(0.1)^2 / (2 * 0.04)) = exp(-0.125)
        assert!((spec.eval(0.3, 0.4) - (-0.125f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_variance_returns_the_mean() {
        let spec = GpKernelSpec::new(KernelKind::Exponential, 1e-16, 1.0, 2.5).unwrap();
        let grid = GridSpec::new(0.0, 1.0, 17).unwrap();
        let draw = gp_sample_1d(&spec, &grid, 99).unwrap();
        for &v in draw.values.data() {
            assert!((v - 2.5).abs() < 1e-6, "got {v}");
        }
    }

    #[test]
    fn empirical_moments_match_the_kernel() {
        // 5000 draws at 9 points: mean within 5 standard errors of mu,
        // covariance entrywise within 5 standard errors of K.
        let spec = exp_spec(1.0, 0.5);
        let points: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let sampler = GpSampler::new(&spec, &points).unwrap();
        let mut r = rng::rng_for(2024, rng::stream::DATA);
        let n_draws = 5000;
        let draws: Vec<Vec<f64>> = (0..n_draws).map(|_| sampler.sample(&mut r)).collect();

        let nf = n_draws as f64;
        let mean: Vec<f64> = (0..9)
            .map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / nf)
            .collect();
        for i in 0..9 {
            let se = (spec.eval(points[i], points[i]) / nf).sqrt();
            assert!(mean[i].abs() < 5.0 * se, "mean[{i}] = {} vs se {se}", mean[i]);
        }
        for i in 0..9 {
            for j in 0..9 {
                let kij = spec.eval(points[i], points[j]);
                let cov = draws
                    .iter()
                    .map(|d| (d[i] - mean[i]) * (d[j] - mean[j]))
                    .sum::<f64>()
                    / (nf - 1.0);
                let kii = spec.eval(points[i], points[i]);
                let kjj = spec.eval(points[j], points[j]);
                let se = ((kii * kjj + kij * kij) / nf).sqrt();
                assert!(
                    (cov - kij).abs() < 5.0 * se,
                    "cov[{i},{j}] = {cov} vs kernel {kij}, se {se}"
                );
            }
        }
    }

    #[test]
    fn conditioned_draws_tie_the_endpoints() {
        let spec = exp_spec(1.0, 0.3);
        let points: Vec<f64> = (0..21).map(|i| i as f64 / 20.0).collect();
        let sampler = GpSampler::conditioned_periodic(&spec, &points).unwrap();
        let mut r = rng::rng_for(5, rng::stream::DATA);
        for _ in 0..50 {
            let d = sampler.sample(&mut r);
            assert!((d[0] - d[20]).abs() < 1e-4, "seam gap {}", (d[0] - d[20]).abs());
        }
    }

    #[test]
    fn conditioning_reduces_endpoint_variance() {
        let spec = exp_spec(1.0, 0.3);
        let points: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let free = GpSampler::new(&spec, &points).unwrap();
        let tied = GpSampler::conditioned_periodic(&spec, &points).unwrap();
        let var = |s: &GpSampler, tag: u64| {
            let mut r = rng::rng_for(tag, rng::stream::DATA);
            let draws: Vec<f64> = (0..2000).map(|_| s.sample(&mut r)[0]).collect();
            let m: f64 = draws.iter().sum::<f64>() / 2000.0;
            draws.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / 1999.0
        };
        assert!(var(&tied, 1) < var(&free, 1));
    }
}
