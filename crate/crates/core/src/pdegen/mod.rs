//! Ground-truth data generation for the three benchmark problems.
//!
//! Samples are generated at the finest requested resolution and
//! subsampled to the coarser ones by index striding, so coarse grids
//! are exact subsets of fine grids and cross-resolution evaluation is
//! unambiguous. Sample i draws from sub-seed derive(seed, i); results
//! are collected in index order, so output is independent of how the
//! parallel iterator schedules work.

pub mod burgers;
pub mod fem;
pub mod gp;
pub mod linalg;
pub mod mesh;
pub mod sbvp;

use crate::error::{Error, Result};
use crate::models::{sample_function, FunctionSample, GridSpec, QuerySet};
use crate::rng;
use crate::tensor::Tensor;
use burgers::{solve_burgers, BurgersSpec};
use fem::solve_poisson_fem;
use gp::{GpKernelSpec, GpSampler, KernelKind};
use mesh::{build_triangle_mesh, interp_closed_curve};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use sbvp::{solve_sbvp, SbvpSpec};

/// One experiment's generation recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    /// Input: log-normal diffusion field on [0, 1]. Target: solution
    /// of -(a u')' + c u = f on the same grid.
    Sbvp { kernel: GpKernelSpec, pde: SbvpSpec },
    /// Input: Dirichlet data on the triangle perimeter, drawn as a
    /// seam-continuous GP over the normalized arc length. Target: FEM
    /// pressure field at the mesh nodes.
    DarcyTriangle {
        kernel: GpKernelSpec,
        mesh_level: usize,
        k_coef: f64,
        f: f64,
    },
    /// Input: periodic initial state on [-1, 1]. Target: space-time
    /// slices of the viscous Burgers solution.
    Burgers {
        spec: BurgersSpec,
        time_stride: usize,
        omega_mean: f64,
        omega_sd: f64,
    },
}

impl ExperimentSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentSpec::Sbvp { .. } => "sbvp",
            ExperimentSpec::DarcyTriangle { .. } => "darcy_tri",
            ExperimentSpec::Burgers { .. } => "burgers",
        }
    }

    /// Stock generation recipe for an experiment id.
    pub fn default_for(id: &str) -> Result<ExperimentSpec> {
        match id {
            "sbvp" => Ok(ExperimentSpec::Sbvp {
                kernel: GpKernelSpec::new(KernelKind::Exponential, 1.0, 1.0, 0.0)?,
                pde: SbvpSpec::default(),
            }),
            "darcy_tri" => Ok(ExperimentSpec::DarcyTriangle {
                kernel: GpKernelSpec::new(KernelKind::SquaredExponential, 1.0, 0.2, 0.0)?,
                mesh_level: 16,
                k_coef: 0.1,
                f: -1.0,
            }),
            "burgers" => Ok(ExperimentSpec::Burgers {
                spec: BurgersSpec::default(),
                time_stride: 10,
                omega_mean: 1.2,
                omega_sd: 1.0,
            }),
            other => Err(Error::InvalidArg(format!(
                "unknown experiment '{other}' (expected sbvp, darcy_tri, or burgers)"
            ))),
        }
    }

    /// Input-function domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ExperimentSpec::Sbvp { .. } | ExperimentSpec::DarcyTriangle { .. } => (0.0, 1.0),
            ExperimentSpec::Burgers { .. } => (-1.0, 1.0),
        }
    }
}

/// One resolution's view of the dataset: inputs at that sampling
/// resolution plus the query coordinates and target values.
#[derive(Debug, Clone, PartialEq)]
pub struct ResBlock {
    pub resolution: usize,
    /// Query coordinate dimension.
    pub d2: usize,
    /// N rows of `resolution` input values.
    pub inputs: Vec<Vec<f64>>,
    /// Shared query coordinates, n_queries x d2 row-major.
    pub coords: Vec<f64>,
    /// N rows of n_queries target values.
    pub targets: Vec<Vec<f64>>,
}

impl ResBlock {
    pub fn n_queries(&self) -> usize {
        self.coords.len() / self.d2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub experiment: String,
    pub seed: u64,
    pub provenance: String,
    /// Input-grid endpoints shared by every block.
    pub lo: f64,
    pub hi: f64,
    pub blocks: Vec<ResBlock>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.inputs.len())
    }

    pub fn resolutions(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.resolution).collect()
    }

    pub fn block(&self, resolution: usize) -> Result<&ResBlock> {
        self.blocks
            .iter()
            .find(|b| b.resolution == resolution)
            .ok_or_else(|| {
                Error::InvalidArg(format!(
                    "dataset has no resolution {resolution}; available: {:?}",
                    self.resolutions()
                ))
            })
    }

    pub fn input_sample(&self, block: &ResBlock, i: usize) -> Result<FunctionSample> {
        let grid = GridSpec::new(self.lo, self.hi, block.resolution)?;
        FunctionSample::new(grid, Tensor::column(&block.inputs[i]))
    }

    pub fn query_set(&self, block: &ResBlock) -> Result<QuerySet> {
        QuerySet::new(Tensor::new(
            vec![block.n_queries(), block.d2],
            block.coords.clone(),
        )?)
    }
}

/// The nesting family below `top`: repeatedly halve the interval count
/// while it stays even.
fn nesting_family(top: usize) -> Vec<usize> {
    let mut family = vec![top];
    let mut v = top;
    while v >= 3 && (v - 1) % 2 == 0 {
        v = (v - 1) / 2 + 1;
        if v < 2 {
            break;
        }
        family.push(v);
    }
    family
}

/// Resolutions sorted ascending after checking they are distinct and
/// every coarser one nests in the finest by a power-of-two stride.
fn validate_resolutions(resolutions: &[usize]) -> Result<Vec<usize>> {
    if resolutions.is_empty() {
        return Err(Error::InvalidArg("need at least one resolution".into()));
    }
    let mut sorted = resolutions.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != resolutions.len() {
        return Err(Error::InvalidArg("resolutions must be distinct".into()));
    }
    if sorted[0] < 2 {
        return Err(Error::InvalidArg("resolutions must be at least 2".into()));
    }
    let top = *sorted.last().unwrap();
    for &r in &sorted {
        let nests = (top - 1) % (r - 1) == 0 && ((top - 1) / (r - 1)).is_power_of_two();
        if !nests {
            return Err(Error::InvalidArg(format!(
                "resolution {r} does not nest in {top}; valid family: {:?}",
                nesting_family(top)
            )));
        }
    }
    Ok(sorted)
}

fn stride_values(vals: &[f64], stride: usize) -> Vec<f64> {
    vals.iter().step_by(stride).copied().collect()
}

pub fn make_dataset(
    spec: &ExperimentSpec,
    n: usize,
    resolutions: &[usize],
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArg("need at least one sample".into()));
    }
    let sorted = validate_resolutions(resolutions)?;
    let top = *sorted.last().unwrap();
    let (lo, hi) = spec.domain();
    let provenance = format!(
        "experiment={} n={} resolutions={:?} seed={} spec={:?}",
        spec.id(),
        n,
        sorted,
        seed,
        spec
    );

    let blocks = match spec {
        ExperimentSpec::Sbvp { kernel, pde } => {
            let grid = GridSpec::new(lo, hi, top)?;
            let nodes = grid.nodes();
            let sampler = GpSampler::new(kernel, &nodes)?;
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .into_par_iter()
                .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
                    let mut r = rng::rng_for(rng::derive(seed, i as u64), rng::stream::DATA);
                    let log_a = sampler.sample(&mut r);
                    let a: Vec<f64> = log_a.iter().map(|v| v.exp()).collect();
                    let a_sample = FunctionSample::new(grid, Tensor::column(&a))?;
                    let u = solve_sbvp(&a_sample, pde)?;
                    Ok((a, u.values.data().to_vec()))
                })
                .collect::<Result<_>>()?;
            sorted
                .iter()
                .map(|&r| {
                    let stride = (top - 1) / (r - 1);
                    ResBlock {
                        resolution: r,
                        d2: 1,
                        inputs: pairs.iter().map(|(a, _)| stride_values(a, stride)).collect(),
                        coords: stride_values(&nodes, stride),
                        targets: pairs.iter().map(|(_, u)| stride_values(u, stride)).collect(),
                    }
                })
                .collect()
        }

        ExperimentSpec::DarcyTriangle {
            kernel,
            mesh_level,
            k_coef,
            f,
        } => {
            let mesh = build_triangle_mesh(*mesh_level)?;
            let params: Vec<f64> = (0..top).map(|k| k as f64 / (top - 1) as f64).collect();
            let sampler = GpSampler::conditioned_periodic(kernel, &params)?;
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .into_par_iter()
                .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
                    let mut r = rng::rng_for(rng::derive(seed, i as u64), rng::stream::DATA);
                    let mut draw = sampler.sample(&mut r);
                    // The conditioning ties the seam in distribution;
                    // pin it exactly so striding stays consistent.
                    draw[top - 1] = draw[0];
                    let bc: Vec<f64> = mesh
                        .boundary_param
                        .iter()
                        .map(|&q| interp_closed_curve(&params, &draw, q))
                        .collect();
                    let u = solve_poisson_fem(&mesh, &bc, *k_coef, *f)?;
                    Ok((draw, u))
                })
                .collect::<Result<_>>()?;
            let coords: Vec<f64> = mesh.vertices.iter().flat_map(|p| [p[0], p[1]]).collect();
            sorted
                .iter()
                .map(|&r| {
                    let stride = (top - 1) / (r - 1);
                    ResBlock {
                        resolution: r,
                        d2: 2,
                        inputs: pairs.iter().map(|(b, _)| stride_values(b, stride)).collect(),
                        coords: coords.clone(),
                        targets: pairs.iter().map(|(_, u)| u.clone()).collect(),
                    }
                })
                .collect()
        }

        ExperimentSpec::Burgers {
            spec: bspec,
            time_stride,
            omega_mean,
            omega_sd,
        } => {
            if *time_stride == 0 || bspec.steps % time_stride != 0 {
                return Err(Error::InvalidArg(format!(
                    "time stride {} must divide {} steps",
                    time_stride, bspec.steps
                )));
            }
            let grid = GridSpec::new(lo, hi, top)?;
            let nodes = grid.nodes();
            let slices: Vec<usize> = (1..=bspec.steps / time_stride)
                .map(|k| k * time_stride)
                .collect();
            let omega_dist = Normal::new(*omega_mean, *omega_sd)
                .map_err(|e| Error::InvalidArg(format!("omega distribution: {e}")))?;
            let pairs: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..n)
                .into_par_iter()
                .map(|i| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
                    let mut r = rng::rng_for(rng::derive(seed, i as u64), rng::stream::DATA);
                    let omega: f64 = omega_dist.sample(&mut r);
                    let u0 = sample_function(|x| -(std::f64::consts::PI * x).sin() * omega, grid);
                    let field = solve_burgers(&u0, bspec)?;
                    let kept: Vec<Vec<f64>> = slices.iter().map(|&k| field[k].clone()).collect();
                    Ok((u0.values.data().to_vec(), kept))
                })
                .collect::<Result<_>>()?;
            sorted
                .iter()
                .map(|&r| {
                    let stride = (top - 1) / (r - 1);
                    let xs = stride_values(&nodes, stride);
                    let mut coords = Vec::with_capacity(slices.len() * xs.len() * 2);
                    for &k in &slices {
                        let t = k as f64 * bspec.dt;
                        for &x in &xs {
                            coords.push(x);
                            coords.push(t);
                        }
                    }
                    let targets = pairs
                        .iter()
                        .map(|(_, kept)| {
                            kept.iter()
                                .flat_map(|row| stride_values(row, stride))
                                .collect()
                        })
                        .collect();
                    ResBlock {
                        resolution: r,
                        d2: 2,
                        inputs: pairs.iter().map(|(u0, _)| stride_values(u0, stride)).collect(),
                        coords,
                        targets,
                    }
                })
                .collect()
        }
    };

    Ok(Dataset {
        experiment: spec.id().to_string(),
        seed,
        provenance,
        lo,
        hi,
        blocks,
    })
}
