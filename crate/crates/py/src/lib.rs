//! Python extension module over the operator-learning core: dataset
//! generation, the GP sampler and PDE solvers, the spectral transform
//! pair, the relative L2 metric, and a trainable model handle that can
//! predict at any input resolution.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rdo_core::error::Error;
use rdo_core::formats;
use rdo_core::harness::{self, ConfigFile};
use rdo_core::models::{AnyModel, FunctionSample, GridSpec, OperatorModel, QuerySet};
use rdo_core::pdegen::burgers::{solve_burgers, BurgersSpec};
use rdo_core::pdegen::gp::{GpKernelSpec, GpSampler, KernelKind};
use rdo_core::pdegen::sbvp::{solve_sbvp, SbvpSpec};
use rdo_core::pdegen::{make_dataset, ExperimentSpec};
use rdo_core::tensor::Tensor;
use rdo_core::{rng, spectral};
use std::path::Path;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        3 => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Generate a multi-resolution dataset file; returns the sample count.
#[pyfunction]
fn gen_dataset(experiment: &str, n: usize, resolutions: Vec<usize>, seed: u64, out: &str) -> PyResult<usize> {
    let spec = ExperimentSpec::default_for(experiment).map_err(to_py)?;
    let ds = make_dataset(&spec, n, &resolutions, seed).map_err(to_py)?;
    formats::save_dataset(&ds, Path::new(out)).map_err(to_py)?;
    Ok(ds.n_samples())
}

/// One GP draw at the given points. `kind` is "exponential" or
/// "squared_exponential".
#[pyfunction]
fn gp_sample(kind: &str, variance: f64, length_scale: f64, mean: f64, points: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
    let k = match kind {
        "exponential" => KernelKind::Exponential,
        "squared_exponential" => KernelKind::SquaredExponential,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown kernel '{other}' (expected exponential or squared_exponential)"
            )))
        }
    };
    let spec = GpKernelSpec::new(k, variance, length_scale, mean).map_err(to_py)?;
    let sampler = GpSampler::new(&spec, &points).map_err(to_py)?;
    let mut r = rng::rng_for(seed, rng::stream::DATA);
    Ok(sampler.sample(&mut r))
}

/// Solve -(a u')' + c u = f on [0, 1] with u(0)=u_lo, u(1)=u_hi; `a`
/// holds the diffusion values on the uniform grid.
#[pyfunction]
#[pyo3(signature = (a, c = 15.0, f = 10.0, u_lo = 1.0, u_hi = 0.0))]
fn sbvp_solution(a: Vec<f64>, c: f64, f: f64, u_lo: f64, u_hi: f64) -> PyResult<Vec<f64>> {
    let grid = GridSpec::new(0.0, 1.0, a.len()).map_err(to_py)?;
    let sample = FunctionSample::new(grid, Tensor::column(&a)).map_err(to_py)?;
    let spec = SbvpSpec { c, f, u_lo, u_hi };
    Ok(solve_sbvp(&sample, &spec).map_err(to_py)?.values.data().to_vec())
}

/// Integrate viscous Burgers on [-1, 1] from the initial state `u0`;
/// row k of the result is the solution at t = k*dt.
#[pyfunction]
#[pyo3(signature = (u0, nu = 0.1, dt = 0.01, steps = 100))]
fn burgers_solution(u0: Vec<f64>, nu: f64, dt: f64, steps: usize) -> PyResult<Vec<Vec<f64>>> {
    let grid = GridSpec::new(-1.0, 1.0, u0.len()).map_err(to_py)?;
    let sample = FunctionSample::new(grid, Tensor::column(&u0)).map_err(to_py)?;
    let spec = BurgersSpec { nu, dt, steps, ..BurgersSpec::default() };
    solve_burgers(&sample, &spec).map_err(to_py)
}

/// Real FFT with forward 1/m normalization: m values to floor(m/2)+1
/// (re, im) pairs.
#[pyfunction]
fn rfft(values: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(PyValueError::new_err("rfft needs at least one value"));
    }
    let m = values.len();
    let flat = spectral::rfft_forward(&values, m, 1);
    Ok(flat.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

/// Inverse of `rfft` back to `m` real values.
#[pyfunction]
fn irfft(coeffs: Vec<(f64, f64)>, m: usize) -> PyResult<Vec<f64>> {
    let bins = spectral::rfft_len(m);
    if coeffs.len() != bins {
        return Err(PyValueError::new_err(format!(
            "need {bins} coefficient pairs for m = {m}, got {}",
            coeffs.len()
        )));
    }
    let flat: Vec<f64> = coeffs.iter().flat_map(|&(re, im)| [re, im]).collect();
    Ok(spectral::irfft_forward(&flat, bins, 1, m))
}

/// Relative L2 error of a prediction against a reference.
#[pyfunction]
fn rl2e(prediction: Vec<f64>, truth: Vec<f64>) -> PyResult<f64> {
    harness::rl2e(&prediction, &truth).map_err(to_py)
}

/// A trained operator model. Build one with `Model.train` or
/// `Model.load`; its predictions accept inputs at any resolution the
/// architecture supports.
#[pyclass]
struct Model {
    inner: AnyModel,
    arch: formats::ArchFile,
}

#[pymethods]
impl Model {
    /// Train from config text (same sectioned format the CLI reads) on
    /// a dataset file.
    #[staticmethod]
    #[pyo3(signature = (config_text, data_path, epochs = None, seed = None))]
    fn train(config_text: &str, data_path: &str, epochs: Option<usize>, seed: Option<u64>) -> PyResult<Model> {
        let mut resolved = ConfigFile::parse(config_text).map_err(to_py)?.resolve().map_err(to_py)?;
        if let Some(e) = epochs {
            resolved.train.epochs = e;
        }
        if let Some(s) = seed {
            resolved.train.seed = s;
        }
        resolved.train.validate().map_err(to_py)?;
        let ds = formats::load_dataset(Path::new(data_path)).map_err(to_py)?;
        if ds.experiment != resolved.experiment_id {
            return Err(PyValueError::new_err(format!(
                "config is for '{}' but the dataset holds '{}'",
                resolved.experiment_id, ds.experiment
            )));
        }
        let mut model = resolved.build_model().map_err(to_py)?;
        harness::train(&mut model, &ds, &resolved.train).map_err(to_py)?;
        Ok(Model { inner: model, arch: resolved.arch })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Model> {
        let (inner, arch) = formats::load_model(Path::new(path)).map_err(to_py)?;
        Ok(Model { inner, arch })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        formats::save_model(
            &self.inner,
            &self.arch.experiment,
            self.arch.train_resolution,
            &self.arch.ratios,
            Path::new(path),
        )
        .map_err(to_py)
    }

    #[getter]
    fn kind(&self) -> String {
        self.arch.kind.clone()
    }

    #[getter]
    fn experiment(&self) -> String {
        self.arch.experiment.clone()
    }

    #[getter]
    fn train_resolution(&self) -> usize {
        self.arch.train_resolution
    }

    /// Predict at `queries` (flat row-major, `query_dim` columns) from
    /// input values sampled on the experiment's uniform grid.
    fn predict(&self, values: Vec<f64>, queries: Vec<f64>, query_dim: usize) -> PyResult<Vec<f64>> {
        let spec = ExperimentSpec::default_for(&self.arch.experiment).map_err(to_py)?;
        let (lo, hi) = spec.domain();
        let grid = GridSpec::new(lo, hi, values.len()).map_err(to_py)?;
        let sample = FunctionSample::new(grid, Tensor::column(&values)).map_err(to_py)?;
        if query_dim == 0 || queries.len() % query_dim != 0 {
            return Err(PyValueError::new_err("queries length must be a positive multiple of query_dim"));
        }
        let n = queries.len() / query_dim;
        let q = QuerySet::new(Tensor::new(vec![n, query_dim], queries).map_err(to_py)?).map_err(to_py)?;
        self.inner.predict(&sample, &q).map_err(to_py)
    }

    /// Held-out test RL2E per resolution as (resolution, rl2e, n)
    /// tuples; rl2e is None where the architecture cannot answer.
    fn evaluate(&self, data_path: &str, resolutions: Vec<usize>) -> PyResult<Vec<(usize, Option<f64>, usize)>> {
        let ds = formats::load_dataset(Path::new(data_path)).map_err(to_py)?;
        let records = harness::evaluate_multi_resolution(
            &self.inner,
            &self.arch.kind,
            &ds,
            &resolutions,
            self.arch.train_resolution,
            &self.arch.ratios,
            false,
        )
        .map_err(to_py)?;
        Ok(records.into_iter().map(|r| (r.test_res, r.rl2e, r.n)).collect())
    }
}

#[pymodule]
fn rdo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(gen_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(gp_sample, m)?)?;
    m.add_function(wrap_pyfunction!(sbvp_solution, m)?)?;
    m.add_function(wrap_pyfunction!(burgers_solution, m)?)?;
    m.add_function(wrap_pyfunction!(rfft, m)?)?;
    m.add_function(wrap_pyfunction!(irfft, m)?)?;
    m.add_function(wrap_pyfunction!(rl2e, m)?)?;
    m.add_class::<Model>()?;
    Ok(())
}
