//! Operator-learning laboratory for resolution-invariant deep operators.
//!
//! The crate builds up in layers:
//!
//! - [`tensor`], [`graph`], [`adam`], [`check`]: dense f64 tensors, a
//!   define-by-run reverse-mode graph, the optimizer, and gradient
//!   verification against finite differences.
//! - [`spectral`], [`attention`]: the two integral-operator layer types
//!   (truncated Fourier modes; softmax kernel attention).
//! - [`models`]: grid/function/query types, the quadrature reduction,
//!   and the three operator models (RDO, DeepONet, FNO).
//! - [`pdegen`]: Gaussian-process input samplers and the three in-repo
//!   PDE solvers feeding multi-resolution datasets.
//! - [`harness`]: config, training loop, cross-resolution evaluation,
//!   and CSV/SVG reporting.
//! - [`formats`]: binary checkpoint/dataset layouts and CSV mirrors.

pub mod adam;
pub mod attention;
pub mod check;
pub mod error;
pub mod formats;
pub mod graph;
pub mod harness;
pub mod models;
pub mod params;
pub mod pdegen;
pub mod rng;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
