//! Relative L2 error and the evaluation record it is reported in.

use crate::error::{Error, Result};

/// Relative L2 error between a prediction and a reference on one fixed
/// discretization: ||pred - truth||_2 / ||truth||_2.
///
/// Scale-aware by construction: rl2e(alpha * u, u) = |alpha - 1| for
/// any nonzero u. A zero-norm reference is an error because the ratio
/// is undefined there.
pub fn rl2e(prediction: &[f64], truth: &[f64]) -> Result<f64> {
    if prediction.len() != truth.len() {
        return Err(Error::shape(
            "rl2e",
            format!("{} predictions vs {} references", prediction.len(), truth.len()),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, t) in prediction.iter().zip(truth) {
        num += (p - t) * (p - t);
        den += t * t;
    }
    if den == 0.0 {
        return Err(Error::numerical("rl2e", "reference norm is zero".to_string()));
    }
    Ok((num / den).sqrt())
}

/// One table cell of a cross-resolution error study: mean test-set
/// RL2E of one model at one (train, test) resolution pair. `rl2e` is
/// None when the model cannot consume that test resolution at all (a
/// fixed-width branch, a grid-locked output); such cells render as
/// empty fields, never as zeros. `seconds` is populated only when
/// timing was requested, so untimed pipelines stay byte-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub experiment: String,
    pub model: String,
    pub train_res: usize,
    pub test_res: usize,
    pub rl2e: Option<f64>,
    /// Test samples that contributed to the mean.
    pub n: usize,
    pub seconds: Option<f64>,
}
