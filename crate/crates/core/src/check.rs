//! Finite-difference gradient verification.
//!
//! Rebuilds the forward pass twice per parameter component with a
//! central perturbation and compares against the reverse-mode gradient.
//! Intended for tiny configurations in tests; cost is two forwards per
//! scalar parameter.

use crate::error::{Error, Result};
use crate::graph::{Graph, VarId};
use crate::tensor::Tensor;

/// Relative-error denominator floor. Keeps the ratio meaningful when a
/// gradient component is legitimately near zero, where the absolute
/// finite-difference noise (~1e-11) would otherwise dominate.
const REL_FLOOR: f64 = 1e-6;

/// Worst relative error between reverse-mode and central finite
/// differences over every component of every parameter.
///
/// `f` must rebuild the loss from scratch given leaves bound in the
/// order of `params`. The step for component x is `h * max(1, |x|)`.
pub fn finite_diff_check<F>(params: &[Tensor], f: F, h: f64) -> Result<f64>
where
    F: Fn(&mut Graph, &[VarId]) -> Result<VarId>,
{
    if h <= 0.0 {
        return Err(Error::InvalidArg("finite difference step must be positive".into()));
    }
    let eval = |vals: &[Tensor], grad: bool| -> Result<(f64, Option<Vec<Vec<f64>>>)> {
        let mut g = Graph::new();
        let ids: Vec<VarId> = vals
            .iter()
            .map(|t| {
                let mut leaf = t.clone();
                leaf.requires_grad = grad;
                g.leaf(leaf)
            })
            .collect::<Result<_>>()?;
        let loss = f(&mut g, &ids)?;
        if g.value(loss).len() != 1 {
            return Err(Error::NonScalarLoss {
                len: g.value(loss).len(),
            });
        }
        let value = g.value(loss).data()[0];
        if !grad {
            return Ok((value, None));
        }
        g.backward(loss)?;
        let grads = ids
            .iter()
            .map(|&id| g.grad(id).expect("leaf requires grad").to_vec())
            .collect();
        Ok((value, Some(grads)))
    };

    let (_, grads) = eval(params, true)?;
    let grads = grads.unwrap();

    let mut worst: f64 = 0.0;
    let mut work: Vec<Tensor> = params.to_vec();
    for (pi, p) in params.iter().enumerate() {
        for ci in 0..p.len() {
            let x = p.data()[ci];
            let step = h * x.abs().max(1.0);
            work[pi].data_mut()[ci] = x + step;
            let (up, _) = eval(&work, false)?;
            work[pi].data_mut()[ci] = x - step;
            let (down, _) = eval(&work, false)?;
            work[pi].data_mut()[ci] = x;

            let fd = (up - down) / (2.0 * step);
            let ad = grads[pi][ci];
            let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(REL_FLOOR);
            if rel > worst {
                worst = rel;
            }
        }
    }
    Ok(worst)
}
