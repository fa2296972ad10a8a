//! Named parameter storage and initialization.
//!
//! Models own a `ParamStore`; layers hold `ParamId` handles into it.
//! A forward pass binds every parameter as a graph leaf (in store
//! order), so `ParamId(i)` always maps to the i-th bound `VarId`.
//! Checkpoints, Adam state, and gradient extraction all key off the
//! same ordering, with names only used by the on-disk format.

use crate::error::{Error, Result};
use crate::graph::{Graph, VarId};
use crate::tensor::{Activation, Tensor};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<(String, Tensor)>,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn add(&mut self, name: impl Into<String>, mut t: Tensor) -> ParamId {
        t.requires_grad = true;
        t.grad = None;
        self.entries.push((name.into(), t));
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total scalar parameter count.
    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.entries[id.0].1
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.entries[id.0].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|(n, _)| n == name).map(ParamId)
    }

    /// Bind every parameter as a graph leaf, in store order.
    pub fn bind(&self, g: &mut Graph, trainable: bool) -> Result<Vec<VarId>> {
        self.entries
            .iter()
            .map(|(_, t)| {
                let mut leaf = t.clone();
                leaf.requires_grad = trainable;
                leaf.grad = None;
                g.leaf(leaf)
            })
            .collect()
    }

    /// Pull gradients for every parameter after a backward pass.
    pub fn collect_grads(&self, g: &Graph, ids: &[VarId]) -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|&id| {
                g.grad(id)
                    .map(|s| s.to_vec())
                    .ok_or_else(|| Error::InvalidArg("missing gradient; was backward run?".into()))
            })
            .collect()
    }

    pub fn snapshot(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|(_, t)| t.data().to_vec()).collect()
    }

    pub fn restore(&mut self, snap: &[Vec<f64>]) {
        assert_eq!(snap.len(), self.entries.len(), "snapshot layout mismatch");
        for ((_, t), s) in self.entries.iter_mut().zip(snap) {
            t.data_mut().copy_from_slice(s);
        }
    }
}

/// Affine weight [fan_in, fan_out], entries uniform(-s, s), s = 1/sqrt(fan_in).
pub fn init_affine(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let s = 1.0 / (fan_in as f64).sqrt();
    let data: Vec<f64> = (0..fan_in * fan_out).map(|_| rng.random_range(-s..s)).collect();
    Tensor::new(vec![fan_in, fan_out], data).expect("affine shape")
}

/// Bias [fan_out], same uniform(-s, s) scale as the matching weight.
pub fn init_bias(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let s = 1.0 / (fan_in as f64).sqrt();
    let data: Vec<f64> = (0..fan_out).map(|_| rng.random_range(-s..s)).collect();
    Tensor::new(vec![fan_out], data).expect("bias shape")
}

/// Complex spectral weights [k, d, d, 2]; re and im parts uniform(-s, s)
/// with s = 1/(d*d).
pub fn init_spectral(rng: &mut ChaCha8Rng, modes: usize, d: usize) -> Tensor {
    let s = 1.0 / ((d * d) as f64);
    let data: Vec<f64> = (0..modes * d * d * 2).map(|_| rng.random_range(-s..s)).collect();
    Tensor::new(vec![modes, d, d, 2], data).expect("spectral shape")
}

/// One affine layer inside an [`Fnn`].
#[derive(Debug, Clone)]
pub struct Affine {
    pub w: ParamId,
    pub b: ParamId,
}

/// Fully connected net applied independently to each input row.
/// `widths[0]` is the input width; every hidden layer is followed by
/// the activation, the final layer is linear unless `activate_final`.
#[derive(Debug, Clone)]
pub struct Fnn {
    pub layers: Vec<Affine>,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub activate_final: bool,
}

impl Fnn {
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        widths: &[usize],
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidArg(format!(
                "{prefix}: need at least input and output widths, got {widths:?}"
            )));
        }
        let mut layers = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let (fi, fo) = (widths[l], widths[l + 1]);
            if fi == 0 || fo == 0 {
                return Err(Error::InvalidArg(format!("{prefix}: zero width layer {l}")));
            }
            let w = store.add(format!("{prefix}.w{l}"), init_affine(rng, fi, fo));
            let b = store.add(format!("{prefix}.b{l}"), init_bias(rng, fi, fo));
            layers.push(Affine { w, b });
        }
        Ok(Fnn {
            layers,
            widths: widths.to_vec(),
            activation,
            activate_final: false,
        })
    }

    /// Apply the activation after the final layer as well.
    pub fn with_final_activation(mut self) -> Self {
        self.activate_final = true;
        self
    }

    pub fn in_width(&self) -> usize {
        self.widths[0]
    }

    pub fn out_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn forward(&self, g: &mut Graph, ids: &[VarId], x: VarId) -> Result<VarId> {
        let got = g.value(x).cols();
        if got != self.in_width() {
            return Err(Error::shape(
                "fnn",
                format!("input width {} does not match first layer width {}", got, self.in_width()),
            ));
        }
        let mut cur = x;
        let last = self.layers.len() - 1;
        for (l, aff) in self.layers.iter().enumerate() {
            cur = g.matmul(cur, ids[aff.w.0])?;
            cur = g.add_row(cur, ids[aff.b.0])?;
            if l < last || self.activate_final {
                cur = g.activation(cur, self.activation)?;
            }
        }
        Ok(cur)
    }
}
