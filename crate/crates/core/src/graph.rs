//! Define-by-run computation graph with reverse-mode differentiation.
//!
//! A `Graph` is rebuilt for every forward pass: each operation computes
//! its value eagerly and appends a node recording the operands, so node
//! ids are already in topological order and the backward sweep is a
//! single reverse iteration. Inputs must precede outputs (enforced at
//! construction), which rules out cycles.
//!
//! Complex quantities (spectral coefficients) are real tensors with a
//! trailing axis of extent 2 holding interleaved re/im parts; gradients
//! are taken with respect to that real representation, so the backward
//! rule of every linear spectral op is its real adjoint.

use crate::error::{Error, Result};
use crate::spectral;
use crate::tensor::{Activation, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(pub(crate) usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Matmul(VarId, VarId),
    Add(VarId, VarId),
    Sub(VarId, VarId),
    Mul(VarId, VarId),
    Scale(VarId, f64),
    AddRow(VarId, VarId),
    AddScalar(VarId, VarId),
    Act(VarId, Activation),
    SoftmaxRows(VarId),
    Transpose(VarId),
    Reshape(VarId),
    Sum(VarId),
    /// Quadrature-style reduction: out[c] = sum_i w[i] x[i, c].
    WeightedColsum(VarId, Vec<f64>),
    Rfft(VarId),
    Irfft(VarId, usize),
    ModeMatmul(VarId, VarId),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Matmul(..) => "matmul",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Scale(..) => "scale",
            Op::AddRow(..) => "add_row",
            Op::AddScalar(..) => "add_scalar",
            Op::Act(..) => "activation",
            Op::SoftmaxRows(..) => "softmax_rows",
            Op::Transpose(..) => "transpose",
            Op::Reshape(..) => "reshape",
            Op::Sum(..) => "sum",
            Op::WeightedColsum(..) => "weighted_colsum",
            Op::Rfft(..) => "rfft",
            Op::Irfft(..) => "irfft",
            Op::ModeMatmul(..) => "mode_matmul",
        }
    }

    fn inputs(&self) -> [Option<VarId>; 2] {
        match *self {
            Op::Leaf => [None, None],
            Op::Matmul(a, b)
            | Op::Add(a, b)
            | Op::Sub(a, b)
            | Op::Mul(a, b)
            | Op::AddRow(a, b)
            | Op::AddScalar(a, b)
            | Op::ModeMatmul(a, b) => [Some(a), Some(b)],
            Op::Scale(a, _)
            | Op::Act(a, _)
            | Op::SoftmaxRows(a)
            | Op::Transpose(a)
            | Op::Reshape(a)
            | Op::Sum(a)
            | Op::WeightedColsum(a, _)
            | Op::Rfft(a)
            | Op::Irfft(a, _) => [Some(a), None],
        }
    }
}

struct Node {
    t: Tensor,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Row-major matrix product into a fresh buffer (ikj loop order).
pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for l in 0..k {
            let av = a[i * k + l];
            if av == 0.0 {
                continue;
            }
            let brow = &b[l * n..(l + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
    out
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: VarId) -> &Tensor {
        &self.nodes[id.0].t
    }

    /// Gradient buffer of a node, present after `backward` if the node
    /// requires grad.
    pub fn grad(&self, id: VarId) -> Option<&[f64]> {
        self.nodes[id.0].t.grad.as_deref()
    }

    fn push(&mut self, mut t: Tensor, op: Op, requires_grad: bool) -> Result<VarId> {
        if !t.all_finite() {
            return Err(Error::NonFinite {
                context: format!("forward of {}", op.name()),
            });
        }
        t.requires_grad = requires_grad;
        t.grad = None;
        self.nodes.push(Node { t, op });
        Ok(VarId(self.nodes.len() - 1))
    }

    fn requires(&self, id: VarId) -> bool {
        self.nodes[id.0].t.requires_grad
    }

    fn any_requires(&self, ids: &[VarId]) -> bool {
        ids.iter().any(|&i| self.requires(i))
    }

    /// Insert a leaf. Its `requires_grad` flag is kept.
    pub fn leaf(&mut self, t: Tensor) -> Result<VarId> {
        let rg = t.requires_grad;
        self.push(t, Op::Leaf, rg)
    }

    /// Insert a non-differentiable constant leaf.
    pub fn constant(&mut self, t: Tensor) -> Result<VarId> {
        let mut t = t;
        t.requires_grad = false;
        self.push(t, Op::Leaf, false)
    }

    fn check2(&self, op: &'static str, id: VarId) -> Result<(usize, usize)> {
        let t = self.value(id);
        if t.rank() != 2 {
            return Err(Error::shape(op, format!("expected rank 2, got {:?}", t.shape())));
        }
        Ok((t.rows(), t.cols()))
    }

    pub fn matmul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let (m, ka) = self.check2("matmul", a)?;
        let (kb, n) = self.check2("matmul", b)?;
        if ka != kb {
            return Err(Error::shape(
                "matmul",
                format!("inner dimensions differ: {:?} x {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        let data = matmul_raw(self.value(a).data(), self.value(b).data(), m, ka, n);
        let rg = self.any_requires(&[a, b]);
        self.push(Tensor::new(vec![m, n], data)?, Op::Matmul(a, b), rg)
    }

    fn zip_same_shape(
        &mut self,
        op_name: &'static str,
        a: VarId,
        b: VarId,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<VarId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::shape(
                op_name,
                format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        let data: Vec<f64> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let shape = self.value(a).shape().to_vec();
        let rg = self.any_requires(&[a, b]);
        self.push(Tensor::new(shape, data)?, op, rg)
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.zip_same_shape("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.zip_same_shape("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.zip_same_shape("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: VarId, c: f64) -> Result<VarId> {
        let data: Vec<f64> = self.value(a).data().iter().map(|&x| c * x).collect();
        let shape = self.value(a).shape().to_vec();
        let rg = self.requires(a);
        self.push(Tensor::new(shape, data)?, Op::Scale(a, c), rg)
    }

    /// Broadcast a [n] (or [1, n]) bias over the rows of a [m, n] tensor.
    pub fn add_row(&mut self, a: VarId, bias: VarId) -> Result<VarId> {
        let (m, n) = self.check2("add_row", a)?;
        let bt = self.value(bias);
        let blen = bt.len();
        if blen != n {
            return Err(Error::shape(
                "add_row",
                format!("bias length {} vs {} columns", blen, n),
            ));
        }
        let mut data = self.value(a).data().to_vec();
        let b = self.value(bias).data();
        for i in 0..m {
            for j in 0..n {
                data[i * n + j] += b[j];
            }
        }
        let rg = self.any_requires(&[a, bias]);
        self.push(Tensor::new(vec![m, n], data)?, Op::AddRow(a, bias), rg)
    }

    /// Broadcast a single-element tensor over every entry.
    pub fn add_scalar(&mut self, a: VarId, s: VarId) -> Result<VarId> {
        if self.value(s).len() != 1 {
            return Err(Error::shape("add_scalar", "broadcast operand must hold one value"));
        }
        let sv = self.value(s).data()[0];
        let data: Vec<f64> = self.value(a).data().iter().map(|&x| x + sv).collect();
        let shape = self.value(a).shape().to_vec();
        let rg = self.any_requires(&[a, s]);
        self.push(Tensor::new(shape, data)?, Op::AddScalar(a, s), rg)
    }

    pub fn activation(&mut self, a: VarId, kind: Activation) -> Result<VarId> {
        let data: Vec<f64> = self.value(a).data().iter().map(|&x| kind.apply(x)).collect();
        let shape = self.value(a).shape().to_vec();
        let rg = self.requires(a);
        self.push(Tensor::new(shape, data)?, Op::Act(a, kind), rg)
    }

    /// Row-wise softmax with max subtraction for overflow safety.
    pub fn softmax_rows(&mut self, a: VarId) -> Result<VarId> {
        let (m, n) = self.check2("softmax_rows", a)?;
        let x = self.value(a).data();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            let row = &x[i * n..(i + 1) * n];
            let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for j in 0..n {
                let e = (row[j] - mx).exp();
                data[i * n + j] = e;
                sum += e;
            }
            for j in 0..n {
                data[i * n + j] /= sum;
            }
        }
        let rg = self.requires(a);
        self.push(Tensor::new(vec![m, n], data)?, Op::SoftmaxRows(a), rg)
    }

    pub fn transpose(&mut self, a: VarId) -> Result<VarId> {
        let (m, n) = self.check2("transpose", a)?;
        let x = self.value(a).data();
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = x[i * n + j];
            }
        }
        let rg = self.requires(a);
        self.push(Tensor::new(vec![n, m], data)?, Op::Transpose(a), rg)
    }

    pub fn reshape(&mut self, a: VarId, shape: Vec<usize>) -> Result<VarId> {
        let want: usize = shape.iter().product();
        if want != self.value(a).len() {
            return Err(Error::shape(
                "reshape",
                format!("{:?} -> {:?} changes element count", self.value(a).shape(), shape),
            ));
        }
        let data = self.value(a).data().to_vec();
        let rg = self.requires(a);
        self.push(Tensor::new(shape, data)?, Op::Reshape(a), rg)
    }

    /// Full reduction to a [1] scalar.
    pub fn sum(&mut self, a: VarId) -> Result<VarId> {
        let s: f64 = self.value(a).data().iter().sum();
        let rg = self.requires(a);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    /// out[c] = sum_i w[i] x[i, c]; the quadrature primitive.
    pub fn weighted_colsum(&mut self, a: VarId, weights: Vec<f64>) -> Result<VarId> {
        let (m, n) = self.check2("weighted_colsum", a)?;
        if weights.len() != m {
            return Err(Error::shape(
                "weighted_colsum",
                format!("{} weights vs {} rows", weights.len(), m),
            ));
        }
        let x = self.value(a).data();
        let mut data = vec![0.0; n];
        for i in 0..m {
            let w = weights[i];
            for j in 0..n {
                data[j] += w * x[i * n + j];
            }
        }
        let rg = self.requires(a);
        self.push(Tensor::new(vec![1, n], data)?, Op::WeightedColsum(a, weights), rg)
    }

    /// Truncated real FFT of each column of a [m, d] tensor, forward
    /// normalization 1/m; output [m/2+1, d, 2] interleaved re/im.
    pub fn rfft(&mut self, a: VarId) -> Result<VarId> {
        let (m, d) = self.check2("rfft", a)?;
        if m < 2 {
            return Err(Error::shape("rfft", "need at least 2 samples"));
        }
        let data = spectral::rfft_forward(self.value(a).data(), m, d);
        let bins = spectral::rfft_len(m);
        let rg = self.requires(a);
        self.push(Tensor::new(vec![bins, d, 2], data)?, Op::Rfft(a), rg)
    }

    /// Inverse of `rfft` back to m samples. Imaginary parts of the DC
    /// (and Nyquist, for even m) bins are structurally zero and ignored;
    /// their gradients are zero.
    pub fn irfft(&mut self, a: VarId, m: usize) -> Result<VarId> {
        let t = self.value(a);
        if t.rank() != 3 || t.shape()[2] != 2 {
            return Err(Error::shape("irfft", format!("expected [bins, d, 2], got {:?}", t.shape())));
        }
        let bins = t.shape()[0];
        let d = t.shape()[1];
        if bins != spectral::rfft_len(m) {
            return Err(Error::shape(
                "irfft",
                format!("{} bins cannot reconstruct {} samples", bins, m),
            ));
        }
        let data = spectral::irfft_forward(self.value(a).data(), bins, d, m);
        let rg = self.requires(a);
        self.push(Tensor::new(vec![m, d], data)?, Op::Irfft(a, m), rg)
    }

    /// Apply per-mode complex matrices to the first k modes of a
    /// [bins, d, 2] coefficient tensor; modes >= k are zeroed.
    /// Weights are [k, d, d, 2].
    pub fn mode_matmul(&mut self, coeffs: VarId, weights: VarId) -> Result<VarId> {
        let (bins, d) = {
            let c = self.value(coeffs);
            if c.rank() != 3 || c.shape()[2] != 2 {
                return Err(Error::shape("mode_matmul", format!("coefficients must be [bins, d, 2], got {:?}", c.shape())));
            }
            (c.shape()[0], c.shape()[1])
        };
        let k = {
            let w = self.value(weights);
            if w.rank() != 4 || w.shape()[3] != 2 || w.shape()[1] != d || w.shape()[2] != d {
                return Err(Error::shape(
                    "mode_matmul",
                    format!("weights must be [k, {d}, {d}, 2], got {:?}", w.shape()),
                ));
            }
            w.shape()[0]
        };
        if k > bins {
            return Err(Error::shape(
                "mode_matmul",
                format!("{k} weight modes exceed the {bins} coefficient bins"),
            ));
        }
        let data = spectral::mode_matmul_forward(
            self.value(coeffs).data(),
            bins,
            d,
            self.value(weights).data(),
            k,
        );
        let rg = self.any_requires(&[coeffs, weights]);
        self.push(Tensor::new(vec![bins, d, 2], data)?, Op::ModeMatmul(coeffs, weights), rg)
    }

    /// Reverse sweep from a scalar loss. Fills the `grad` buffer of every
    /// node with `requires_grad`; parameters not reachable from the loss
    /// keep zero gradients.
    pub fn backward(&mut self, loss: VarId) -> Result<()> {
        if self.value(loss).len() != 1 {
            return Err(Error::NonScalarLoss {
                len: self.value(loss).len(),
            });
        }
        let n = self.nodes.len();
        let mut grads: Vec<Option<Vec<f64>>> = (0..n)
            .map(|i| {
                if self.nodes[i].t.requires_grad {
                    Some(vec![0.0; self.nodes[i].t.len()])
                } else {
                    None
                }
            })
            .collect();

        if self.nodes[loss.0].t.requires_grad {
            // Mark nodes reachable from the loss.
            let mut reachable = vec![false; n];
            let mut stack = vec![loss.0];
            reachable[loss.0] = true;
            while let Some(i) = stack.pop() {
                for input in self.nodes[i].op.inputs().into_iter().flatten() {
                    if !reachable[input.0] {
                        reachable[input.0] = true;
                        stack.push(input.0);
                    }
                }
            }

            grads[loss.0].as_mut().unwrap()[0] = 1.0;
            for i in (0..=loss.0).rev() {
                if !reachable[i] || !self.nodes[i].t.requires_grad {
                    continue;
                }
                let g_out = grads[i].take().unwrap();
                self.accumulate(i, &g_out, &mut grads);
                grads[i] = Some(g_out);
            }
        }

        for (i, g) in grads.into_iter().enumerate() {
            if let Some(ref buf) = g {
                if buf.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        context: format!("backward of {}", self.nodes[i].op.name()),
                    });
                }
            }
            self.nodes[i].t.grad = g;
        }
        Ok(())
    }

    /// Add the contribution of node i's output gradient to its inputs.
    fn accumulate(&self, i: usize, g_out: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let val = |id: VarId| self.nodes[id.0].t.data();
        let shape = |id: VarId| self.nodes[id.0].t.shape();
        match node.op {
            Op::Leaf => {}
            Op::Matmul(a, b) => {
                let (m, k) = (shape(a)[0], shape(a)[1]);
                let n = shape(b)[1];
                if let Some(ga) = grads[a.0].as_mut() {
                    // dA = G B^T
                    let bv = val(b);
                    for i2 in 0..m {
                        for l in 0..k {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += g_out[i2 * n + j] * bv[l * n + j];
                            }
                            ga[i2 * k + l] += acc;
                        }
                    }
                }
                if let Some(gb) = grads[b.0].as_mut() {
                    // dB = A^T G
                    let av = val(a);
                    for l in 0..k {
                        for i2 in 0..m {
                            let x = av[i2 * k + l];
                            if x == 0.0 {
                                continue;
                            }
                            let grow = &g_out[i2 * n..(i2 + 1) * n];
                            let brow = &mut gb[l * n..(l + 1) * n];
                            for j in 0..n {
                                brow[j] += x * grow[j];
                            }
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
                if let Some(gb) = grads[b.0].as_mut() {
                    for (g, &x) in gb.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
            }
            Op::Sub(a, b) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
                if let Some(gb) = grads[b.0].as_mut() {
                    for (g, &x) in gb.iter_mut().zip(g_out) {
                        *g -= x;
                    }
                }
            }
            Op::Mul(a, b) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for ((g, &x), &y) in ga.iter_mut().zip(g_out).zip(val(b)) {
                        *g += x * y;
                    }
                }
                if let Some(gb) = grads[b.0].as_mut() {
                    for ((g, &x), &y) in gb.iter_mut().zip(g_out).zip(val(a)) {
                        *g += x * y;
                    }
                }
            }
            Op::Scale(a, c) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += c * x;
                    }
                }
            }
            Op::AddRow(a, bias) => {
                let n = shape(a)[1];
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
                if let Some(gb) = grads[bias.0].as_mut() {
                    for (idx, &x) in g_out.iter().enumerate() {
                        gb[idx % n] += x;
                    }
                }
            }
            Op::AddScalar(a, s) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
                if let Some(gs) = grads[s.0].as_mut() {
                    gs[0] += g_out.iter().sum::<f64>();
                }
            }
            Op::Act(a, kind) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for ((g, &x), &xin) in ga.iter_mut().zip(g_out).zip(val(a)) {
                        *g += x * kind.deriv(xin);
                    }
                }
            }
            Op::SoftmaxRows(a) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    let (m, n) = (node.t.rows(), node.t.cols());
                    let y = node.t.data();
                    for r in 0..m {
                        let yr = &y[r * n..(r + 1) * n];
                        let gr = &g_out[r * n..(r + 1) * n];
                        let dot: f64 = yr.iter().zip(gr).map(|(&yv, &gv)| yv * gv).sum();
                        for j in 0..n {
                            ga[r * n + j] += yr[j] * (gr[j] - dot);
                        }
                    }
                }
            }
            Op::Transpose(a) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    let (m, n) = (shape(a)[0], shape(a)[1]);
                    for i2 in 0..m {
                        for j in 0..n {
                            ga[i2 * n + j] += g_out[j * m + i2];
                        }
                    }
                }
            }
            Op::Reshape(a) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for (g, &x) in ga.iter_mut().zip(g_out) {
                        *g += x;
                    }
                }
            }
            Op::Sum(a) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    for g in ga.iter_mut() {
                        *g += g_out[0];
                    }
                }
            }
            Op::WeightedColsum(a, ref w) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    let n = shape(a)[1];
                    for (i2, &wi) in w.iter().enumerate() {
                        for j in 0..n {
                            ga[i2 * n + j] += wi * g_out[j];
                        }
                    }
                }
            }
            Op::Rfft(a) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    let (m, d) = (shape(a)[0], shape(a)[1]);
                    let adj = spectral::rfft_adjoint(g_out, m, d);
                    for (g, x) in ga.iter_mut().zip(adj) {
                        *g += x;
                    }
                }
            }
            Op::Irfft(a, m) => {
                if let Some(ga) = grads[a.0].as_mut() {
                    let d = shape(a)[1];
                    let adj = spectral::irfft_adjoint(g_out, m, d);
                    for (g, x) in ga.iter_mut().zip(adj) {
                        *g += x;
                    }
                }
            }
            Op::ModeMatmul(c, r) => {
                let bins = shape(c)[0];
                let d = shape(c)[1];
                let k = shape(r)[0];
                if let Some(gc) = grads[c.0].as_mut() {
                    spectral::mode_matmul_adjoint_coeffs(g_out, val(r), bins, d, k, gc);
                }
                if let Some(gr) = grads[r.0].as_mut() {
                    spectral::mode_matmul_adjoint_weights(g_out, val(c), d, k, gr);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_with(vals: &[(Vec<usize>, Vec<f64>, bool)]) -> (Graph, Vec<VarId>) {
        let mut g = Graph::new();
        let ids = vals
            .iter()
            .map(|(s, d, rg)| {
                let mut t = Tensor::new(s.clone(), d.clone()).unwrap();
                t.requires_grad = *rg;
                g.leaf(t).unwrap()
            })
            .collect();
        (g, ids)
    }

    #[test]
    fn matmul_identity_returns_operand() {
        let (mut g, ids) = graph_with(&[
            (vec![2, 2], vec![1.0, 0.0, 0.0, 1.0], false),
            (vec![2, 2], vec![3.0, -1.0, 2.0, 5.0], false),
        ]);
        let out = g.matmul(ids[0], ids[1]).unwrap();
        assert_eq!(g.value(out).data(), &[3.0, -1.0, 2.0, 5.0]);
    }

    #[test]
    fn matmul_hand_example() {
        // [[1,2],[3,4]] x [[5],[6]] = [[17],[39]]
        let (mut g, ids) = graph_with(&[
            (vec![2, 2], vec![1.0, 2.0, 3.0, 4.0], false),
            (vec![2, 1], vec![5.0, 6.0], false),
        ]);
        let out = g.matmul(ids[0], ids[1]).unwrap();
        assert_eq!(g.value(out).data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_rejects_mismatched_inner_dims() {
        let (mut g, ids) = graph_with(&[
            (vec![2, 3], vec![0.0; 6], false),
            (vec![2, 2], vec![0.0; 4], false),
        ]);
        assert!(matches!(
            g.matmul(ids[0], ids[1]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn backward_of_square_is_two_theta() {
        // loss = theta . theta with theta = [3] -> dloss/dtheta = 6.
        let (mut g, ids) = graph_with(&[(vec![1, 1], vec![3.0], true)]);
        let sq = g.mul(ids[0], ids[0]).unwrap();
        let loss = g.sum(sq).unwrap();
        g.backward(loss).unwrap();
        assert_eq!(g.grad(ids[0]).unwrap(), &[6.0]);
    }

    #[test]
    fn backward_through_fixed_matrix_gives_column_sums() {
        // loss = sum(A x): d/dx = A^T 1 = column sums of A.
        let (mut g, ids) = graph_with(&[
            (vec![2, 2], vec![1.0, 2.0, 3.0, 4.0], false),
            (vec![2, 1], vec![0.5, -0.25], true),
        ]);
        let y = g.matmul(ids[0], ids[1]).unwrap();
        let loss = g.sum(y).unwrap();
        g.backward(loss).unwrap();
        assert_eq!(g.grad(ids[1]).unwrap(), &[4.0, 6.0]);
    }

    #[test]
    fn unreachable_parameter_gets_zero_gradient() {
        let (mut g, ids) = graph_with(&[
            (vec![1, 1], vec![2.0], true),
            (vec![1, 1], vec![5.0], true), // never used in the loss
        ]);
        let loss = g.sum(ids[0]).unwrap();
        g.backward(loss).unwrap();
        assert_eq!(g.grad(ids[1]).unwrap(), &[0.0]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let (mut g, ids) = graph_with(&[(vec![2, 1], vec![1.0, 2.0], true)]);
        assert!(matches!(
            g.backward(ids[0]),
            Err(Error::NonScalarLoss { len: 2 })
        ));
    }

    #[test]
    fn nan_input_is_detected() {
        let mut g = Graph::new();
        let t = Tensor::new(vec![1], vec![f64::NAN]).unwrap();
        assert!(matches!(g.leaf(t), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn softmax_rows_are_simplex_points() {
        let (mut g, ids) = graph_with(&[(
            vec![3, 4],
            vec![
                0.3, -1.2, 2.0, 0.0, 5.0, 5.0, 5.0, 5.0, -3.0, 0.1, 0.2, 0.4,
            ],
            false,
        )]);
        let s = g.softmax_rows(ids[0]).unwrap();
        let v = g.value(s);
        for i in 0..3 {
            let row: Vec<f64> = (0..4).map(|j| v.at2(i, j)).collect();
            assert!(row.iter().all(|&x| x >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_survives_large_scores() {
        // Max subtraction keeps exp() in range.
        let (mut g, ids) = graph_with(&[(vec![1, 2], vec![1000.0, 999.0], false)]);
        let s = g.softmax_rows(ids[0]).unwrap();
        let v = g.value(s).data().to_vec();
        assert!((v[0] + v[1] - 1.0).abs() < 1e-12);
        assert!(v[0] > v[1]);
    }

    // grad(alpha L1 + beta L2) = alpha grad(L1) + beta grad(L2).
    #[test]
    fn backward_is_linear_in_the_loss() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for(11, 0xbac);
        for _ in 0..20 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (alpha, beta) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));

            let run = |a: f64, b: f64| -> Vec<f64> {
                let (mut g, ids) = graph_with(&[
                    (vec![2, 3], x.clone(), true),
                    (vec![3, 2], w.clone(), false),
                ]);
                let y = g.matmul(ids[0], ids[1]).unwrap();
                let l1 = g.sum(y).unwrap();
                let sq = g.mul(ids[0], ids[0]).unwrap();
                let l2 = g.sum(sq).unwrap();
                let s1 = g.scale(l1, a).unwrap();
                let s2 = g.scale(l2, b).unwrap();
                let loss = g.add(s1, s2).unwrap();
                g.backward(loss).unwrap();
                g.grad(ids[0]).unwrap().to_vec()
            };

            let combined = run(alpha, beta);
            let g1 = run(1.0, 0.0);
            let g2 = run(0.0, 1.0);
            for i in 0..6 {
                let expect = alpha * g1[i] + beta * g2[i];
                let denom = expect.abs().max(1.0);
                assert!(
                    ((combined[i] - expect) / denom).abs() < 1e-12,
                    "component {i}: {} vs {}",
                    combined[i],
                    expect
                );
            }
        }
    }
}
