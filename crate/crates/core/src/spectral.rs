//! Real FFT with forward 1/m normalization, truncated spectral
//! convolution, and the Fourier integral layer built on them.
//!
//! Coefficients use the convention c_j = (1/m) sum_n f_n e^(-2pi i nj/m),
//! j = 0..m/2. Normalizing on the forward transform makes the retained
//! low modes of a smooth signal independent of the sampling resolution,
//! which is what lets one trained weight set serve every grid.
//!
//! Transforms run through a recursive mixed-radix decomposition with a
//! naive O(p^2) DFT at prime base cases, so cost is O(m * sum of prime
//! factors) per channel; resolutions here are small, and correctness
//! beats speed. A per-length root table is cached process-wide.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::graph::{Graph, VarId};
use crate::params::{init_affine, init_spectral, ParamId, ParamStore};
use crate::tensor::Activation;
use rand_chacha::ChaCha8Rng;

/// Number of retained rfft bins for m real samples.
pub fn rfft_len(m: usize) -> usize {
    m / 2 + 1
}

fn root_table(m: usize) -> Arc<Vec<Complex64>> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<Vec<Complex64>>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("root table lock");
    guard
        .entry(m)
        .or_insert_with(|| {
            let step = -2.0 * std::f64::consts::PI / m as f64;
            Arc::new(
                (0..m)
                    .map(|k| Complex64::from_polar(1.0, step * k as f64))
                    .collect(),
            )
        })
        .clone()
}

fn smallest_prime_factor(n: usize) -> usize {
    if n % 2 == 0 {
        return 2;
    }
    let mut p = 3;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 2;
    }
    n
}

/// Unnormalized DFT of x[offset + i*stride], i in 0..n, where the full
/// table covers length n*root_step. `inverse` flips the exponent sign.
fn fft_rec(
    x: &[Complex64],
    offset: usize,
    stride: usize,
    n: usize,
    root_step: usize,
    roots: &[Complex64],
    inverse: bool,
) -> Vec<Complex64> {
    let total = roots.len();
    let tw = |idx: usize| -> Complex64 {
        let w = roots[idx % total];
        if inverse {
            w.conj()
        } else {
            w
        }
    };
    if n == 1 {
        return vec![x[offset]];
    }
    let p = smallest_prime_factor(n);
    if p == n {
        // Prime length: direct DFT.
        let mut out = vec![Complex64::ZERO; n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for i in 0..n {
                acc += x[offset + i * stride] * tw(i * j * root_step);
            }
            *o = acc;
        }
        return out;
    }
    let q = n / p;
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|r| fft_rec(x, offset + r * stride, stride * p, q, root_step * p, roots, inverse))
        .collect();
    let mut out = vec![Complex64::ZERO; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for (r, sub) in subs.iter().enumerate() {
            acc += tw(j * r * root_step) * sub[j % q];
        }
        *o = acc;
    }
    out
}

/// Unnormalized complex DFT (mixed radix). `inverse` uses e^(+2pi i ...).
fn fft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let roots = root_table(x.len());
    fft_rec(x, 0, 1, x.len(), 1, &roots, inverse)
}

// ── Raw kernels used by the graph ops ───────────────────────────────

/// [m, d] real -> [bins, d, 2] interleaved, forward 1/m normalization.
pub fn rfft_forward(values: &[f64], m: usize, d: usize) -> Vec<f64> {
    let bins = rfft_len(m);
    let inv_m = 1.0 / m as f64;
    let mut out = vec![0.0; bins * d * 2];
    let mut col = vec![Complex64::ZERO; m];
    for c in 0..d {
        for i in 0..m {
            col[i] = Complex64::new(values[i * d + c], 0.0);
        }
        let spec = fft(&col, false);
        for j in 0..bins {
            out[(j * d + c) * 2] = spec[j].re * inv_m;
            out[(j * d + c) * 2 + 1] = spec[j].im * inv_m;
        }
    }
    out
}

/// Adjoint of `rfft_forward` under the real pairing on interleaved
/// coefficients: [bins, d, 2] -> [m, d].
pub(crate) fn rfft_adjoint(gbar: &[f64], m: usize, d: usize) -> Vec<f64> {
    let bins = rfft_len(m);
    let inv_m = 1.0 / m as f64;
    let mut out = vec![0.0; m * d];
    let mut full = vec![Complex64::ZERO; m];
    for c in 0..d {
        for (j, f) in full.iter_mut().enumerate() {
            *f = if j < bins {
                Complex64::new(gbar[(j * d + c) * 2], gbar[(j * d + c) * 2 + 1])
            } else {
                Complex64::ZERO
            };
        }
        let t = fft(&full, true);
        for i in 0..m {
            out[i * d + c] = t[i].re * inv_m;
        }
    }
    out
}

/// [bins, d, 2] -> [m, d] via Hermitian extension. Imaginary parts of
/// the DC bin (and Nyquist, if m is even) are treated as zero.
pub fn irfft_forward(coeffs: &[f64], bins: usize, d: usize, m: usize) -> Vec<f64> {
    debug_assert_eq!(bins, rfft_len(m));
    let mut out = vec![0.0; m * d];
    let mut full = vec![Complex64::ZERO; m];
    for c in 0..d {
        full.iter_mut().for_each(|v| *v = Complex64::ZERO);
        full[0] = Complex64::new(coeffs[c * 2], 0.0);
        for j in 1..bins {
            let re = coeffs[(j * d + c) * 2];
            let im = coeffs[(j * d + c) * 2 + 1];
            if m % 2 == 0 && j == m / 2 {
                full[j] = Complex64::new(re, 0.0);
            } else {
                full[j] = Complex64::new(re, im);
                full[m - j] = Complex64::new(re, -im);
            }
        }
        let t = fft(&full, true);
        for i in 0..m {
            out[i * d + c] = t[i].re;
        }
    }
    out
}

/// Adjoint of `irfft_forward`: [m, d] -> [bins, d, 2]. Gradients into
/// the structurally-zero imaginary components are zero.
pub(crate) fn irfft_adjoint(gbar: &[f64], m: usize, d: usize) -> Vec<f64> {
    let bins = rfft_len(m);
    let mut out = vec![0.0; bins * d * 2];
    let mut col = vec![Complex64::ZERO; m];
    for c in 0..d {
        for i in 0..m {
            col[i] = Complex64::new(gbar[i * d + c], 0.0);
        }
        let t = fft(&col, false);
        out[c * 2] = t[0].re;
        for j in 1..bins {
            if m % 2 == 0 && j == m / 2 {
                out[(j * d + c) * 2] = t[j].re;
            } else {
                out[(j * d + c) * 2] = 2.0 * t[j].re;
                out[(j * d + c) * 2 + 1] = 2.0 * t[j].im;
            }
        }
    }
    out
}

/// Per-mode complex matrix application; modes >= k are zeroed.
/// coeffs [bins, d, 2], weights [k, d, d, 2] -> [bins, d, 2].
pub(crate) fn mode_matmul_forward(
    coeffs: &[f64],
    bins: usize,
    d: usize,
    weights: &[f64],
    k: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; bins * d * 2];
    for j in 0..k {
        for o in 0..d {
            let mut re = 0.0;
            let mut im = 0.0;
            for i in 0..d {
                let r = ((j * d + o) * d + i) * 2;
                let c = (j * d + i) * 2;
                let (wr, wi) = (weights[r], weights[r + 1]);
                let (cr, ci) = (coeffs[c], coeffs[c + 1]);
                re += wr * cr - wi * ci;
                im += wr * ci + wi * cr;
            }
            out[(j * d + o) * 2] = re;
            out[(j * d + o) * 2 + 1] = im;
        }
    }
    out
}

/// d(loss)/d(coeffs) += R^H applied to the output gradient.
pub(crate) fn mode_matmul_adjoint_coeffs(
    gbar: &[f64],
    weights: &[f64],
    _bins: usize,
    d: usize,
    k: usize,
    gc: &mut [f64],
) {
    for j in 0..k {
        for i in 0..d {
            let mut re = 0.0;
            let mut im = 0.0;
            for o in 0..d {
                let r = ((j * d + o) * d + i) * 2;
                let gidx = (j * d + o) * 2;
                let (wr, wi) = (weights[r], weights[r + 1]);
                let (gr, gi) = (gbar[gidx], gbar[gidx + 1]);
                re += wr * gr + wi * gi;
                im += wr * gi - wi * gr;
            }
            gc[(j * d + i) * 2] += re;
            gc[(j * d + i) * 2 + 1] += im;
        }
    }
}

/// d(loss)/d(weights) += gbar (outer) conj(coeffs).
pub(crate) fn mode_matmul_adjoint_weights(
    gbar: &[f64],
    coeffs: &[f64],
    d: usize,
    k: usize,
    gr_out: &mut [f64],
) {
    for j in 0..k {
        for o in 0..d {
            let gidx = (j * d + o) * 2;
            let (gr, gi) = (gbar[gidx], gbar[gidx + 1]);
            for i in 0..d {
                let c = (j * d + i) * 2;
                let (cr, ci) = (coeffs[c], coeffs[c + 1]);
                let r = ((j * d + o) * d + i) * 2;
                gr_out[r] += gr * cr + gi * ci;
                gr_out[r + 1] += gi * cr - gr * ci;
            }
        }
    }
}

// ── Graph-level operations and the layer type ───────────────────────

/// Truncated spectral convolution: rfft, per-mode complex weights on the
/// first k modes (rest zeroed), inverse transform. phi is [m, d_phi],
/// weights are [k, d_phi, d_phi, 2].
pub fn spectral_conv(g: &mut Graph, phi: VarId, r: VarId) -> Result<VarId> {
    let m = {
        let t = g.value(phi);
        if t.rank() != 2 {
            return Err(Error::shape("spectral_conv", format!("phi must be [m, d], got {:?}", t.shape())));
        }
        t.rows()
    };
    let k = g.value(r).shape()[0];
    let available = rfft_len(m);
    if k > available {
        return Err(Error::ModeOverflow {
            modes: k,
            available,
            resolution: m,
        });
    }
    let c = g.rfft(phi)?;
    let z = g.mode_matmul(c, r)?;
    g.irfft(z, m)
}

/// Fourier integral layer: act(phi W + spectral_conv(phi)).
pub fn fio_forward(
    g: &mut Graph,
    phi: VarId,
    w: VarId,
    r: VarId,
    activation: Activation,
) -> Result<VarId> {
    let lin = g.matmul(phi, w)?;
    let spec = spectral_conv(g, phi, r)?;
    let s = g.add(lin, spec)?;
    g.activation(s, activation)
}

/// Truncated per-mode complex weights.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub modes: usize,
    /// [modes, d_phi, d_phi, 2] in the parameter store.
    pub r: ParamId,
}

impl SpectralWeights {
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        modes: usize,
        d: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let r = store.add(format!("{prefix}.r"), init_spectral(rng, modes, d));
        SpectralWeights { modes, r }
    }
}

/// Fourier integral operator layer with its pointwise linear path.
#[derive(Debug, Clone)]
pub struct FioLayer {
    pub weights: SpectralWeights,
    /// Pointwise [d_phi, d_phi] weight.
    pub w: ParamId,
    pub activation: Activation,
}

impl FioLayer {
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        modes: usize,
        d: usize,
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let weights = SpectralWeights::new(store, prefix, modes, d, rng);
        let w = store.add(format!("{prefix}.w"), init_affine(rng, d, d));
        FioLayer {
            weights,
            w,
            activation,
        }
    }

    pub fn forward(&self, g: &mut Graph, ids: &[VarId], phi: VarId) -> Result<VarId> {
        fio_forward(g, phi, ids[self.w.0], ids[self.weights.r.0], self.activation)
    }
}
