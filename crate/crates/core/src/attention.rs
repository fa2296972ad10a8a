//! Attention integral layer: a discretized kernel integral whose kernel
//! is softmax(q . k).
//!
//! z(x_i) = sum_j softmax_j(q(phi(x_i)) . k(phi(x_j))) v(phi(x_j))
//!
//! The uniform quadrature weight cancels between the softmax numerator
//! and denominator, so the discrete form needs no h factor and the same
//! weights serve every resolution. Each output row is a convex
//! combination of the v rows, which bounds the layer per channel by the
//! extrema of v.

use crate::error::Result;
use crate::graph::{Graph, VarId};
use crate::params::{Fnn, ParamStore};
use crate::tensor::Activation;
use rand_chacha::ChaCha8Rng;

/// Softmax attention core on already-transformed features:
/// softmax_rows(q k^T) v. Scores get row-max subtraction inside
/// `softmax_rows`, so large magnitudes cannot overflow.
pub fn attention(g: &mut Graph, q: VarId, k: VarId, v: VarId) -> Result<VarId> {
    let kt = g.transpose(k)?;
    let scores = g.matmul(q, kt)?;
    let weights = g.softmax_rows(scores)?;
    g.matmul(weights, v)
}

/// Attention integral operator layer. q/k/v are pointwise transforms
/// (affine plus activation; depth is the configured width chain).
#[derive(Debug, Clone)]
pub struct AioLayer {
    pub q_net: Fnn,
    pub k_net: Fnn,
    pub v_net: Fnn,
}

impl AioLayer {
    /// q and k map d_phi -> d_attn; v maps d_phi -> d_phi so the layer
    /// preserves the channel width.
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        d_phi: usize,
        d_attn: usize,
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let q_net = Fnn::new(store, &format!("{prefix}.q"), &[d_phi, d_attn], activation, rng)?
            .with_final_activation();
        let k_net = Fnn::new(store, &format!("{prefix}.k"), &[d_phi, d_attn], activation, rng)?
            .with_final_activation();
        let v_net = Fnn::new(store, &format!("{prefix}.v"), &[d_phi, d_phi], activation, rng)?
            .with_final_activation();
        Ok(AioLayer { q_net, k_net, v_net })
    }

    pub fn forward(&self, g: &mut Graph, ids: &[VarId], phi: VarId) -> Result<VarId> {
        let q = self.q_net.forward(g, ids, phi)?;
        let k = self.k_net.forward(g, ids, phi)?;
        let v = self.v_net.forward(g, ids, phi)?;
        attention(g, q, k, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::finite_diff_check;
    use crate::rng;
    use crate::tensor::Tensor;
    use rand::Rng;

    fn make_layer(seed: u64, d_phi: usize, d_attn: usize) -> (ParamStore, AioLayer) {
        let mut store = ParamStore::new();
        let mut r = rng::rng_for(seed, rng::stream::INIT);
        let layer = AioLayer::new(&mut store, "aio", d_phi, d_attn, Activation::Tanh, &mut r).unwrap();
        (store, layer)
    }

    fn run_layer(store: &ParamStore, layer: &AioLayer, phi: &Tensor) -> Vec<f64> {
        let mut g = Graph::new();
        let ids = store.bind(&mut g, false).unwrap();
        let x = g.constant(phi.clone()).unwrap();
        let out = layer.forward(&mut g, &ids, x).unwrap();
        g.value(out).data().to_vec()
    }

    #[test]
    fn single_point_returns_its_own_value_transform() {
        // With one sample the softmax weight is 1, so z = v(phi).
        let (store, layer) = make_layer(3, 3, 2);
        let phi = Tensor::new(vec![1, 3], vec![0.2, -0.9, 1.4]).unwrap();
        let out = run_layer(&store, &layer, &phi);

        let mut g = Graph::new();
        let ids = store.bind(&mut g, false).unwrap();
        let x = g.constant(phi).unwrap();
        let v = layer.v_net.forward(&mut g, &ids, x).unwrap();
        assert_eq!(out, g.value(v).data());
    }

    #[test]
    fn zero_query_transform_averages_v_uniformly() {
        let (mut store, layer) = make_layer(4, 2, 2);
        // Zero out q's affine layer: scores become identically zero.
        let w = layer.q_net.layers[0].w;
        let b = layer.q_net.layers[0].b;
        store.value_mut(w).data_mut().fill(0.0);
        store.value_mut(b).data_mut().fill(0.0);

        let phi = Tensor::from_rows(&[vec![0.5, -0.2], vec![1.0, 0.3], vec![-0.7, 0.9]]).unwrap();
        let out = run_layer(&store, &layer, &phi);

        let mut g = Graph::new();
        let ids = store.bind(&mut g, false).unwrap();
        let x = g.constant(phi).unwrap();
        let v = layer.v_net.forward(&mut g, &ids, x).unwrap();
        let vv = g.value(v);
        for c in 0..2 {
            let mean: f64 = (0..3).map(|i| vv.at2(i, c)).sum::<f64>() / 3.0;
            for i in 0..3 {
                assert!((out[i * 2 + c] - mean).abs() < 1e-12);
            }
        }
    }

    // Dual route: explicit exp/sum double loop without max subtraction.
    #[test]
    fn matches_double_loop_oracle() {
        let mut r = rng::rng_for(5, 0x777);
        let (m, d_phi, d_attn) = (4usize, 2usize, 3usize);
        let (store, layer) = make_layer(6, d_phi, d_attn);
        let phi_data: Vec<f64> = (0..m * d_phi).map(|_| r.random_range(-1.0..1.0)).collect();
        let phi = Tensor::new(vec![m, d_phi], phi_data).unwrap();
        let out = run_layer(&store, &layer, &phi);

        // Oracle: evaluate q, k, v values, then the summation formula.
        let mut g = Graph::new();
        let ids = store.bind(&mut g, false).unwrap();
        let x = g.constant(phi).unwrap();
        let q = layer.q_net.forward(&mut g, &ids, x).unwrap();
        let k = layer.k_net.forward(&mut g, &ids, x).unwrap();
        let v = layer.v_net.forward(&mut g, &ids, x).unwrap();
        let (qv, kv, vv) = (g.value(q).clone(), g.value(k).clone(), g.value(v).clone());
        for i in 0..m {
            let mut denom = 0.0;
            let mut numer = vec![0.0; d_phi];
            for j in 0..m {
                let dot: f64 = (0..d_attn).map(|t| qv.at2(i, t) * kv.at2(j, t)).sum();
                let e = dot.exp();
                denom += e;
                for c in 0..d_phi {
                    numer[c] += e * vv.at2(j, c);
                }
            }
            for c in 0..d_phi {
                assert!(
                    (out[i * d_phi + c] - numer[c] / denom).abs() < 1e-12,
                    "i={i} c={c}"
                );
            }
        }
    }

    #[test]
    fn permuting_input_rows_permutes_output_rows() {
        let (store, layer) = make_layer(7, 3, 3);
        let rows = [
            vec![0.1, 0.5, -0.3],
            vec![-1.0, 0.2, 0.8],
            vec![0.6, -0.6, 0.0],
            vec![0.9, 0.1, 0.4],
        ];
        let perm = [2usize, 0, 3, 1];
        let base = run_layer(&store, &layer, &Tensor::from_rows(&rows.to_vec()).unwrap());
        let permuted_rows: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let permuted = run_layer(&store, &layer, &Tensor::from_rows(&permuted_rows).unwrap());
        for (new_pos, &old_pos) in perm.iter().enumerate() {
            for c in 0..3 {
                assert!(
                    (permuted[new_pos * 3 + c] - base[old_pos * 3 + c]).abs() < 1e-12,
                    "row {new_pos} channel {c}"
                );
            }
        }
    }

    #[test]
    fn outputs_stay_inside_the_convex_hull_of_v() {
        let mut r = rng::rng_for(9, 0x888);
        let (m, d_phi) = (6usize, 2usize);
        let (store, layer) = make_layer(8, d_phi, 2);
        let phi = Tensor::new(
            vec![m, d_phi],
            (0..m * d_phi).map(|_| r.random_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let out = run_layer(&store, &layer, &phi);

        let mut g = Graph::new();
        let ids = store.bind(&mut g, false).unwrap();
        let x = g.constant(phi).unwrap();
        let v = layer.v_net.forward(&mut g, &ids, x).unwrap();
        let vv = g.value(v);
        for c in 0..d_phi {
            let col: Vec<f64> = (0..m).map(|i| vv.at2(i, c)).collect();
            let (lo, hi) = col
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            for i in 0..m {
                let z = out[i * d_phi + c];
                assert!(z >= lo - 1e-12 && z <= hi + 1e-12, "channel {c} row {i}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (store, layer) = make_layer(10, 2, 2);
        let mut r = rng::rng_for(11, 0x999);
        let phi = Tensor::new(vec![4, 2], (0..8).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        // Differentiate with respect to every layer parameter.
        let params: Vec<Tensor> = store.iter().map(|(_, t)| t.clone()).collect();
        let worst = finite_diff_check(
            &params,
            |g, ids| {
                let x = g.constant(phi.clone())?;
                let out = layer.forward(g, ids, x)?;
                let sq = g.mul(out, out)?;
                g.sum(sq)
            },
            1e-5,
        )
        .unwrap();
        assert!(worst < 1e-4, "worst {worst}");
    }
}
