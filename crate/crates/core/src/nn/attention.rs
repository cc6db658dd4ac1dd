use rand::Rng;

use super::init::{glorot_uniform, glorot_vector};
use super::softmax::{masked_softmax, softmax_backward};
use super::tensor::{axpy, check_len, dot, matvec_acc, matvec_t_acc, outer_acc, Tensor};
use crate::error::Result;
use crate::impl_named_tensors;

/// Additive (MLP) attention scorer `e = vᵀ tanh(W_q s + W_k h + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub w_q: Tensor,
    pub w_k: Tensor,
    pub b: Tensor,
    pub v: Tensor,
}

impl_named_tensors!(AttentionParams { w_q, w_k, b, v });

impl AttentionParams {
    pub fn zeros(query_dim: usize, key_dim: usize, attn_dim: usize) -> Self {
        AttentionParams {
            w_q: Tensor::zeros(&[attn_dim, query_dim]),
            w_k: Tensor::zeros(&[attn_dim, key_dim]),
            b: Tensor::zeros(&[attn_dim]),
            v: Tensor::zeros(&[attn_dim]),
        }
    }

    pub fn init<R: Rng + ?Sized>(query_dim: usize, key_dim: usize, attn_dim: usize, rng: &mut R) -> Self {
        AttentionParams {
            w_q: glorot_uniform(attn_dim, query_dim, rng),
            w_k: glorot_uniform(attn_dim, key_dim, rng),
            b: Tensor::zeros(&[attn_dim]),
            v: glorot_vector(attn_dim, rng),
        }
    }

    pub fn attn_dim(&self) -> usize {
        self.v.len()
    }
}

pub fn attention_score(s: &[f64], h: &[f64], p: &AttentionParams) -> Result<f64> {
    check_len("attention_score query", p.w_q.cols(), s.len())?;
    check_len("attention_score key", p.w_k.cols(), h.len())?;
    let mut pre = p.b.data().to_vec();
    matvec_acc(&p.w_q, s, &mut pre);
    matvec_acc(&p.w_k, h, &mut pre);
    Ok(pre.iter().zip(p.v.data()).map(|(a, v)| v * a.tanh()).sum())
}

/// `W_k h_i + b` for every key row; query independent, so computed once per
/// encoded sequence.
pub fn project_keys(p: &AttentionParams, keys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    keys.iter()
        .map(|h| {
            let mut k = p.b.data().to_vec();
            matvec_acc(&p.w_k, h, &mut k);
            k
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AttendCache {
    pub query: Vec<f64>,
    /// `tanh(W_q s + W_k h_i + b)` per position; empty rows where masked.
    pub hidden: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Scores every unmasked key against `query`, normalizes with a masked
/// softmax and returns the weights and the convex combination of `keys`.
pub fn attend_forward(
    p: &AttentionParams,
    query: &[f64],
    keys: &[Vec<f64>],
    projected: &[Vec<f64>],
    mask: &[f64],
    key_dim: usize,
) -> (Vec<f64>, AttendCache) {
    let mut q = vec![0.0; p.attn_dim()];
    matvec_acc(&p.w_q, query, &mut q);
    let mut hidden = Vec::with_capacity(keys.len());
    let mut scores = vec![0.0; keys.len()];
    for i in 0..keys.len() {
        if mask[i] == 0.0 {
            hidden.push(Vec::new());
            continue;
        }
        let u: Vec<f64> = projected[i].iter().zip(&q).map(|(k, q)| (k + q).tanh()).collect();
        scores[i] = dot(&u, p.v.data());
        hidden.push(u);
    }
    let weights = masked_softmax(&scores, mask);
    let mut context = vec![0.0; key_dim];
    for (w, h) in weights.iter().zip(keys) {
        if *w != 0.0 {
            axpy(*w, h, &mut context);
        }
    }
    (
        context,
        AttendCache {
            query: query.to_vec(),
            hidden,
            weights,
        },
    )
}

/// Backward of [`attend_forward`] given the context gradient. Accumulates
/// into parameter grads, per-key grads and the query grad.
pub fn attend_backward(
    p: &AttentionParams,
    cache: &AttendCache,
    keys: &[Vec<f64>],
    d_context: &[f64],
    grads: &mut AttentionParams,
    d_keys: &mut [Vec<f64>],
    d_query: &mut [f64],
) {
    let n = keys.len();
    let mut d_weights = vec![0.0; n];
    for i in 0..n {
        let w = cache.weights[i];
        if cache.hidden[i].is_empty() {
            continue;
        }
        d_weights[i] = dot(d_context, &keys[i]);
        axpy(w, d_context, &mut d_keys[i]);
    }
    let d_scores = softmax_backward(&cache.weights, &d_weights);
    let a = p.attn_dim();
    let mut dq = vec![0.0; a];
    let mut dpre = vec![0.0; a];
    for i in 0..n {
        let u = &cache.hidden[i];
        if u.is_empty() || d_scores[i] == 0.0 {
            continue;
        }
        let de = d_scores[i];
        axpy(de, u, grads.v.data_mut());
        for j in 0..a {
            dpre[j] = de * p.v.data()[j] * (1.0 - u[j] * u[j]);
        }
        axpy(1.0, &dpre, &mut dq);
        axpy(1.0, &dpre, grads.b.data_mut());
        outer_acc(&mut grads.w_k, &dpre, &keys[i]);
        matvec_t_acc(&p.w_k, &dpre, &mut d_keys[i]);
    }
    outer_acc(&mut grads.w_q, &dq, &cache.query);
    matvec_t_acc(&p.w_q, &dq, d_query);
}
