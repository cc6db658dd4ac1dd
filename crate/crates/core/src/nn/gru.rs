use rand::Rng;

use super::init::glorot_uniform;
use super::tensor::{check_len, matvec_acc, matvec_t_acc, outer_acc, sigmoid, Tensor};
use crate::error::Result;
use crate::impl_named_tensors;

/// Gated recurrent unit parameters. Input matrices are `hidden × input`,
/// recurrent matrices `hidden × hidden`.
#[derive(Clone, Debug, PartialEq)]
pub struct GruParams {
    pub w_z: Tensor,
    pub w_r: Tensor,
    pub w_h: Tensor,
    pub u_z: Tensor,
    pub u_r: Tensor,
    pub u_h: Tensor,
    pub b_z: Tensor,
    pub b_r: Tensor,
    pub b_h: Tensor,
}

impl_named_tensors!(GruParams { w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h });

impl GruParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruParams {
            w_z: Tensor::zeros(&[hidden, input]),
            w_r: Tensor::zeros(&[hidden, input]),
            w_h: Tensor::zeros(&[hidden, input]),
            u_z: Tensor::zeros(&[hidden, hidden]),
            u_r: Tensor::zeros(&[hidden, hidden]),
            u_h: Tensor::zeros(&[hidden, hidden]),
            b_z: Tensor::zeros(&[hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        GruParams {
            w_z: glorot_uniform(hidden, input, rng),
            w_r: glorot_uniform(hidden, input, rng),
            w_h: glorot_uniform(hidden, input, rng),
            u_z: glorot_uniform(hidden, hidden, rng),
            u_r: glorot_uniform(hidden, hidden, rng),
            u_h: glorot_uniform(hidden, hidden, rng),
            b_z: Tensor::zeros(&[hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.rows()
    }
}

/// Intermediate values of one cell application, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct GruCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub rh: Vec<f64>,
    pub n: Vec<f64>,
}

/// One GRU step:
///
/// ```text
/// z = σ(W_z x + U_z h + b_z)
/// r = σ(W_r x + U_r h + b_r)
/// ñ = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 - z) ⊙ h + z ⊙ ñ
/// ```
pub fn gru_cell(x: &[f64], h_prev: &[f64], p: &GruParams) -> Result<Vec<f64>> {
    check_len("gru_cell input", p.input_dim(), x.len())?;
    check_len("gru_cell hidden", p.hidden_dim(), h_prev.len())?;
    Ok(gru_forward(x, h_prev, p).0)
}

pub fn gru_forward(x: &[f64], h_prev: &[f64], p: &GruParams) -> (Vec<f64>, GruCache) {
    let hidden = p.hidden_dim();
    let mut z = p.b_z.data().to_vec();
    matvec_acc(&p.w_z, x, &mut z);
    matvec_acc(&p.u_z, h_prev, &mut z);
    z.iter_mut().for_each(|v| *v = sigmoid(*v));

    let mut r = p.b_r.data().to_vec();
    matvec_acc(&p.w_r, x, &mut r);
    matvec_acc(&p.u_r, h_prev, &mut r);
    r.iter_mut().for_each(|v| *v = sigmoid(*v));

    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let mut n = p.b_h.data().to_vec();
    matvec_acc(&p.w_h, x, &mut n);
    matvec_acc(&p.u_h, &rh, &mut n);
    n.iter_mut().for_each(|v| *v = v.tanh());

    let h: Vec<f64> = (0..hidden)
        .map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * n[i])
        .collect();
    let cache = GruCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        rh,
        n,
    };
    (h, cache)
}

/// Accumulates parameter gradients into `grads` and input/state gradients
/// into `dx` and `dh_prev`.
pub fn gru_backward(
    p: &GruParams,
    cache: &GruCache,
    dh: &[f64],
    grads: &mut GruParams,
    dx: &mut [f64],
    dh_prev: &mut [f64],
) {
    let hidden = p.hidden_dim();
    let GruCache {
        x,
        h_prev,
        z,
        r,
        rh,
        n,
    } = cache;

    let mut dz = vec![0.0; hidden];
    let mut dan = vec![0.0; hidden];
    for i in 0..hidden {
        dz[i] = dh[i] * (n[i] - h_prev[i]) * z[i] * (1.0 - z[i]);
        dan[i] = dh[i] * z[i] * (1.0 - n[i] * n[i]);
        dh_prev[i] += dh[i] * (1.0 - z[i]);
    }

    outer_acc(&mut grads.w_h, &dan, x);
    outer_acc(&mut grads.u_h, &dan, rh);
    add(grads.b_h.data_mut(), &dan);
    matvec_t_acc(&p.w_h, &dan, dx);
    let mut drh = vec![0.0; hidden];
    matvec_t_acc(&p.u_h, &dan, &mut drh);

    let mut dar = vec![0.0; hidden];
    for i in 0..hidden {
        dar[i] = drh[i] * h_prev[i] * r[i] * (1.0 - r[i]);
        dh_prev[i] += drh[i] * r[i];
    }
    outer_acc(&mut grads.w_r, &dar, x);
    outer_acc(&mut grads.u_r, &dar, h_prev);
    add(grads.b_r.data_mut(), &dar);
    matvec_t_acc(&p.w_r, &dar, dx);
    matvec_t_acc(&p.u_r, &dar, dh_prev);

    outer_acc(&mut grads.w_z, &dz, x);
    outer_acc(&mut grads.u_z, &dz, h_prev);
    add(grads.b_z.data_mut(), &dz);
    matvec_t_acc(&p.w_z, &dz, dx);
    matvec_t_acc(&p.u_z, &dz, dh_prev);
}

fn add(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
