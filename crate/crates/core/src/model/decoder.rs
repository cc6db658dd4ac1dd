use super::params::{GateParams, ModelParams};
use crate::error::{Error, Result};
use crate::nn::attention::{attend_backward, attend_forward, project_keys, AttendCache};
use crate::nn::gru::{gru_backward, gru_forward, GruCache};
use crate::nn::softmax::softmax;
use crate::nn::tensor::{axpy, matvec_acc, matvec_t_acc, outer_acc, sigmoid};
use crate::nn::AttentionParams;

/// How the decoder consumes the two attention contexts. `SentenceOnly` runs
/// a gated-layout model on the sentence context alone; it is the reference
/// the saturated gate is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextFusion {
    Concat,
    Gated,
    SentenceOnly,
}

/// One decoder transition.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderStep {
    pub state: Vec<f64>,
    pub context: Vec<f64>,
    /// Gate activations, gated fusion only.
    pub gate: Option<Vec<f64>>,
    pub probs: Vec<f64>,
    pub sentence_weights: Vec<f64>,
    pub fact_weights: Vec<f64>,
}

/// Attention keys of one encoded sequence with their query-independent
/// projections.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Keys {
    pub rows: Vec<Vec<f64>>,
    pub projected: Vec<Vec<f64>>,
    pub mask: Vec<f64>,
}

impl Keys {
    pub fn new(p: &AttentionParams, rows: Vec<Vec<f64>>, mask: Vec<f64>) -> Self {
        Keys {
            projected: project_keys(p, &rows),
            rows,
            mask,
        }
    }
}

/// Fuses the sentence and fact contexts. Returns the fused context and, in
/// gated mode, the gate.
pub fn combine_contexts(
    cx: &[f64],
    cr: &[f64],
    fusion: ContextFusion,
    gate: Option<&GateParams>,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if cx.len() != cr.len() {
        return Err(Error::shape("fact context", &[cx.len()], &[cr.len()]));
    }
    match fusion {
        ContextFusion::Concat => Ok(([cx, cr].concat(), None)),
        ContextFusion::SentenceOnly => Ok((cx.to_vec(), None)),
        ContextFusion::Gated => {
            let gp = gate.ok_or_else(|| Error::Invalid("gated fusion without gate parameters".into()))?;
            if gp.w.cols() != 2 * cx.len() || gp.w.rows() != cx.len() {
                return Err(Error::shape("gate weights", &[cx.len(), 2 * cx.len()], gp.w.shape()));
            }
            let g = gate_forward(gp, cx, cr);
            let c = (0..cx.len()).map(|i| g[i] * cx[i] + (1.0 - g[i]) * cr[i]).collect();
            Ok((c, Some(g)))
        }
    }
}

fn gate_forward(gp: &GateParams, cx: &[f64], cr: &[f64]) -> Vec<f64> {
    let both = [cx, cr].concat();
    let mut a = gp.b.data().to_vec();
    matvec_acc(&gp.w, &both, &mut a);
    a.into_iter().map(sigmoid).collect()
}

#[derive(Clone, Debug)]
pub(crate) struct StepCache {
    att_x: AttendCache,
    att_r: AttendCache,
    cx: Vec<f64>,
    cr: Vec<f64>,
    gate: Option<Vec<f64>>,
    context: Vec<f64>,
    gru: GruCache,
    state: Vec<f64>,
    readout: Vec<f64>,
    out_mask: Option<Vec<f64>>,
}

/// Attention from `s_prev`, fusion, GRU update and output distribution.
/// `out_mask` is a dropout mask on the readout vector.
pub(crate) fn step_forward(
    p: &ModelParams,
    fusion: ContextFusion,
    keys_x: &Keys,
    keys_r: &Keys,
    y_prev: usize,
    s_prev: &[f64],
    out_mask: Option<&[f64]>,
) -> (DecoderStep, StepCache) {
    let key_dim = p.attn_sent.w_k.cols();
    let (cx, att_x) = attend_forward(&p.attn_sent, s_prev, &keys_x.rows, &keys_x.projected, &keys_x.mask, key_dim);
    let (cr, att_r) = attend_forward(&p.attn_fact, s_prev, &keys_r.rows, &keys_r.projected, &keys_r.mask, key_dim);
    let (context, gate) = match fusion {
        ContextFusion::Concat => ([&cx[..], &cr[..]].concat(), None),
        ContextFusion::SentenceOnly => (cx.clone(), None),
        ContextFusion::Gated => {
            let g = gate_forward(p.gate.as_ref().expect("gated layout"), &cx, &cr);
            let c = (0..cx.len()).map(|i| g[i] * cx[i] + (1.0 - g[i]) * cr[i]).collect();
            (c, Some(g))
        }
    };

    let emb = p.tgt_embed.row(y_prev);
    let input = [emb, &context[..]].concat();
    let (state, gru) = gru_forward(&input, s_prev, &p.decoder);

    let mut readout = vec![0.0; p.out_word.rows()];
    matvec_acc(&p.out_word, emb, &mut readout);
    matvec_acc(&p.out_ctx, &context, &mut readout);
    matvec_acc(&p.out_state, &state, &mut readout);
    if let Some(m) = out_mask {
        readout.iter_mut().zip(m).for_each(|(o, k)| *o *= k);
    }
    let mut logits = vec![0.0; p.out_proj.rows()];
    matvec_acc(&p.out_proj, &readout, &mut logits);
    let probs = softmax(&logits);

    let step = DecoderStep {
        state: state.clone(),
        context: context.clone(),
        gate: gate.clone(),
        probs,
        sentence_weights: att_x.weights.clone(),
        fact_weights: att_r.weights.clone(),
    };
    let cache = StepCache {
        att_x,
        att_r,
        cx,
        cr,
        gate,
        context,
        gru,
        state,
        readout,
        out_mask: out_mask.map(<[f64]>::to_vec),
    };
    (step, cache)
}

/// Backward of [`step_forward`]. `d_logits` is the gradient on the output
/// logits and `d_state` the gradient flowing into `s_t` from later steps.
/// Returns the gradient on `s_prev`; key gradients accumulate into
/// `d_keys_x` / `d_keys_r`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn step_backward(
    p: &ModelParams,
    fusion: ContextFusion,
    keys_x: &Keys,
    keys_r: &Keys,
    cache: &StepCache,
    y_prev: usize,
    d_logits: &[f64],
    d_state: &[f64],
    g: &mut ModelParams,
    d_keys_x: &mut [Vec<f64>],
    d_keys_r: &mut [Vec<f64>],
) -> Vec<f64> {
    let e = p.tgt_embed.cols();
    let emb = p.tgt_embed.row(y_prev);

    outer_acc(&mut g.out_proj, d_logits, &cache.readout);
    let mut d_readout = vec![0.0; p.out_proj.cols()];
    matvec_t_acc(&p.out_proj, d_logits, &mut d_readout);
    if let Some(m) = &cache.out_mask {
        d_readout.iter_mut().zip(m).for_each(|(d, k)| *d *= k);
    }

    outer_acc(&mut g.out_word, &d_readout, emb);
    outer_acc(&mut g.out_ctx, &d_readout, &cache.context);
    outer_acc(&mut g.out_state, &d_readout, &cache.state);
    let mut d_emb = vec![0.0; e];
    matvec_t_acc(&p.out_word, &d_readout, &mut d_emb);
    let mut d_ctx = vec![0.0; cache.context.len()];
    matvec_t_acc(&p.out_ctx, &d_readout, &mut d_ctx);
    let mut d_s = d_state.to_vec();
    matvec_t_acc(&p.out_state, &d_readout, &mut d_s);

    let mut d_input = vec![0.0; p.decoder.input_dim()];
    let mut d_prev = vec![0.0; d_s.len()];
    gru_backward(&p.decoder, &cache.gru, &d_s, &mut g.decoder, &mut d_input, &mut d_prev);
    axpy(1.0, &d_input[..e], &mut d_emb);
    axpy(1.0, &d_input[e..], &mut d_ctx);
    axpy(1.0, &d_emb, g.tgt_embed.row_mut(y_prev));

    let half = cache.cx.len();
    let (d_cx, d_cr) = match fusion {
        ContextFusion::Concat => (d_ctx[..half].to_vec(), d_ctx[half..].to_vec()),
        ContextFusion::SentenceOnly => (d_ctx, vec![0.0; half]),
        ContextFusion::Gated => {
            let gate = cache.gate.as_ref().expect("gated cache");
            let gp = p.gate.as_ref().expect("gated layout");
            let gg = g.gate.as_mut().expect("gated layout");
            let mut d_cx = vec![0.0; half];
            let mut d_cr = vec![0.0; half];
            let mut d_a = vec![0.0; half];
            for i in 0..half {
                d_cx[i] = gate[i] * d_ctx[i];
                d_cr[i] = (1.0 - gate[i]) * d_ctx[i];
                d_a[i] = d_ctx[i] * (cache.cx[i] - cache.cr[i]) * gate[i] * (1.0 - gate[i]);
            }
            let both = [&cache.cx[..], &cache.cr[..]].concat();
            outer_acc(&mut gg.w, &d_a, &both);
            axpy(1.0, &d_a, gg.b.data_mut());
            let mut d_both = vec![0.0; 2 * half];
            matvec_t_acc(&gp.w, &d_a, &mut d_both);
            axpy(1.0, &d_both[..half], &mut d_cx);
            axpy(1.0, &d_both[half..], &mut d_cr);
            (d_cx, d_cr)
        }
    };

    attend_backward(&p.attn_sent, &cache.att_x, &keys_x.rows, &d_cx, &mut g.attn_sent, d_keys_x, &mut d_prev);
    attend_backward(&p.attn_fact, &cache.att_r, &keys_r.rows, &d_cr, &mut g.attn_fact, d_keys_r, &mut d_prev);
    d_prev
}
