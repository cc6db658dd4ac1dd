use rand::{Rng, SeedableRng};

use super::decoder::{step_backward, step_forward, Keys, StepCache};
use super::encoder::{bigru_backward, bigru_forward, BiGruTape};
use super::network::Model;
use super::params::ModelParams;
use crate::corpus::vocab::BOS;
use crate::corpus::{boundary_indicators, EncodedPair};
use crate::error::{Error, Result};
use crate::nn::dropout::dropout_mask;
use crate::nn::tensor::{axpy, matvec_acc, matvec_t_acc, outer_acc};
use crate::nn::{Objective, SeededRng};

/// Teacher-forced negative log-likelihood of one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairLoss {
    /// Summed over predicted positions.
    pub nll: f64,
    pub tokens: usize,
    /// Gate vector per decoder step (gated fusion only).
    pub gates: Vec<Vec<f64>>,
}

struct PairTape {
    sent: BiGruTape,
    fact: BiGruTape,
    sent_drop: Option<Vec<Vec<f64>>>,
    fact_drop: Option<Vec<Vec<f64>>>,
    keys_x: Keys,
    keys_r: Keys,
    summary: Vec<f64>,
    s0: Vec<f64>,
    steps: Vec<StepCache>,
    probs: Vec<Vec<f64>>,
}

fn check_pair(model: &Model, pair: &EncodedPair) -> Result<()> {
    let cfg = &model.config;
    if pair.source.is_empty() {
        return Err(Error::Empty("source sentence".into()));
    }
    if pair.target.len() < 2 || pair.target[0] != BOS {
        return Err(Error::Invalid("target must be BOS followed by at least one token".into()));
    }
    let bad_src = pair.source.iter().chain(&pair.facts).find(|id| **id >= cfg.source_vocab);
    let bad_tgt = pair.target.iter().find(|id| **id >= cfg.target_vocab);
    if let Some(id) = bad_src.or(bad_tgt) {
        return Err(Error::Invalid(format!("token id {id} outside vocabulary")));
    }
    Ok(())
}

fn drop_rows<R: Rng + ?Sized>(rows: &mut [Vec<f64>], p: f64, rng: &mut R) -> Vec<Vec<f64>> {
    rows.iter_mut()
        .map(|row| {
            let m = dropout_mask(row.len(), p, rng);
            row.iter_mut().zip(&m).for_each(|(x, k)| *x *= k);
            m
        })
        .collect()
}

/// Forward pass over one pair. With `rng`, dropout is active on encoder
/// output rows and on the readout vector.
fn forward_pair(model: &Model, pair: &EncodedPair, mut rng: Option<&mut SeededRng>) -> Result<(PairLoss, PairTape)> {
    check_pair(model, pair)?;
    let p = &model.params;
    let cfg = &model.config;
    let h = cfg.hidden_dim;

    let (mut sent_rows, sent) = bigru_forward(&p.src_embed, &p.sent_fwd, &p.sent_bwd, &pair.source, None);
    let gamma = boundary_indicators(&pair.facts);
    let (mut fact_rows, fact) = bigru_forward(p.fact_table(), &p.fact_fwd, &p.fact_bwd, &pair.facts, Some(&gamma));

    let n = sent_rows.len();
    let summary = [&sent_rows[n - 1][..h], &sent_rows[0][h..]].concat();
    let mut s0 = p.init_b.data().to_vec();
    matvec_acc(&p.init_w, &summary, &mut s0);
    s0.iter_mut().for_each(|x| *x = x.tanh());

    let dropout = cfg.dropout;
    let (sent_drop, fact_drop) = match rng.as_deref_mut() {
        Some(r) => (
            Some(drop_rows(&mut sent_rows, dropout, r)),
            Some(drop_rows(&mut fact_rows, dropout, r)),
        ),
        None => (None, None),
    };
    let keys_x = Keys::new(&p.attn_sent, sent_rows, vec![1.0; n]);
    let fact_mask = gamma.iter().map(|g| f64::from(*g)).collect();
    let keys_r = Keys::new(&p.attn_fact, fact_rows, fact_mask);

    let mut loss = PairLoss {
        nll: 0.0,
        tokens: pair.target.len() - 1,
        gates: Vec::new(),
    };
    let mut steps = Vec::with_capacity(loss.tokens);
    let mut probs = Vec::with_capacity(loss.tokens);
    let mut state = s0.clone();
    for t in 1..pair.target.len() {
        let mask = rng.as_deref_mut().map(|r| dropout_mask(cfg.readout_dim, dropout, r));
        let (step, cache) = step_forward(p, model.fusion(), &keys_x, &keys_r, pair.target[t - 1], &state, mask.as_deref());
        loss.nll -= step.probs[pair.target[t]].ln();
        if let Some(g) = step.gate {
            loss.gates.push(g);
        }
        state = step.state;
        probs.push(step.probs);
        steps.push(cache);
    }
    if !loss.nll.is_finite() {
        return Err(Error::NonFinite("pair loss".into()));
    }
    let tape = PairTape {
        sent,
        fact,
        sent_drop,
        fact_drop,
        keys_x,
        keys_r,
        summary,
        s0,
        steps,
        probs,
    };
    Ok((loss, tape))
}

/// Accumulates `scale · ∂nll/∂θ` for one pair into `g`.
fn backward_pair(model: &Model, pair: &EncodedPair, tape: &PairTape, scale: f64, g: &mut ModelParams) {
    let p = &model.params;
    let h = model.config.hidden_dim;
    let mut d_keys_x = vec![vec![0.0; 2 * h]; tape.keys_x.rows.len()];
    let mut d_keys_r = vec![vec![0.0; 2 * h]; tape.keys_r.rows.len()];

    let mut d_state = vec![0.0; h];
    for t in (1..pair.target.len()).rev() {
        let mut d_logits: Vec<f64> = tape.probs[t - 1].iter().map(|q| q * scale).collect();
        d_logits[pair.target[t]] -= scale;
        d_state = step_backward(
            p,
            model.fusion(),
            &tape.keys_x,
            &tape.keys_r,
            &tape.steps[t - 1],
            pair.target[t - 1],
            &d_logits,
            &d_state,
            g,
            &mut d_keys_x,
            &mut d_keys_r,
        );
    }

    // key gradients land on the post-dropout rows
    let undrop = |d: &mut [Vec<f64>], masks: &Option<Vec<Vec<f64>>>| {
        if let Some(ms) = masks {
            for (row, m) in d.iter_mut().zip(ms) {
                row.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
            }
        }
    };
    undrop(&mut d_keys_x, &tape.sent_drop);
    undrop(&mut d_keys_r, &tape.fact_drop);

    let d_pre: Vec<f64> = d_state
        .iter()
        .zip(&tape.s0)
        .map(|(d, s)| d * (1.0 - s * s))
        .collect();
    outer_acc(&mut g.init_w, &d_pre, &tape.summary);
    axpy(1.0, &d_pre, g.init_b.data_mut());
    let mut d_summary = vec![0.0; 2 * h];
    matvec_t_acc(&p.init_w, &d_pre, &mut d_summary);
    let n = d_keys_x.len();
    axpy(1.0, &d_summary[..h], &mut d_keys_x[n - 1][..h]);
    axpy(1.0, &d_summary[h..], &mut d_keys_x[0][h..]);

    bigru_backward(&p.sent_fwd, &p.sent_bwd, &tape.sent, &d_keys_x, &mut g.src_embed, &mut g.sent_fwd, &mut g.sent_bwd);
    let (table, gf, gb) = g.fact_encoder_mut();
    bigru_backward(&p.fact_fwd, &p.fact_bwd, &tape.fact, &d_keys_r, table, gf, gb);
}

/// Teacher-forced loss of one pair with dropout off.
pub fn pair_loss(model: &Model, pair: &EncodedPair) -> Result<PairLoss> {
    Ok(forward_pair(model, pair, None)?.0)
}

fn pair_rngs(rng: Option<&mut SeededRng>, n: usize) -> Vec<Option<SeededRng>> {
    match rng {
        Some(r) => (0..n).map(|_| Some(SeededRng::seed_from_u64(r.gen()))).collect(),
        None => vec![None; n],
    }
}

/// Per-token NLL over `pairs`: summed NLL divided by the number of
/// predicted target tokens. Dropout is active iff `rng` is given.
pub fn batch_loss(model: &Model, pairs: &[EncodedPair], rng: Option<&mut SeededRng>) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("batch".into()));
    }
    let (mut nll, mut tokens) = (0.0, 0usize);
    for (pair, mut r) in pairs.iter().zip(pair_rngs(rng, pairs.len())) {
        let (l, _) = forward_pair(model, pair, r.as_mut())?;
        nll += l.nll;
        tokens += l.tokens;
    }
    finite_loss(nll / tokens as f64)
}

/// Per-token loss and its gradient with respect to every parameter.
pub fn batch_loss_and_grad(
    model: &Model,
    pairs: &[EncodedPair],
    rng: Option<&mut SeededRng>,
) -> Result<(f64, ModelParams)> {
    if pairs.is_empty() {
        return Err(Error::Empty("batch".into()));
    }
    for pair in pairs {
        check_pair(model, pair)?;
    }
    let tokens: usize = pairs.iter().map(|p| p.target.len() - 1).sum();
    let scale = 1.0 / tokens as f64;
    let mut grads = model.params.zeros_like();
    let mut nll = 0.0;
    for (pair, mut r) in pairs.iter().zip(pair_rngs(rng, pairs.len())) {
        let (l, tape) = forward_pair(model, pair, r.as_mut())?;
        nll += l.nll;
        backward_pair(model, pair, &tape, scale, &mut grads);
    }
    Ok((finite_loss(nll * scale)?, grads))
}

fn finite_loss(j: f64) -> Result<f64> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite("batch loss".into()))
    }
}

/// Totals of a dropout-free pass over a dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalTotals {
    pub nll: f64,
    pub tokens: usize,
    pub gate_count: usize,
    /// Running mean and sum of squared deviations of all gate components.
    pub gate_mean: f64,
    pub gate_m2: f64,
    /// Mean gate activation per pair (empty in concat mode).
    pub pair_gate_means: Vec<f64>,
}

impl EvalTotals {
    pub fn cost(&self) -> f64 {
        self.nll / self.tokens as f64
    }

    /// Mean and population standard deviation of all gate components.
    pub fn gate_stats(&self) -> Option<(f64, f64)> {
        (self.gate_count > 0).then(|| (self.gate_mean, (self.gate_m2 / self.gate_count as f64).sqrt()))
    }

    fn push_gate(&mut self, g: f64) {
        self.gate_count += 1;
        let delta = g - self.gate_mean;
        self.gate_mean += delta / self.gate_count as f64;
        self.gate_m2 += delta * (g - self.gate_mean);
    }
}

pub fn evaluate(model: &Model, pairs: &[EncodedPair]) -> Result<EvalTotals> {
    if pairs.is_empty() {
        return Err(Error::Empty("dataset".into()));
    }
    let mut totals = EvalTotals::default();
    for pair in pairs {
        let l = pair_loss(model, pair)?;
        totals.nll += l.nll;
        totals.tokens += l.tokens;
        if !l.gates.is_empty() {
            let (mut s, mut c) = (0.0, 0usize);
            for g in l.gates.iter().flatten() {
                s += g;
                c += 1;
                totals.push_gate(*g);
            }
            totals.pair_gate_means.push(s / c as f64);
        }
    }
    Ok(totals)
}

/// The per-token loss as a function of the parameters, for gradient
/// checking. A fixed `dropout_seed` replays the same masks on every call.
pub struct LossObjective<'a> {
    pub model: Model,
    pub pairs: &'a [EncodedPair],
    pub dropout_seed: Option<u64>,
}

impl LossObjective<'_> {
    fn with_params(&mut self, params: &ModelParams) -> Option<SeededRng> {
        self.model.params.clone_from(params);
        self.dropout_seed.map(SeededRng::seed_from_u64)
    }
}

impl Objective<ModelParams> for LossObjective<'_> {
    fn loss(&mut self, params: &ModelParams) -> Result<f64> {
        let mut rng = self.with_params(params);
        batch_loss(&self.model, self.pairs, rng.as_mut())
    }

    fn loss_and_grad(&mut self, params: &ModelParams) -> Result<(f64, ModelParams)> {
        let mut rng = self.with_params(params);
        batch_loss_and_grad(&self.model, self.pairs, rng.as_mut())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::vocab::{EOS, SEP};
    use crate::model::{ContextFusion, FusionMode, ModelConfig};
    use crate::nn::finite_diff_compare;

    fn tiny(fusion: FusionMode, share: bool, seed: u64) -> Model {
        let mut cfg = ModelConfig::with_dims(4, 3, 12, 10, fusion);
        cfg.attn_dim = 5;
        cfg.readout_dim = 4;
        cfg.share_embeddings = share;
        Model::init(cfg, &mut SeededRng::seed_from_u64(seed)).unwrap()
    }

    fn pairs() -> Vec<EncodedPair> {
        vec![
            EncodedPair {
                source: vec![5, 6, 7, 8],
                facts: vec![9, 10, SEP, 11],
                target: vec![BOS, 5, 7, EOS],
            },
            EncodedPair {
                source: vec![11, 5],
                facts: vec![],
                target: vec![BOS, 9, EOS],
            },
        ]
    }

    // Component-wise: relative agreement, or an absolute gap at the level
    // of central-difference truncation and roundoff for near-zero entries.
    fn check(model: Model, dropout_seed: Option<u64>) {
        let data = pairs();
        let params = model.params.clone();
        let mut obj = LossObjective {
            model,
            pairs: &data,
            dropout_seed,
        };
        for c in finite_diff_compare(&mut obj, &params, 1e-5).unwrap() {
            let gap = (c.analytic - c.numeric).abs();
            assert!(gap <= 1e-4 * (c.analytic.abs() + c.numeric.abs()) + 1e-9, "{c:?}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for fusion in [FusionMode::Concat, FusionMode::Gated] {
            check(tiny(fusion, true, 1), None);
            check(tiny(fusion, false, 2), None);
            check(tiny(fusion, true, 3), Some(17));
        }
        check(tiny(FusionMode::Gated, true, 4).with_fusion(ContextFusion::SentenceOnly).unwrap(), None);
    }

    #[test]
    fn uniform_model_costs_ln_v() {
        let cfg = ModelConfig::with_dims(4, 3, 12, 10, FusionMode::Gated);
        let m = Model::new(cfg.clone(), ModelParams::zeros(&cfg)).unwrap();
        let j = batch_loss(&m, &pairs(), None).unwrap();
        assert!((j - 10f64.ln()).abs() < 1e-12);
        let t = evaluate(&m, &pairs()).unwrap();
        assert_eq!(t.tokens, 5);
        assert_eq!(t.gate_stats(), Some((0.5, 0.0)));
    }

    #[test]
    fn loss_normalizes_per_token() {
        let m = tiny(FusionMode::Concat, true, 5);
        let ps = pairs();
        let a = pair_loss(&m, &ps[0]).unwrap();
        let b = pair_loss(&m, &ps[1]).unwrap();
        let j = batch_loss(&m, &ps, None).unwrap();
        assert!((j - (a.nll + b.nll) / 5.0).abs() < 1e-12);
        assert!(a.gates.is_empty());
    }

    #[test]
    fn dropout_changes_loss_only_in_training() {
        let m = tiny(FusionMode::Gated, true, 6);
        let ps = pairs();
        let eval = batch_loss(&m, &ps, None).unwrap();
        assert_eq!(eval, batch_loss(&m, &ps, None).unwrap());
        let mut r = SeededRng::seed_from_u64(0);
        assert_ne!(eval, batch_loss(&m, &ps, Some(&mut r)).unwrap());
    }

    #[test]
    fn malformed_pairs_are_rejected() {
        let m = tiny(FusionMode::Gated, true, 7);
        let mut p = pairs()[0].clone();
        p.target = vec![BOS];
        assert!(batch_loss(&m, &[p.clone()], None).is_err());
        p.target = vec![BOS, 99];
        assert!(batch_loss(&m, &[p], None).is_err());
        assert!(batch_loss(&m, &[], None).is_err());
    }
}
