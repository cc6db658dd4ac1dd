use std::cmp::Ordering;

use super::step::{ModelStepper, StepModel};
use crate::corpus::vocab::{BOS, EOS, PAD, SEP};
use crate::error::{Error, Result};
use crate::model::Model;

/// A (partial) output sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis<S = Vec<f64>> {
    /// Emitted ids after BOS; ends with the EOS id when terminated by it.
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub state: S,
    pub finished: bool,
    /// Mean gate activation per emitted token (gated models only).
    pub gate_trace: Vec<f64>,
}

impl<S> Hypothesis<S> {
    pub fn ends_with(&self, id: usize) -> bool {
        self.tokens.last() == Some(&id)
    }

    /// The summary words: tokens without the terminating EOS.
    pub fn words(&self, eos: usize) -> &[usize] {
        match self.tokens.split_last() {
            Some((last, rest)) if *last == eos => rest,
            _ => &self.tokens,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOptions {
    pub beam: usize,
    /// Maximum number of emitted tokens, the terminating EOS included.
    pub max_len: usize,
    pub bos: usize,
    pub eos: usize,
    /// Ids never emitted.
    pub banned: Vec<usize>,
}

impl DecodeOptions {
    /// Special-token conventions of the corpus vocabularies.
    pub fn new(beam: usize, max_len: usize) -> Self {
        DecodeOptions {
            beam,
            max_len,
            bos: BOS,
            eos: EOS,
            banned: vec![PAD, BOS, SEP],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.beam == 0 {
            return Err(Error::Invalid("beam must be at least 1".into()));
        }
        if self.max_len == 0 {
            return Err(Error::Invalid("max_len must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self::new(6, 20)
    }
}

/// Higher score first; ties go to the lower parent index, then the lower
/// token id.
fn rank(a: &(f64, usize, usize), b: &(f64, usize, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Length-capped beam search ranked by raw accumulated log-probability.
///
/// Every live hypothesis is expanded over the vocabulary and the best
/// `beam` extensions survive. Extensions ending in EOS, or reaching
/// `max_len` tokens, retire to a finished pool. The search stops once no
/// live hypothesis can beat the best finished one (scores only decrease)
/// or nothing is live; the best finished hypothesis is returned.
pub fn beam_search_with<M: StepModel>(model: &M, opts: &DecodeOptions) -> Result<Hypothesis<M::State>> {
    opts.validate()?;
    let vocab = model.vocab_size();
    let mut live = vec![Hypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: model.initial_state(),
        finished: false,
        gate_trace: Vec::new(),
    }];
    let mut pool: Vec<Hypothesis<M::State>> = Vec::new();

    while !live.is_empty() {
        let mut expanded = Vec::with_capacity(live.len());
        let mut candidates = Vec::with_capacity(live.len() * vocab);
        for (pi, h) in live.iter().enumerate() {
            let prev = h.tokens.last().copied().unwrap_or(opts.bos);
            let (log_probs, state, gate) = model.step(&h.state, prev)?;
            for (tok, lp) in log_probs.iter().enumerate() {
                if !opts.banned.contains(&tok) && !lp.is_nan() {
                    candidates.push((h.log_prob + lp, pi, tok));
                }
            }
            expanded.push((state, gate));
        }
        candidates.sort_by(rank);
        candidates.truncate(opts.beam);

        let mut next = Vec::with_capacity(candidates.len());
        for (score, pi, tok) in candidates {
            let parent = &live[pi];
            let (state, gate) = &expanded[pi];
            let mut tokens = parent.tokens.clone();
            tokens.push(tok);
            let mut gate_trace = parent.gate_trace.clone();
            gate_trace.extend(gate);
            let finished = tok == opts.eos || tokens.len() == opts.max_len;
            let h = Hypothesis {
                tokens,
                log_prob: score,
                state: state.clone(),
                finished,
                gate_trace,
            };
            if finished {
                pool.push(h);
            } else {
                next.push(h);
            }
        }
        live = next;

        let best_done = pool.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
        let best_live = live.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
        if !pool.is_empty() && best_done >= best_live {
            break;
        }
    }
    // first-retired wins ties
    pool.into_iter()
        .reduce(|best, h| if h.log_prob > best.log_prob { h } else { best })
        .ok_or_else(|| Error::Invalid("every token is banned".into()))
}

/// Per-step argmax, lowest id on ties; stops at EOS or `max_len` tokens.
pub fn greedy_with<M: StepModel>(model: &M, opts: &DecodeOptions) -> Result<Hypothesis<M::State>> {
    opts.validate()?;
    let mut h = Hypothesis {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: model.initial_state(),
        finished: false,
        gate_trace: Vec::new(),
    };
    while !h.finished {
        let prev = h.tokens.last().copied().unwrap_or(opts.bos);
        let (log_probs, state, gate) = model.step(&h.state, prev)?;
        let mut best: Option<(usize, f64)> = None;
        for (tok, lp) in log_probs.iter().enumerate() {
            if opts.banned.contains(&tok) || lp.is_nan() {
                continue;
            }
            if best.map_or(true, |(_, b)| *lp > b) {
                best = Some((tok, *lp));
            }
        }
        let (tok, lp) = best.ok_or_else(|| Error::Invalid("every token is banned".into()))?;
        h.tokens.push(tok);
        h.log_prob += lp;
        h.state = state;
        h.gate_trace.extend(gate);
        h.finished = tok == opts.eos || h.tokens.len() == opts.max_len;
    }
    Ok(h)
}

pub fn beam_search(model: &Model, source: &[usize], facts: &[usize], beam: usize, max_len: usize) -> Result<Hypothesis> {
    beam_search_with(&ModelStepper::new(model, source, facts)?, &DecodeOptions::new(beam, max_len))
}

pub fn greedy_decode(model: &Model, source: &[usize], facts: &[usize], max_len: usize) -> Result<Hypothesis> {
    greedy_with(&ModelStepper::new(model, source, facts)?, &DecodeOptions::new(1, max_len))
}
