use serde::{Deserialize, Serialize};

use crate::corpus::EncodedPair;
use crate::error::{Error, Result};
use crate::model::{evaluate, Model, TrainLogRecord};

/// `exp` of the dropout-free per-token NLL.
pub fn perplexity(model: &Model, pairs: &[EncodedPair]) -> Result<f64> {
    Ok(evaluate(model, pairs)?.cost().exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairGate {
    pub index: usize,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub mean: f64,
    pub std: f64,
    /// Gate components pooled into the statistics.
    pub components: usize,
    /// Pairs with the highest and lowest mean gate (most and least
    /// sentence-driven), `k` of each.
    pub top: Vec<PairGate>,
    pub bottom: Vec<PairGate>,
}

/// Teacher-forced gate statistics over `pairs`.
pub fn gate_report(model: &Model, pairs: &[EncodedPair], k: usize) -> Result<GateReport> {
    if model.params.gate.is_none() {
        return Err(Error::Unsupported("gate report on a model without a context gate".into()));
    }
    let totals = evaluate(model, pairs)?;
    let (mean, std) = totals
        .gate_stats()
        .ok_or_else(|| Error::Unsupported("no gate activations recorded".into()))?;
    let mut ranked: Vec<PairGate> = totals
        .pair_gate_means
        .iter()
        .enumerate()
        .map(|(index, mean)| PairGate { index, mean: *mean })
        .collect();
    ranked.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.index.cmp(&b.index)));
    let top = ranked.iter().take(k).cloned().collect();
    let bottom = ranked.iter().rev().take(k).cloned().collect();
    Ok(GateReport {
        mean,
        std,
        components: totals.gate_count,
        top,
        bottom,
    })
}

/// `(step, mean, std)` per validation of a gated training run.
pub fn gate_trajectory(log: &[TrainLogRecord]) -> Vec<(usize, f64, f64)> {
    log.iter()
        .filter_map(|r| Some((r.step, r.gate_mean?, r.gate_std?)))
        .collect()
}
