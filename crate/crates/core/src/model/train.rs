use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::loss::{batch_loss_and_grad, evaluate};
use super::network::Model;
use super::schedule::LrSchedule;
use crate::corpus::{batch_encoded, EncodedPair};
use crate::error::{Error, Result};
use crate::nn::{adam_step, clip_gradients, AdamConfig, AdamState, SeededRng};

/// One line of the training log, written after every validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRecord {
    pub step: usize,
    pub dev_cost: f64,
    pub lr: f64,
    pub gate_mean: Option<f64>,
    pub gate_std: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: Vec<TrainLogRecord>,
    pub steps: usize,
    pub lr: f64,
}

fn diverged(step: usize, e: Error) -> Error {
    match e {
        Error::NonFinite(what) => Error::Diverged {
            step,
            message: format!("non-finite {what}"),
        },
        other => other,
    }
}

fn validate(model: &Model, dev: &[EncodedPair], step: usize, lr: f64) -> Result<TrainLogRecord> {
    let totals = evaluate(model, dev).map_err(|e| diverged(step, e))?;
    let dev_cost = totals.cost();
    if !dev_cost.is_finite() {
        return Err(Error::Diverged {
            step,
            message: "non-finite development cost".into(),
        });
    }
    let gate = totals.gate_stats();
    Ok(TrainLogRecord {
        step,
        dev_cost,
        lr,
        gate_mean: gate.map(|g| g.0),
        gate_std: gate.map(|g| g.1),
    })
}

/// Mini-batch Adam with clipping. The development set is scored every
/// `validate_every` steps and once more at the end (unless the last step was
/// a validation step); each score feeds the learning-rate schedule and is
/// passed to `on_record`.
pub fn train(
    mut model: Model,
    train_set: &[EncodedPair],
    dev_set: &[EncodedPair],
    cfg: &TrainConfig,
    mut on_record: impl FnMut(&TrainLogRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set".into()));
    }
    if dev_set.is_empty() {
        return Err(Error::Empty("development set".into()));
    }
    let mut rng = SeededRng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(&model.params, AdamConfig::default());
    let mut schedule = LrSchedule::new(cfg.lr, cfg.patience);
    let mut log = Vec::new();
    let mut step = 0usize;
    let mut last_validated = 0usize;
    let done = |step: usize| cfg.max_steps.is_some_and(|m| step >= m);

    let mut record = |model: &Model, step: usize, schedule: &mut LrSchedule| -> Result<()> {
        let r = validate(model, dev_set, step, schedule.lr())?;
        schedule.observe(r.dev_cost);
        on_record(&r);
        log.push(r);
        Ok(())
    };

    'epochs: for _ in 0..cfg.max_epochs {
        if done(step) {
            break;
        }
        for batch in batch_encoded(train_set, cfg.batch_size, Some(rng.gen()))? {
            let pairs: Vec<EncodedPair> = batch.pairs().collect();
            let (_, mut grads) = batch_loss_and_grad(&model, &pairs, Some(&mut rng)).map_err(|e| diverged(step + 1, e))?;
            clip_gradients(&mut grads, cfg.clip);
            adam_step(&mut model.params, &grads, &mut adam, schedule.lr()).map_err(|e| diverged(step + 1, e))?;
            step += 1;
            if step % cfg.validate_every == 0 {
                record(&model, step, &mut schedule)?;
                last_validated = step;
            }
            if done(step) {
                break 'epochs;
            }
        }
    }
    if step > 0 && last_validated != step {
        record(&model, step, &mut schedule)?;
    }
    Ok(TrainOutcome {
        model,
        log,
        steps: step,
        lr: schedule.lr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::vocab::{BOS, EOS};
    use crate::model::{FusionMode, ModelConfig};

    fn pairs() -> Vec<EncodedPair> {
        (0..6)
            .map(|i| EncodedPair {
                source: vec![5 + i % 3, 6],
                facts: vec![7],
                target: vec![BOS, 5 + i % 3, EOS],
            })
            .collect()
    }

    fn model(seed: u64) -> Model {
        let cfg = ModelConfig::with_dims(4, 4, 9, 9, FusionMode::Gated);
        Model::init(cfg, &mut SeededRng::seed_from_u64(seed)).unwrap()
    }

    fn cfg() -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            validate_every: 2,
            max_epochs: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_lr_leaves_parameters() {
        let m = model(1);
        let c = TrainConfig { lr: 0.0, ..cfg() };
        let out = train(m.clone(), &pairs(), &pairs(), &c, |_| {}).unwrap();
        assert_eq!(out.model.params, m.params);
        assert_eq!(out.steps, 6);
    }

    #[test]
    fn logs_each_validation_and_is_reproducible() {
        let run = || train(model(2), &pairs(), &pairs(), &cfg(), |_| {}).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.log.iter().map(|r| r.step).collect::<Vec<_>>(), vec![2, 4, 6]);
        assert_eq!(a.log, b.log);
        assert_eq!(a.model, b.model);
        assert!(a.log.iter().all(|r| r.gate_mean.is_some()));
    }

    #[test]
    fn step_cap_and_final_validation() {
        let c = TrainConfig {
            max_steps: Some(3),
            ..cfg()
        };
        let out = train(model(3), &pairs(), &pairs(), &c, |_| {}).unwrap();
        assert_eq!(out.steps, 3);
        assert_eq!(out.log.last().unwrap().step, 3);
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(train(model(0), &[], &pairs(), &cfg(), |_| {}).is_err());
        assert!(train(model(0), &pairs(), &[], &cfg(), |_| {}).is_err());
    }

    #[test]
    fn non_finite_parameters_abort_with_diagnostic() {
        let mut m = model(4);
        m.params.out_proj.data_mut()[0] = f64::NAN;
        let err = train(m, &pairs(), &pairs(), &cfg(), |_| {}).unwrap_err();
        assert!(matches!(err, Error::Diverged { step: 1, .. }), "{err}");
    }
}
