use rand::{Rng, SeedableRng};

use super::config::{FusionMode, ModelConfig};
use super::loss::LossObjective;
use super::network::Model;
use crate::corpus::vocab::{BOS, EOS, SEP, SPECIALS};
use crate::corpus::EncodedPair;
use crate::error::Result;
use crate::nn::{finite_diff_check, GradCheckReport, NamedTensors, SeededRng};

/// Gain applied to the initial weights of the check model, so that no
/// gradient component sits near the finite-difference roundoff floor.
pub const CHECK_GAIN: f64 = 2.0;

pub const CHECK_EPSILON: f64 = 1e-5;

/// The tiny check model: embed 8, hidden 8, vocabularies of 20, initial
/// weights scaled by `CHECK_GAIN`.
pub fn tiny_check_model(fusion: FusionMode, seed: u64) -> Result<Model> {
    let cfg = ModelConfig::with_dims(8, 8, 20, 20, fusion);
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut model = Model::init(cfg, &mut rng)?;
    for (_, t) in model.params.named_mut() {
        t.scale(CHECK_GAIN);
    }
    Ok(model)
}

/// One random pair: a 5-token sentence, two 3-token facts and a 3-token
/// summary.
pub fn tiny_check_pair(seed: u64) -> EncodedPair {
    let mut rng = SeededRng::seed_from_u64(seed ^ 0x5eed);
    let mut word = || rng.gen_range(SPECIALS.len()..20);
    let source = (0..5).map(|_| word()).collect();
    let mut facts: Vec<usize> = (0..3).map(|_| word()).collect();
    facts.push(SEP);
    facts.extend((0..3).map(|_| word()));
    let mut target = vec![BOS];
    target.extend((0..3).map(|_| word()));
    target.push(EOS);
    EncodedPair { source, facts, target }
}

/// Finite-difference check of the per-token loss over every parameter of
/// the tiny model, dropout off.
pub fn tiny_gradcheck(fusion: FusionMode, seed: u64) -> Result<GradCheckReport> {
    let model = tiny_check_model(fusion, seed)?;
    let pairs = [tiny_check_pair(seed)];
    let params = model.params.clone();
    let mut objective = LossObjective {
        model,
        pairs: &pairs,
        dropout_seed: None,
    };
    finite_diff_check(&mut objective, &params, CHECK_EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        let p = tiny_check_pair(3);
        assert_eq!(p.source.len(), 5);
        assert_eq!(p.facts.len(), 7);
        assert_eq!(p.facts[3], SEP);
        assert_eq!(p.target.len(), 5);
        let m = tiny_check_model(FusionMode::Gated, 3).unwrap();
        assert_eq!(m.config.embed_dim, 8);
        assert_eq!(m.config.target_vocab, 20);
    }

    #[test]
    fn seed_zero_passes_both_modes() {
        for fusion in [FusionMode::Concat, FusionMode::Gated] {
            let r = tiny_gradcheck(fusion, 0).unwrap();
            assert!(r.max_rel_error <= 1e-4, "{fusion}: {r:?}");
        }
    }
}
