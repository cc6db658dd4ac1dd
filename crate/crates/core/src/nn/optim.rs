use super::params::NamedTensors;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one pair per parameter tensor in
/// [`NamedTensors`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new<P: NamedTensors>(params: &P, config: AdamConfig) -> Self {
        let zeros: Vec<Tensor> = params
            .named()
            .into_iter()
            .map(|(_, t)| Tensor::zeros_like(t))
            .collect();
        AdamState {
            step: 0,
            m: zeros.clone(),
            v: zeros,
            config,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step<P: NamedTensors>(params: &mut P, grads: &P, state: &mut AdamState, lr: f64) -> Result<()> {
    if !(lr >= 0.0) || !lr.is_finite() {
        return Err(Error::Invalid(format!("learning rate must be finite and non-negative, got {lr}")));
    }
    let grads = grads.named();
    let mut params = params.named_mut();
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::shape(
            "adam_step tensor count",
            &[params.len()],
            &[grads.len(), state.m.len()],
        ));
    }
    for ((name, g), (_, p)) in grads.iter().zip(params.iter()) {
        if g.shape() != p.shape() {
            return Err(Error::shape(format!("adam_step {name}"), p.shape(), g.shape()));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("gradient {name}")));
        }
    }

    state.step += 1;
    let AdamConfig { beta1, beta2, epsilon } = state.config;
    let correction1 = 1.0 - beta1.powi(state.step as i32);
    let correction2 = 1.0 - beta2.powi(state.step as i32);
    for (k, ((_, g), (_, p))) in grads.iter().zip(params.iter_mut()).enumerate() {
        let m = state.m[k].data_mut();
        let v = state.v[k].data_mut();
        for (j, (theta, grad)) in p.data_mut().iter_mut().zip(g.data()).enumerate() {
            m[j] = beta1 * m[j] + (1.0 - beta1) * grad;
            v[j] = beta2 * v[j] + (1.0 - beta2) * grad * grad;
            let m_hat = m[j] / correction1;
            let v_hat = v[j] / correction2;
            *theta -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}

/// Gradient clipping policy.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ClipMode {
    /// Componentwise clamp into `[lo, hi]`.
    Value { lo: f64, hi: f64 },
    /// Rescale the whole gradient when its global L2 norm exceeds `max_norm`.
    Norm { max_norm: f64 },
}

impl Default for ClipMode {
    fn default() -> Self {
        ClipMode::Value { lo: -5.0, hi: 5.0 }
    }
}

pub fn clip_values(t: &mut Tensor, lo: f64, hi: f64) {
    t.data_mut().iter_mut().for_each(|x| *x = x.max(lo).min(hi));
}

pub fn clip_gradients<P: NamedTensors>(grads: &mut P, mode: ClipMode) {
    match mode {
        ClipMode::Value { lo, hi } => {
            for (_, t) in grads.named_mut() {
                clip_values(t, lo, hi);
            }
        }
        ClipMode::Norm { max_norm } => {
            let norm = grads
                .named()
                .iter()
                .flat_map(|(_, t)| t.data().iter())
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            if norm > max_norm && norm > 0.0 {
                let factor = max_norm / norm;
                for (_, t) in grads.named_mut() {
                    t.scale(factor);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug, PartialEq)]
    struct Single {
        w: Tensor,
    }
    crate::impl_named_tensors!(Single { w });

    fn single(v: Vec<f64>) -> Single {
        Single { w: Tensor::vector(v) }
    }

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = single(vec![1.0, -2.0, 3.0]);
        let g = single(vec![0.0; 3]);
        let mut st = AdamState::new(&p, AdamConfig::default());
        adam_step(&mut p, &g, &mut st, 0.001).unwrap();
        assert_eq!(p, single(vec![1.0, -2.0, 3.0]));
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_about_lr() {
        for g in [0.37, -12.0, 1e-3] {
            let mut p = single(vec![0.0]);
            let mut st = AdamState::new(&p, AdamConfig::default());
            adam_step(&mut p, &single(vec![g]), &mut st, 0.001).unwrap();
            // m̂ = g, v̂ = g², so the step is lr·g/(|g| + ε)
            let expected = -0.001 * g / (g.abs() + 1e-8);
            assert!((p.w.data()[0] - expected).abs() < 1e-15);
            assert!((p.w.data()[0].abs() - 0.001).abs() < 1e-6);
        }
    }

    #[test]
    fn two_steps_match_hand_recurrence() {
        let (b1, b2, eps, lr, g) = (0.9f64, 0.999f64, 1e-8, 0.01, 0.5f64);
        let mut theta = 1.0;
        let (mut m, mut v) = (0.0, 0.0);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            theta -= lr * mh / (vh.sqrt() + eps);
        }
        let mut p = single(vec![1.0]);
        let mut st = AdamState::new(&p, AdamConfig::default());
        for _ in 0..2 {
            adam_step(&mut p, &single(vec![g]), &mut st, lr).unwrap();
        }
        assert_eq!(p.w.data()[0], theta);
        assert_eq!(st.step, 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = single(vec![1.0]);
        let mut st = AdamState::new(&p, AdamConfig::default());
        assert!(matches!(
            adam_step(&mut p, &single(vec![f64::NAN]), &mut st, 0.1),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            adam_step(&mut p, &single(vec![1.0, 2.0]), &mut st, 0.1),
            Err(Error::Shape { .. })
        ));
        assert!(adam_step(&mut p, &single(vec![1.0]), &mut st, -0.1).is_err());
        assert_eq!(st.step, 0);
    }

    #[test]
    fn value_clipping_at_bounds() {
        let mut g = single(vec![7.0, -9.0, 3.0, -5.0, 5.0]);
        clip_gradients(&mut g, ClipMode::default());
        assert_eq!(g.w.data(), &[5.0, -5.0, 3.0, -5.0, 5.0]);

        let mut empty = single(vec![]);
        clip_gradients(&mut empty, ClipMode::default());
        assert!(empty.w.is_empty());
    }

    #[test]
    fn norm_clipping_rescales() {
        let mut g = single(vec![3.0, 4.0]);
        clip_gradients(&mut g, ClipMode::Norm { max_norm: 1.0 });
        assert!((g.w.data()[0] - 0.6).abs() < 1e-15);
        assert!((g.w.data()[1] - 0.8).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn zero_lr_changes_nothing(
            start in prop::collection::vec(-10.0f64..10.0, 1..8),
            steps in 1usize..5,
            seed in any::<u64>(),
        ) {
            let mut p = single(start.clone());
            let mut st = AdamState::new(&p, AdamConfig::default());
            let mut x = seed;
            for _ in 0..steps {
                let g: Vec<f64> = start.iter().map(|_| {
                    x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                }).collect();
                adam_step(&mut p, &single(g), &mut st, 0.0).unwrap();
            }
            prop_assert_eq!(p.w.data(), &start[..]);
        }

        #[test]
        fn value_clipping_is_idempotent_and_monotone(
            a in prop::collection::vec(-100.0f64..100.0, 0..16),
            d in prop::collection::vec(0.0f64..10.0, 16),
        ) {
            let mut once = single(a.clone());
            clip_gradients(&mut once, ClipMode::default());
            let mut twice = once.clone();
            clip_gradients(&mut twice, ClipMode::default());
            prop_assert_eq!(&once, &twice);

            let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
            let mut cb = single(b);
            clip_gradients(&mut cb, ClipMode::default());
            for (x, y) in once.w.data().iter().zip(cb.w.data()) {
                prop_assert!(x <= y);
            }
        }
    }
}
