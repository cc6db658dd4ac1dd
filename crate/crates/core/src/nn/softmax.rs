/// Softmax over the entries whose mask is non-zero. Masked entries get
/// probability 0; an all-zero mask yields the all-zero vector.
pub fn masked_softmax(scores: &[f64], mask: &[f64]) -> Vec<f64> {
    debug_assert_eq!(scores.len(), mask.len());
    let max = scores
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m != 0.0)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![0.0; scores.len()];
    }
    let mut out: Vec<f64> = scores
        .iter()
        .zip(mask)
        .map(|(s, m)| if *m != 0.0 { (s - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

pub fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|s| s - lse).collect()
}

/// Backward of a (masked) softmax: given `p = softmax(e)` and `dp`, returns `de`.
/// Masked entries have `p = 0` and so receive zero gradient.
pub fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(pi, dpi)| pi * (dpi - inner)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_on_equal_scores() {
        assert_eq!(masked_softmax(&[0.0, 0.0], &[1.0, 1.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn renormalizes_over_unmasked() {
        assert_eq!(
            masked_softmax(&[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0]),
            vec![0.5, 0.5, 0.0]
        );
    }

    #[test]
    fn all_masked_is_zero_vector() {
        assert_eq!(masked_softmax(&[3.0, -1.0], &[0.0, 0.0]), vec![0.0, 0.0]);
        assert!(masked_softmax(&[], &[]).is_empty());
    }

    #[test]
    fn backward_matches_central_differences() {
        let e = [0.3, -1.2, 0.8, 2.0];
        let mask = [1.0, 1.0, 0.0, 1.0];
        let w = [0.5, -0.25, 3.0, 1.5];
        let f = |e: &[f64]| -> f64 {
            masked_softmax(e, &mask)
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .sum()
        };
        let p = masked_softmax(&e, &mask);
        let de = softmax_backward(&p, &w);
        for i in 0..e.len() {
            let mut plus = e;
            let mut minus = e;
            plus[i] += 1e-6;
            minus[i] -= 1e-6;
            let numeric = (f(&plus) - f(&minus)) / 2e-6;
            assert!((numeric - de[i]).abs() < 1e-8, "{i}: {numeric} vs {}", de[i]);
        }
    }

    proptest! {
        #[test]
        fn sums_to_one_and_is_shift_invariant(
            scores in prop::collection::vec(-20.0f64..20.0, 1..12),
            bits in prop::collection::vec(any::<bool>(), 12),
            shift in -50.0f64..50.0,
        ) {
            let mask: Vec<f64> = scores.iter().enumerate().map(|(i, _)| bits[i] as u8 as f64).collect();
            let p = masked_softmax(&scores, &mask);
            let total: f64 = p.iter().sum();
            if mask.iter().any(|m| *m != 0.0) {
                prop_assert!((total - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(p.iter().all(|v| *v == 0.0));
            }
            for (pi, mi) in p.iter().zip(&mask) {
                if *mi == 0.0 { prop_assert_eq!(*pi, 0.0); }
            }
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            let q = masked_softmax(&shifted, &mask);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
