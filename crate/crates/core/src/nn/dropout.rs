use rand::Rng;

/// Inverted dropout mask: each entry is 0 with probability `p`, otherwise
/// `1 / (1 - p)`. With `p == 0` every entry is exactly 1.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Vec<f64> {
    if p <= 0.0 {
        return vec![1.0; len];
    }
    let keep = 1.0 / (1.0 - p);
    (0..len)
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
        .collect()
}

pub fn apply_mask(values: &mut [f64], mask: &[f64]) {
    for (v, m) in values.iter_mut().zip(mask) {
        *v *= m;
    }
}
