use rand::Rng;

use super::tensor::Tensor;

/// Uniform in ±√(6 / (fan_in + fan_out)) for a `rows × cols` matrix.
pub fn glorot_uniform<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    Tensor::from_vec(&[rows, cols], data).expect("length matches shape")
}

/// Glorot-uniform vector, treating it as a `len × 1` matrix.
pub fn glorot_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Tensor {
    let bound = (6.0 / (len + 1) as f64).sqrt();
    Tensor::vector((0..len).map(|_| rng.gen_range(-bound..=bound)).collect())
}
