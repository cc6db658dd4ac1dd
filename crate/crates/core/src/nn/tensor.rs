use crate::error::{Error, Result};

/// Dense row-major tensor of `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::shape("Tensor::from_vec", &[len], &[data.len()]));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Tensor::zeros(&other.shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Number of rows when viewed as a matrix (first dimension).
    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Number of columns when viewed as a matrix (product of trailing dimensions).
    pub fn cols(&self) -> usize {
        if self.shape.len() <= 1 {
            1
        } else {
            self.shape[1..].iter().product()
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape("Tensor::add_assign", &self.shape, &other.shape));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// `out += W x` for a `rows × cols` matrix `W`.
pub fn matvec_acc(w: &Tensor, x: &[f64], out: &mut [f64]) {
    let cols = w.cols();
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), w.rows());
    for (o, row) in out.iter_mut().zip(w.data.chunks_exact(cols)) {
        *o += dot(row, x);
    }
}

/// `out += Wᵀ dy`.
pub fn matvec_t_acc(w: &Tensor, dy: &[f64], out: &mut [f64]) {
    let cols = w.cols();
    debug_assert_eq!(dy.len(), w.rows());
    debug_assert_eq!(out.len(), cols);
    for (g, row) in dy.iter().zip(w.data.chunks_exact(cols)) {
        if *g == 0.0 {
            continue;
        }
        for (o, wij) in out.iter_mut().zip(row) {
            *o += g * wij;
        }
    }
}

/// `dW += dy xᵀ`.
pub fn outer_acc(dw: &mut Tensor, dy: &[f64], x: &[f64]) {
    let cols = dw.cols();
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(dy.len(), dw.rows());
    for (g, row) in dy.iter().zip(dw.data.chunks_exact_mut(cols)) {
        if *g == 0.0 {
            continue;
        }
        for (d, xj) in row.iter_mut().zip(x) {
            *d += g * xj;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn check_len(context: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::shape(context, &[expected], &[found]));
    }
    Ok(())
}
