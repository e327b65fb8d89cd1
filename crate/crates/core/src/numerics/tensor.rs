use alloc::vec;
use alloc::vec::Vec;

use super::{kernels, NumericsError};

/// A dense row-major array of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NumericsError> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(NumericsError::DataLength {
                shape,
                len: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![v],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        Self::new(vec![rows, cols], data)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> Result<f64, NumericsError> {
        if self.data.len() != 1 {
            return Err(NumericsError::NotScalar(self.shape.clone()));
        }
        Ok(self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn checked(self, op: &'static str) -> Result<Self, NumericsError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(NumericsError::NonFinite(op))
        }
    }

    fn same_shape(&self, other: &Self, op: &'static str) -> Result<(), NumericsError> {
        if self.shape != other.shape {
            return Err(NumericsError::ShapeMismatch {
                op,
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// Matrix product. `[m, k] x [k, n] -> [m, n]` or `[m, k] x [k] -> [m]`.
    pub fn matmul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        let mismatch = || NumericsError::ShapeMismatch {
            op: "matmul",
            left: self.shape.clone(),
            right: rhs.shape.clone(),
        };
        if self.rank() != 2 {
            return Err(mismatch());
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        match rhs.shape[..] {
            [k2] if k2 == k => {
                let mut out = vec![0.0; m];
                kernels::matvec(&self.data, m, k, &rhs.data, &mut out);
                Self::vector(out).checked("matmul")
            }
            [k2, n] if k2 == k => {
                let mut out = vec![0.0; m * n];
                kernels::matmul(&self.data, &rhs.data, m, k, n, &mut out);
                Self::new(vec![m, n], out)?.checked("matmul")
            }
            _ => Err(mismatch()),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.same_shape(rhs, "add")?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Self::new(self.shape.clone(), data)?.checked("add")
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.same_shape(rhs, "mul")?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).collect();
        Self::new(self.shape.clone(), data)?.checked("mul")
    }

    pub fn tanh(&self) -> Self {
        self.map(libm::tanh)
    }

    pub fn sigmoid(&self) -> Self {
        self.map(kernels::sigmoid)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Softmax over a vector, or over each row of a matrix.
    pub fn softmax(&self) -> Result<Self, NumericsError> {
        let width = match self.shape[..] {
            [n] => n,
            [_, n] => n,
            _ => {
                return Err(NumericsError::ShapeMismatch {
                    op: "softmax",
                    left: self.shape.clone(),
                    right: Vec::new(),
                })
            }
        };
        let mut data = self.data.clone();
        if width > 0 {
            for row in data.chunks_exact_mut(width) {
                kernels::softmax_in_place(row);
            }
        }
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    /// Concatenates vectors end to end.
    pub fn concat(parts: &[&Self]) -> Result<Self, NumericsError> {
        let mut data = Vec::new();
        for p in parts {
            if p.rank() != 1 {
                return Err(NumericsError::ShapeMismatch {
                    op: "concat",
                    left: p.shape.clone(),
                    right: Vec::new(),
                });
            }
            data.extend_from_slice(&p.data);
        }
        Ok(Self::vector(data))
    }

    /// `len` entries of a vector starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self, NumericsError> {
        if self.rank() != 1 || start + len > self.data.len() {
            return Err(NumericsError::ShapeMismatch {
                op: "slice",
                left: self.shape.clone(),
                right: vec![start, len],
            });
        }
        Ok(Self::vector(self.data[start..start + len].to_vec()))
    }
}
