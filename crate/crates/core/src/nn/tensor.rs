//! Dense row-major tensor of 32-bit reals.

use crate::{Error, Result};

/// Shaped dense array of `f32` carrying activations, weights, and gradients.
///
/// Storage is row-major: the last axis varies fastest. For image-like
/// tensors the axis order is `[height, width, channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBuffer {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl TensorBuffer {
    /// Zero-filled tensor. Every dimension must be positive.
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "tensor dimensions must be positive, got {shape:?}"
        );
        let len = shape.iter().product();
        TensorBuffer {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    /// Build from existing data; `data.len()` must equal `product(shape)`.
    pub fn from_vec(shape: &[usize], data: Vec<f32>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::Argument(format!(
                "tensor dimensions must be positive, got {shape:?}"
            )));
        }
        if data.len() != expected {
            return Err(Error::dim(
                "TensorBuffer::from_vec",
                format!("{expected} elements for shape {shape:?}"),
                data.len(),
            ));
        }
        Ok(TensorBuffer {
            shape: shape.to_vec(),
            data,
        })
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Reinterpret as a flat vector without copying.
    pub fn flattened(mut self) -> Self {
        self.shape = vec![self.data.len()];
        self
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f32> {
        self.data.iter()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Flat index for a `[h, w, c]` tensor.
    #[inline]
    pub fn idx3(&self, h: usize, w: usize, c: usize) -> usize {
        debug_assert_eq!(self.shape.len(), 3);
        (h * self.shape[1] + w) * self.shape[2] + c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length() {
        assert!(TensorBuffer::from_vec(&[2, 3], vec![0.0; 6]).is_ok());
        assert!(TensorBuffer::from_vec(&[2, 3], vec![0.0; 5]).is_err());
        assert!(TensorBuffer::from_vec(&[0, 3], vec![]).is_err());
    }

    #[test]
    fn idx3_is_row_major() {
        let t = TensorBuffer::zeros(&[4, 5, 3]);
        assert_eq!(t.idx3(0, 0, 0), 0);
        assert_eq!(t.idx3(0, 0, 2), 2);
        assert_eq!(t.idx3(0, 1, 0), 3);
        assert_eq!(t.idx3(1, 0, 0), 15);
        assert_eq!(t.idx3(3, 4, 2), 4 * 5 * 3 - 1);
    }
}
