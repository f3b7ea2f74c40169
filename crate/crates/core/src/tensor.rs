//! Small dense row-major tensors indexed by fixed-size index arrays.

use std::ops::{Index, IndexMut};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Clone> Tensor<T> {
    pub fn filled(shape: &[usize], value: T) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }
}

impl<T> Tensor<T> {
    /// Builds a tensor by calling `f` with every multi-index in row-major order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for axis in (0..shape.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut T {
        let off = self.offset(idx);
        &mut self.data[off]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut off = 0;
        for (i, (&k, &n)) in idx.iter().zip(&self.shape).enumerate() {
            assert!(k < n, "index {k} out of range {n} on axis {i}");
            off = off * n + k;
        }
        off
    }
}

impl Tensor<f64> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor::filled(shape, 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise absolute difference. NaN anywhere yields infinity.
    pub fn max_abs_diff(&self, other: &Tensor<f64>) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| {
                let d = (a - b).abs();
                if d.is_nan() {
                    f64::INFINITY
                } else {
                    m.max(d)
                }
            })
    }
}

macro_rules! impl_index {
    ($($n:literal),*) => {$(
        impl<T> Index<[usize; $n]> for Tensor<T> {
            type Output = T;
            fn index(&self, idx: [usize; $n]) -> &T {
                self.get(&idx)
            }
        }
        impl<T> IndexMut<[usize; $n]> for Tensor<T> {
            fn index_mut(&mut self, idx: [usize; $n]) -> &mut T {
                self.get_mut(&idx)
            }
        }
    )*};
}

impl_index!(1, 2, 3, 4, 5);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_is_row_major() {
        let t = Tensor::from_fn(&[2, 3], |i| (10 * i[0] + i[1]) as f64);
        assert_eq!(t.as_slice(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(t[[1, 2]], 12.0);
    }

    #[test]
    fn max_abs_diff_flags_nan() {
        let a = Tensor::zeros(&[2]);
        let mut b = Tensor::zeros(&[2]);
        b[[1]] = f64::NAN;
        assert!(a.max_abs_diff(&b).is_infinite());
    }

    #[test]
    #[should_panic]
    fn out_of_range_panics() {
        let t = Tensor::zeros(&[2, 2]);
        let _ = t[[2, 0]];
    }
}
