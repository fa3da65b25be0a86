//! Dense row-major float tensors.
//!
//! Training runs on `Tensor<f32>`; gradient verification instantiates the
//! same code with `f64`.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

use crate::error::{Error, Result};

/// Element type the numeric kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + NumAssign + FromPrimitive + Sum + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    fn from_f32_exact(v: f32) -> Self;
}

impl Scalar for f32 {
    fn from_f32_exact(v: f32) -> Self {
        v
    }
}

impl Scalar for f64 {
    fn from_f32_exact(v: f32) -> Self {
        v as f64
    }
}

/// Dense N-dimensional array in row-major order. During training the
/// parameter tensors also carry an accumulated gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T: Scalar> {
    shape: Vec<usize>,
    values: Vec<T>,
    grad: Option<Vec<T>>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            values: vec![T::zero(); shape.iter().product()],
            grad: None,
        }
    }

    pub fn from_vec(shape: &[usize], values: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "{} values do not fill shape {:?} ({} slots)",
                values.len(),
                shape,
                expected
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            values,
            grad: None,
        })
    }

    /// Scalar (rank-0 is not used; this is a 1-element rank-1 helper).
    pub fn scalar(v: T) -> Self {
        Tensor {
            shape: vec![1],
            values: vec![v],
            grad: None,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Gradient buffer, allocated lazily with the same length as `values`.
    pub fn grad(&self) -> Option<&[T]> {
        self.grad.as_deref()
    }

    pub fn grad_mut(&mut self) -> &mut [T] {
        let n = self.values.len();
        self.grad.get_or_insert_with(|| vec![T::zero(); n])
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = self.grad.as_mut() {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
    }

    /// Reinterpret the same buffer under a new shape of equal volume.
    pub fn reshaped(mut self, shape: &[usize]) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != self.values.len() {
            return Err(Error::Shape(format!(
                "cannot reshape {:?} ({} values) to {:?}",
                self.shape,
                self.values.len(),
                shape
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Lossy element cast between float widths.
    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            values: self
                .values
                .iter()
                .map(|v| U::from(*v).expect("float-to-float cast"))
                .collect(),
            grad: None,
        }
    }
}

impl<T: Scalar> std::ops::Index<usize> for Tensor<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T: Scalar> std::ops::IndexMut<usize> for Tensor<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_volume() {
        assert!(Tensor::from_vec(&[2, 2], vec![1.0f32, 2.0, 3.0]).is_err());
        let t = Tensor::from_vec(&[2, 2], vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.shape(), &[2, 2]);
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn grad_is_lazy_and_zeroable() {
        let mut t = Tensor::<f64>::zeros(&[3]);
        assert!(t.grad().is_none());
        t.grad_mut()[1] = 5.0;
        assert_eq!(t.grad().unwrap(), &[0.0, 5.0, 0.0]);
        t.zero_grad();
        assert_eq!(t.grad().unwrap(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn reshape_preserves_values() {
        let t = Tensor::from_vec(&[4], vec![1.0f32, 2.0, 3.0, 4.0]).unwrap();
        let r = t.reshaped(&[2, 2]).unwrap();
        assert_eq!(r.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(r.reshaped(&[3, 2]).is_err());
    }
}
