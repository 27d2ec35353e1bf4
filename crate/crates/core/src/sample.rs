use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image shape as (height, width, channels), stored row-major with
/// interleaved channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl Shape {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        let shape = Self {
            height,
            width,
            channels,
        };
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::InvalidShape(shape));
        }
        Ok(shape)
    }

    /// Flat shape for plain vectors: (1, len, 1).
    pub fn flat(len: usize) -> Self {
        Self {
            height: 1,
            width: len,
            channels: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// A flat real vector with image shape metadata. Plays the clean image, every
/// noisy state of the chain, noise maps and latent perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    shape: Shape,
}

impl Sample {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidShape(shape));
        }
        if data.len() != shape.len() {
            return Err(Error::DataLength {
                shape,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample entry {i} is {}", data[i])));
        }
        Ok(Self { data, shape })
    }

    pub fn zeros(shape: Shape) -> Self {
        Self {
            data: vec![0.0; shape.len()],
            shape,
        }
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        Self {
            data: vec![value; shape.len()],
            shape,
        }
    }

    /// Wraps a plain vector as a `1 x len x 1` sample.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        Self::new(Shape::flat(data.len()), data)
    }

    /// Builds a sample without the finiteness scan. Internal arithmetic only.
    pub(crate) fn from_parts(shape: Shape, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), data.len());
        Self { data, shape }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn ensure_shape(&self, expected: Shape) -> Result<()> {
        if self.shape != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: self.shape,
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.shape, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Componentwise combination of two samples of the same shape.
    pub fn zip_with(&self, other: &Sample, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        other.ensure_shape(self.shape)?;
        Ok(Self::from_parts(
            self.shape,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Sample) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Sample) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|v| k * v)
    }

    pub fn dot(&self, other: &Sample) -> Result<f64> {
        other.ensure_shape(self.shape)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_l1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Sample) -> Result<f64> {
        Ok(self.sub(other)?.norm_linf())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_lengths() {
        assert!(Shape::new(0, 2, 1).is_err());
        let shape = Shape::new(2, 2, 1).unwrap();
        assert!(matches!(
            Sample::new(shape, vec![0.0; 3]),
            Err(Error::DataLength { .. })
        ));
        assert!(matches!(
            Sample::new(shape, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn norms() {
        let s = Sample::from_vec(vec![3.0, -4.0]).unwrap();
        assert_eq!(s.norm_l1(), 7.0);
        assert_eq!(s.norm_l2(), 5.0);
        assert_eq!(s.norm_linf(), 4.0);
    }

    #[test]
    fn arithmetic_checks_shape() {
        let a = Sample::zeros(Shape::new(2, 2, 1).unwrap());
        let b = Sample::zeros(Shape::new(1, 4, 1).unwrap());
        assert!(matches!(a.add(&b), Err(Error::ShapeMismatch { .. })));
    }
}
