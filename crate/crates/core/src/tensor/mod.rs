//! Dense row-major tensors, a reverse-mode tape over layer-level ops, and
//! the Adam optimizer.
//!
//! Everything the network needs is expressed with rank-1 and rank-2
//! tensors: activations are `[batch, width]`, biases and PReLU slopes are
//! `[width]`, scalar losses are `[1]`.

mod adam;
mod init;
mod params;
pub(crate) mod tape;

pub use adam::{AdamConfig, AdamState};
pub use init::{embedding_uniform, xavier_uniform, EMBEDDING_INIT_RANGE, PRELU_INIT_SLOPE};
pub use params::{ParamId, ParamStore};
pub use tape::{Tape, Var, PROB_CLIP_EPS};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Builds a tensor, rejecting a data length that disagrees with the shape
    /// and any non-finite entry.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {:?} needs {} values, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor construction ({bad})")));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<f64>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    /// Column vector `[n, 1]`.
    pub fn column(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Self::new(vec![n, 1], data)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::matrix(rows.len(), cols, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
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

    /// Leading dimension of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Trailing dimension; a rank-1 tensor has `len()` columns.
    pub fn cols(&self) -> usize {
        *self.shape.last().unwrap_or(&1)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    /// The single value of a `[1]` (or `[1, 1]`) tensor.
    pub fn item(&self) -> Result<f64> {
        if self.data.len() != 1 {
            return Err(Error::Contract(format!(
                "item() on tensor of shape {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn require_rank2(&self, what: &str) -> Result<(usize, usize)> {
        if self.shape.len() != 2 {
            return Err(Error::Dimension(format!(
                "{what}: expected rank-2 tensor, got shape {:?}",
                self.shape
            )));
        }
        Ok((self.shape[0], self.shape[1]))
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub(crate) fn from_parts_unchecked(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_must_match_data() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let err = Tensor::vector(vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert!(Tensor::vector(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn empty_batch_is_allowed() {
        let t = Tensor::matrix(0, 8, vec![]).unwrap();
        assert_eq!(t.shape(), &[0, 8]);
        assert!(t.is_empty());
    }
}
