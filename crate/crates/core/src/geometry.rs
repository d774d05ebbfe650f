//! Vector arithmetic shared by providers and relation evaluators.

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("empty vector list")]
    Empty,
    #[error("vector must have at least one component")]
    NoComponents,
    #[error("component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
}

/// Fixed-dimension vector of finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(components: Vec<f64>) -> Result<Self, GeometryError> {
        if components.is_empty() {
            return Err(GeometryError::NoComponents);
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index, value });
        }
        Ok(Self(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        Self::new(self.0.iter().map(|c| c * factor).collect())
    }
}

impl Deref for EmbeddingVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = GeometryError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

// Left-to-right accumulation so results are reproducible bit for bit.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `1 - cos(u, v)`, clamped to `[0, 2]`.
pub fn cosine_distance(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, GeometryError> {
    if u.dim() != v.dim() {
        return Err(GeometryError::DimensionMismatch(u.dim(), v.dim()));
    }
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    // nu * nv and dot(u, v) are both symmetric in (u, v) under IEEE rounding.
    let cos = dot(u, v) / (nu * nv);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

/// Componentwise arithmetic mean, summed left to right then divided by the
/// count. Identical inputs return that vector unchanged (`k*v/k` can be off
/// by an ulp otherwise).
pub fn mean_pool(vectors: &[&EmbeddingVector]) -> Result<EmbeddingVector, GeometryError> {
    let first = vectors.first().ok_or(GeometryError::Empty)?;
    let dim = first.dim();
    if vectors.iter().all(|v| v.as_slice() == first.as_slice()) {
        return Ok((*first).clone());
    }
    let mut sum = vec![0.0; dim];
    for v in vectors {
        if v.dim() != dim {
            return Err(GeometryError::DimensionMismatch(dim, v.dim()));
        }
        for (acc, c) in sum.iter_mut().zip(v.iter()) {
            *acc += c;
        }
    }
    let n = vectors.len() as f64;
    EmbeddingVector::new(sum.into_iter().map(|s| s / n).collect())
}

pub fn l2_normalize(v: &EmbeddingVector) -> Result<EmbeddingVector, GeometryError> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    EmbeddingVector::new(v.iter().map(|c| c / norm).collect())
}
