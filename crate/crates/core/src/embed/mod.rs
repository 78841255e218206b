//! Embedding providers and vector math.
//!
//! Every provider's output goes through [`embed_batch`], which checks shapes
//! and L2-normalizes, so stored vectors are unit length and cosine similarity
//! reduces to a dot product.

mod hashing;
mod http;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hashing::{test_embed, TestEmbedder, TEST_EMBEDDER_SEED};
pub use http::{HttpEmbedder, HttpEmbedderConfig, EMBED_API_KEY_ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("embedding must have dim >= 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Provider(
                "embedding contains non-finite values".into(),
            ));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Scales to unit length. Returns `false`, leaving the vector untouched,
    /// when it is the zero vector.
    pub fn normalize(&mut self) -> bool {
        let n = self.norm();
        if n == 0.0 {
            return false;
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        true
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}

/// Cosine similarity, clamped to [-1, 1] against rounding.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((a.dot(b)? / (na * nb)).clamp(-1.0, 1.0))
}

/// Something that maps text to fixed-size vectors. Implementations must be
/// deterministic for a fixed model and safe to share across threads.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Raw vectors, one per input in order. Normalization and shape checks
    /// happen in [`embed_batch`].
    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>>;
}

/// Embeds `texts` in order and L2-normalizes each vector. Zero vectors (texts
/// without any word) are returned as zeros; see [`EmbeddingVector::is_zero`].
pub fn embed_batch<S: AsRef<str>>(
    provider: &dyn EmbeddingProvider,
    texts: &[S],
) -> Result<Vec<EmbeddingVector>> {
    if texts.is_empty() {
        return Err(Error::Precondition("cannot embed an empty batch".into()));
    }
    let refs: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    if let Some(pos) = refs.iter().position(|t| t.is_empty()) {
        return Err(Error::Precondition(format!("text {pos} in batch is empty")));
    }
    let raw = provider.embed_raw(&refs)?;
    if raw.len() != refs.len() {
        return Err(Error::Provider(format!(
            "{} returned {} vectors for {} texts",
            provider.name(),
            raw.len(),
            refs.len()
        )));
    }
    raw.into_iter()
        .map(|v| {
            check_dims(provider.dim(), v.dim())?;
            Ok(v.normalized())
        })
        .collect()
}

pub fn embed_one(provider: &dyn EmbeddingProvider, text: &str) -> Result<EmbeddingVector> {
    Ok(embed_batch(provider, &[text])?.remove(0))
}
