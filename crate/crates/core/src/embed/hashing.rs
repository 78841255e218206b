//! Deterministic offline embedder.
//!
//! Each lowercase word is hashed (FNV-1a, xor [`TEST_EMBEDDER_SEED`]) into the
//! state of a SplitMix64 generator, which draws a Gaussian vector that is then
//! scaled to unit length. A text's embedding is the mean of its word vectors,
//! renormalized. Golden test values depend on every constant here.

use super::{EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::text;

/// "CLINICSU" in ASCII.
pub const TEST_EMBEDDER_SEED: u64 = 0x434C_494E_4943_5355;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1].
    fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.next_unit().ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * self.next_unit();
        (r * theta.cos(), r * theta.sin())
    }
}

fn word_vector(word: &str, dim: usize) -> Vec<f64> {
    let mut rng = SplitMix64(fnv1a(word.as_bytes()) ^ TEST_EMBEDDER_SEED);
    let mut v = Vec::with_capacity(dim + 1);
    while v.len() < dim {
        let (a, b) = rng.next_gaussian_pair();
        v.push(a);
        v.push(b);
    }
    v.truncate(dim);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Mean of unit word vectors, L2-normalized. Text without any word maps to
/// the zero vector.
pub fn test_embed(text: &str, dim: usize) -> Result<EmbeddingVector> {
    if dim < 2 {
        return Err(Error::Precondition(format!(
            "test embedder needs dim >= 2, got {dim}"
        )));
    }
    let words = text::terms(text);
    if words.is_empty() {
        return Ok(EmbeddingVector::zeros(dim));
    }
    let mut acc = vec![0.0; dim];
    for w in &words {
        for (a, x) in acc.iter_mut().zip(word_vector(w, dim)) {
            *a += x;
        }
    }
    let n = words.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(EmbeddingVector::new(acc)?.normalized())
}

#[derive(Debug, Clone)]
pub struct TestEmbedder {
    dim: usize,
    name: String,
}

impl TestEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Precondition(format!(
                "test embedder needs dim >= 2, got {dim}"
            )));
        }
        Ok(TestEmbedder {
            dim,
            name: format!("test-hash-{dim}"),
        })
    }
}

impl EmbeddingProvider for TestEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        texts.iter().map(|t| test_embed(t, self.dim)).collect()
    }
}
