//! Greedy token-matching similarity in the style of BERTScore, using any
//! [`EmbeddingProvider`] for the per-token vectors. It is an analogue, not a
//! reproduction of a specific contextual model.

use std::collections::HashMap;

use super::rouge::RougeScore;
use crate::embed::{embed_batch, EmbeddingProvider, EmbeddingVector};
use crate::error::Result;
use crate::text;

fn similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    a.dot(b)
}

fn greedy_mean(from: &[&EmbeddingVector], to: &[&EmbeddingVector]) -> Result<f64> {
    let mut total = 0.0;
    for a in from {
        let mut best = f64::NEG_INFINITY;
        for b in to {
            best = best.max(similarity(a, b)?);
        }
        total += best;
    }
    Ok(total / from.len() as f64)
}

/// Precision is the mean over candidate tokens of the best cosine against any
/// reference token; recall is the same from the reference side.
pub fn embed_score(
    candidate: &str,
    reference: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<RougeScore> {
    let (c, r) = (text::terms(candidate), text::terms(reference));
    if c.is_empty() || r.is_empty() {
        return Ok(RougeScore::default());
    }
    let mut vocab: Vec<&str> = c.iter().chain(&r).map(String::as_str).collect();
    vocab.sort_unstable();
    vocab.dedup();
    let vectors = embed_batch(provider, &vocab)?;
    let lookup: HashMap<&str, &EmbeddingVector> = vocab.iter().copied().zip(&vectors).collect();
    let cv: Vec<&EmbeddingVector> = c.iter().map(|t| lookup[t.as_str()]).collect();
    let rv: Vec<&EmbeddingVector> = r.iter().map(|t| lookup[t.as_str()]).collect();
    Ok(RougeScore::from_pr(
        greedy_mean(&cv, &rv)?,
        greedy_mean(&rv, &cv)?,
    ))
}
