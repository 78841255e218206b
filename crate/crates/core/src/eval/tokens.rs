use serde::{Deserialize, Serialize};

use crate::infer::tokenizer::Tokenizer;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenReport {
    pub counts: Vec<usize>,
    pub mean: f64,
    pub max: usize,
    pub min: usize,
}

/// Per-summary token counts and their mean/max/min (all zero for no input).
pub fn token_report<S: AsRef<str>>(summaries: &[S], tokenizer: &dyn Tokenizer) -> TokenReport {
    let counts: Vec<usize> = summaries
        .iter()
        .map(|s| tokenizer.count(s.as_ref()))
        .collect();
    if counts.is_empty() {
        return TokenReport::default();
    }
    TokenReport {
        mean: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        max: counts.iter().copied().max().unwrap_or(0),
        min: counts.iter().copied().min().unwrap_or(0),
        counts,
    }
}
