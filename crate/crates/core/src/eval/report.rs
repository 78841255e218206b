use serde::{Deserialize, Serialize};

use super::embed_score::embed_score;
use super::rouge::{rouge_l, rouge_n, RougeScore};
use crate::corpus::DatasetPair;
use crate::embed::EmbeddingProvider;
use crate::error::Result;
use crate::infer::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    #[serde(rename = "rougeL")]
    pub rouge_l: RougeScore,
    pub embed_score: RougeScore,
    pub tokens: usize,
    pub reference_tokens: usize,
}

/// Mean F1 of each metric across items, plus mean token counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub embed_score: f64,
    pub mean_tokens: f64,
    pub mean_reference_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub items: Vec<EvalItem>,
    pub aggregate: Aggregate,
}

/// Scores each `(id, candidate)` against the reference summary of the pair with
/// the same id. Candidates without a matching reference are skipped.
pub fn evaluate_pairs(
    candidates: &[(String, String)],
    references: &[DatasetPair],
    provider: &dyn EmbeddingProvider,
    tokenizer: &dyn Tokenizer,
) -> Result<EvalReport> {
    let mut items = Vec::new();
    for (id, cand) in candidates {
        let Some(pair) = references
            .iter()
            .find(|p| p.id.as_deref() == Some(id.as_str()))
        else {
            tracing::warn!(id = %id, "no reference summary, skipping");
            continue;
        };
        let reference = &pair.summary;
        items.push(EvalItem {
            id: id.clone(),
            rouge1: rouge_n(cand, reference, 1),
            rouge2: rouge_n(cand, reference, 2),
            rouge_l: rouge_l(cand, reference),
            embed_score: embed_score(cand, reference, provider)?,
            tokens: tokenizer.count(cand),
            reference_tokens: tokenizer.count(reference),
        });
    }
    let aggregate = aggregate(&items);
    Ok(EvalReport { items, aggregate })
}

fn aggregate(items: &[EvalItem]) -> Aggregate {
    if items.is_empty() {
        return Aggregate::default();
    }
    let n = items.len() as f64;
    let mean = |f: &dyn Fn(&EvalItem) -> f64| items.iter().map(f).sum::<f64>() / n;
    Aggregate {
        n: items.len(),
        rouge1: mean(&|i| i.rouge1.f1),
        rouge2: mean(&|i| i.rouge2.f1),
        rouge_l: mean(&|i| i.rouge_l.f1),
        embed_score: mean(&|i| i.embed_score.f1),
        mean_tokens: mean(&|i| i.tokens as f64),
        mean_reference_tokens: mean(&|i| i.reference_tokens as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::TestEmbedder;
    use crate::infer::tokenizer::WhitespaceTokenizer;

    fn pair(id: &str, summary: &str) -> DatasetPair {
        DatasetPair {
            id: Some(id.into()),
            conversation: String::new(),
            summary: summary.into(),
        }
    }

    #[test]
    fn identical_summary_scores_one() {
        let refs = [
            pair("a", "patient has a cough"),
            pair("b", "fever for two days"),
        ];
        let cands = vec![
            ("a".to_string(), "patient has a cough".to_string()),
            ("z".to_string(), "x".to_string()),
        ];
        let r = evaluate_pairs(
            &cands,
            &refs,
            &TestEmbedder::new(32).unwrap(),
            &WhitespaceTokenizer,
        )
        .unwrap();
        assert_eq!(r.items.len(), 1);
        let it = &r.items[0];
        assert_eq!(it.rouge1.f1, 1.0);
        assert_eq!(it.rouge_l.f1, 1.0);
        assert!((it.embed_score.f1 - 1.0).abs() < 1e-9);
        assert_eq!((it.tokens, it.reference_tokens), (4, 4));
        assert_eq!(r.aggregate.n, 1);
    }
}
