use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FusedContext, FusionConfig, RankedCandidate};
use crate::error::{Error, Result};
use crate::index::ChunkIndex;

/// Keeps the `top_k_final` best candidates, restores conversation order and
/// joins their text with single spaces.
pub fn reconstruct_context(
    index: &ChunkIndex,
    fused: &[RankedCandidate],
    top_k_final: usize,
) -> Result<FusedContext> {
    if top_k_final == 0 {
        return Err(Error::Config("top_k_final must be at least 1".into()));
    }
    let mut ords: Vec<usize> = fused
        .iter()
        .take(top_k_final)
        .map(|c| c.chunk_ord)
        .collect();
    ords.sort_unstable();
    ords.dedup();
    let selected = ords
        .iter()
        .map(|&ord| {
            index.chunk(ord).cloned().ok_or_else(|| {
                Error::Precondition(format!(
                    "candidate ord {ord} not in index of {} chunks",
                    index.len()
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let concatenated_text = selected
        .iter()
        .map(|c| c.text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(FusedContext {
        selected,
        concatenated_text,
        candidates: fused.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub ord: usize,
    pub text: String,
    pub sparse_rank: Option<usize>,
    pub dense_rank: Option<usize>,
    pub sparse_score: Option<f64>,
    pub dense_score: Option<f64>,
    pub fused_score: f64,
    pub selected: bool,
}

/// Everything needed to recompute a fusion decision by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub transcript_id: String,
    pub config: FusionConfig,
    pub candidates: Vec<AuditEntry>,
}

pub fn explain(index: &ChunkIndex, context: &FusedContext, config: &FusionConfig) -> AuditReport {
    let chosen: BTreeSet<usize> = context.selected.iter().map(|c| c.ord).collect();
    let candidates = context
        .candidates
        .iter()
        .map(|c| AuditEntry {
            ord: c.chunk_ord,
            text: index
                .chunk(c.chunk_ord)
                .map(|ch| ch.text.clone())
                .unwrap_or_default(),
            sparse_rank: c.sparse_rank,
            dense_rank: c.dense_rank,
            sparse_score: c.sparse_score,
            dense_score: c.dense_score,
            fused_score: c.fused_score,
            selected: chosen.contains(&c.chunk_ord),
        })
        .collect();
    AuditReport {
        transcript_id: index.transcript_id.clone(),
        config: *config,
        candidates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Transcript;
    use crate::embed::TestEmbedder;
    use crate::index::build_index;

    fn cand(ord: usize, score: f64) -> RankedCandidate {
        RankedCandidate {
            chunk_ord: ord,
            sparse_rank: Some(1),
            dense_rank: None,
            sparse_score: None,
            dense_score: None,
            fused_score: score,
        }
    }

    fn ten() -> ChunkIndex {
        let text = (0..10)
            .map(|i| format!("Sentence {i}."))
            .collect::<Vec<_>>()
            .join(" ");
        build_index(
            &Transcript::from_text("t", text),
            &TestEmbedder::new(8).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn restores_conversation_order() {
        let idx = ten();
        let ctx =
            reconstruct_context(&idx, &[cand(5, 0.3), cand(2, 0.2), cand(9, 0.1)], 3).unwrap();
        assert_eq!(
            ctx.selected.iter().map(|c| c.ord).collect::<Vec<_>>(),
            [2, 5, 9]
        );
        assert_eq!(ctx.concatenated_text, "Sentence 2. Sentence 5. Sentence 9.");
    }

    #[test]
    fn truncates_and_handles_large_k() {
        let idx = ten();
        let fused = [cand(5, 0.3), cand(2, 0.2), cand(9, 0.1)];
        let ctx = reconstruct_context(&idx, &fused, 2).unwrap();
        assert_eq!(
            ctx.selected.iter().map(|c| c.ord).collect::<Vec<_>>(),
            [2, 5]
        );
        let ctx = reconstruct_context(&idx, &fused, 100).unwrap();
        assert_eq!(ctx.selected.len(), 3);
        assert_eq!(ctx.candidates.len(), 3);
    }

    #[test]
    fn zero_k_and_unknown_ord() {
        let idx = ten();
        assert!(matches!(
            reconstruct_context(&idx, &[cand(1, 0.1)], 0),
            Err(Error::Config(_))
        ));
        assert!(reconstruct_context(&idx, &[cand(42, 0.1)], 1).is_err());
    }

    #[test]
    fn audit_marks_selection() {
        let idx = ten();
        let fused = [cand(5, 0.3), cand(2, 0.2), cand(9, 0.1)];
        let ctx = reconstruct_context(&idx, &fused, 2).unwrap();
        let report = explain(&idx, &ctx, &FusionConfig::default());
        assert_eq!(report.candidates.len(), 3);
        assert!(report.candidates[0].selected && report.candidates[1].selected);
        assert!(!report.candidates[2].selected);
        assert_eq!(report.candidates[2].text, "Sentence 9.");
    }
}
