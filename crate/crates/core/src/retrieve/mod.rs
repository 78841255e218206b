//! Retriever-based filtering.
//!
//! BM25 and dense cosine retrieval each rank the chunks of one transcript;
//! weighted reciprocal rank fusion merges the two lists, and the best fused
//! chunks are put back in conversation order to form the generation context.

mod context;
mod dense;
mod fusion;
mod sparse;

use serde::{Deserialize, Serialize};

use crate::corpus::{Chunk, Transcript};
use crate::embed::{embed_one, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::index::{build_index_with, Bm25Params, ChunkIndex};

pub use context::{explain, reconstruct_context, AuditEntry, AuditReport};
pub use dense::dense_retrieve;
pub use fusion::rrf_fuse;
pub use sparse::{bm25_scores, sparse_retrieve};

pub const DEFAULT_RETRIEVAL_QUERY: &str =
    "Extract subjective, objective, assessment, and plan details from a given transcript";

/// The retrieval prompt, optionally with its embedding already computed.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalQuery {
    text: String,
    vector: Option<EmbeddingVector>,
}

impl RetrievalQuery {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::Precondition("retrieval query is empty".into()));
        }
        Ok(RetrievalQuery { text, vector: None })
    }

    pub fn with_vector(mut self, vector: EmbeddingVector) -> Self {
        self.vector = Some(vector);
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn vector(&self) -> Option<&EmbeddingVector> {
        self.vector.as_ref()
    }

    /// Embeds the query text with `provider` unless a vector was supplied.
    pub fn resolve(&self, provider: &dyn EmbeddingProvider) -> Result<RetrievalQuery> {
        match &self.vector {
            Some(_) => Ok(self.clone()),
            None => Ok(self.clone().with_vector(embed_one(provider, &self.text)?)),
        }
    }
}

impl Default for RetrievalQuery {
    fn default() -> Self {
        RetrievalQuery {
            text: DEFAULT_RETRIEVAL_QUERY.to_string(),
            vector: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub w_sparse: f64,
    pub w_dense: f64,
    pub rrf_lambda: f64,
    pub top_k_per_retriever: usize,
    pub top_k_final: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            w_sparse: 0.5,
            w_dense: 0.5,
            rrf_lambda: 60.0,
            top_k_per_retriever: 15,
            top_k_final: 17,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("w_sparse", self.w_sparse), ("w_dense", self.w_dense)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {w}")));
            }
        }
        if (self.w_sparse + self.w_dense - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "w_sparse + w_dense must equal 1, got {}",
                self.w_sparse + self.w_dense
            )));
        }
        if !(self.rrf_lambda.is_finite() && self.rrf_lambda > 0.0) {
            return Err(Error::Config(format!(
                "rrf_lambda must be > 0, got {}",
                self.rrf_lambda
            )));
        }
        if self.top_k_per_retriever == 0 || self.top_k_final == 0 {
            return Err(Error::Config("top-k values must be at least 1".into()));
        }
        Ok(())
    }
}

/// One entry of a single retriever's ranked list. Ranks start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub chunk_ord: usize,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub chunk_ord: usize,
    pub sparse_rank: Option<usize>,
    pub dense_rank: Option<usize>,
    pub sparse_score: Option<f64>,
    pub dense_score: Option<f64>,
    pub fused_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedContext {
    /// Selected chunks in conversation order.
    pub selected: Vec<Chunk>,
    pub concatenated_text: String,
    /// Every fused candidate, best first.
    pub candidates: Vec<RankedCandidate>,
}

/// Sorts hits by descending score, ties by ascending ord, keeps `k`, and
/// numbers them from 1.
pub(crate) fn rank_hits(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<RankedHit> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (chunk_ord, score))| RankedHit {
            chunk_ord,
            score,
            rank: i + 1,
        })
        .collect()
}

pub(crate) fn require_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    Ok(())
}

/// Runs both retrievers over an existing index, fuses, and rebuilds the context.
pub fn filter_index(
    index: &ChunkIndex,
    provider: &dyn EmbeddingProvider,
    query: &RetrievalQuery,
    cfg: &FusionConfig,
) -> Result<FusedContext> {
    cfg.validate()?;
    let query = query.resolve(provider)?;
    let sparse = sparse_retrieve(index, query.text(), cfg.top_k_per_retriever)?;
    let dense = dense_retrieve(index, &query, cfg.top_k_per_retriever)?;
    let fused = rrf_fuse(&sparse, &dense, cfg)?;
    reconstruct_context(index, &fused, cfg.top_k_final)
}

/// Index, retrieve, fuse and reconstruct for a single transcript.
pub fn filter_transcript(
    transcript: &Transcript,
    provider: &dyn EmbeddingProvider,
    query: &RetrievalQuery,
    cfg: &FusionConfig,
    bm25: Bm25Params,
) -> Result<FusedContext> {
    cfg.validate()?;
    let index = build_index_with(transcript, provider, bm25)?;
    filter_index(&index, provider, query, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{chunk_transcript, flatten_diarized};
    use crate::embed::TestEmbedder;
    use crate::infer::tokenizer::{Tokenizer, WhitespaceTokenizer};

    #[test]
    fn config_validation() {
        assert!(FusionConfig::default().validate().is_ok());
        let bad = [
            FusionConfig {
                w_sparse: 0.6,
                ..Default::default()
            },
            FusionConfig {
                w_sparse: -0.5,
                w_dense: 1.5,
                ..Default::default()
            },
            FusionConfig {
                rrf_lambda: 0.0,
                ..Default::default()
            },
            FusionConfig {
                top_k_final: 0,
                ..Default::default()
            },
            FusionConfig {
                top_k_per_retriever: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn empty_query_rejected() {
        assert!(RetrievalQuery::new("  ").is_err());
        assert_eq!(RetrievalQuery::default().text(), DEFAULT_RETRIEVAL_QUERY);
    }

    #[test]
    fn one_sentence_transcript() {
        let t = Transcript::from_text("one", "I have had a cough for six months.");
        let p = TestEmbedder::new(16).unwrap();
        let ctx = filter_transcript(
            &t,
            &p,
            &RetrievalQuery::default(),
            &FusionConfig::default(),
            Bm25Params::default(),
        )
        .unwrap();
        assert_eq!(ctx.concatenated_text, "I have had a cough for six months.");
    }

    #[test]
    fn sparse_only_full_k_keeps_every_matching_chunk() {
        let t = Transcript::from_text(
            "t",
            "Cough for months. Any blood? Some blood in cough. Take care. Goodbye.",
        );
        let p = TestEmbedder::new(16).unwrap();
        let n = chunk_transcript(&t).unwrap().len();
        let cfg = FusionConfig {
            w_sparse: 1.0,
            w_dense: 0.0,
            top_k_per_retriever: n,
            top_k_final: n,
            ..Default::default()
        };
        let query = RetrievalQuery::new("cough blood care goodbye months").unwrap();
        let ctx = filter_transcript(&t, &p, &query, &cfg, Bm25Params::default()).unwrap();
        let ords: Vec<usize> = ctx.selected.iter().map(|c| c.ord).collect();
        assert_eq!(ords, (0..n).collect::<Vec<_>>());
        assert_eq!(ctx.concatenated_text, flatten_diarized(&t).unwrap());
    }

    #[test]
    fn context_never_longer_than_transcript() {
        let t = Transcript::from_text(
            "t",
            "Hello there. I have chest pain. It started two days ago. Any fever? No fever. We will order an ECG. Bye.",
        );
        let p = TestEmbedder::new(32).unwrap();
        for top in 1..=8 {
            let cfg = FusionConfig {
                top_k_final: top,
                ..Default::default()
            };
            let ctx = filter_transcript(
                &t,
                &p,
                &RetrievalQuery::default(),
                &cfg,
                Bm25Params::default(),
            )
            .unwrap();
            let full = WhitespaceTokenizer.count(&flatten_diarized(&t).unwrap());
            assert!(WhitespaceTokenizer.count(&ctx.concatenated_text) <= full);
            assert!(ctx.selected.len() <= top.min(7));
        }
    }
}
