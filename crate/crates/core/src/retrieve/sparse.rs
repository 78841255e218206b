use std::collections::BTreeSet;

use super::{rank_hits, require_k, RankedHit};
use crate::error::Result;
use crate::index::ChunkIndex;
use crate::text;

/// Okapi BM25 score of every chunk against the distinct terms of `query_text`.
pub fn bm25_scores(index: &ChunkIndex, query_text: &str) -> Vec<f64> {
    let stats = &index.bm25;
    let query_terms: BTreeSet<String> = text::terms(query_text).into_iter().collect();
    let mut scores = vec![0.0; stats.n_docs];
    if stats.avgdl == 0.0 {
        return scores;
    }
    for term in &query_terms {
        let idf = stats.idf(term);
        if idf == 0.0 {
            continue;
        }
        for (doc, tfs) in stats.term_freqs.iter().enumerate() {
            let Some(&tf) = tfs.get(term) else { continue };
            let tf = tf as f64;
            let norm = 1.0 - stats.b + stats.b * stats.doc_len[doc] as f64 / stats.avgdl;
            scores[doc] += idf * tf * (stats.k1 + 1.0) / (tf + stats.k1 * norm);
        }
    }
    scores
}

/// Chunks with a positive BM25 score, best first, at most `k`.
pub fn sparse_retrieve(index: &ChunkIndex, query_text: &str, k: usize) -> Result<Vec<RankedHit>> {
    require_k(k)?;
    let scored = bm25_scores(index, query_text)
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s > 0.0)
        .collect();
    Ok(rank_hits(scored, k))
}
