use std::collections::{BTreeMap, BTreeSet};

use super::{FusionConfig, RankedCandidate, RankedHit};
use crate::error::{Error, Result};

fn check_ranked(list: &[RankedHit], which: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, hit) in list.iter().enumerate() {
        if hit.rank != i + 1 {
            return Err(Error::Precondition(format!(
                "{which} list position {i} has rank {} (expected {})",
                hit.rank,
                i + 1
            )));
        }
        if !seen.insert(hit.chunk_ord) {
            return Err(Error::Precondition(format!(
                "{which} list repeats chunk {}",
                hit.chunk_ord
            )));
        }
    }
    Ok(())
}

/// Weighted reciprocal rank fusion over the union of both lists:
/// `w_sparse / (lambda + sparse_rank) + w_dense / (lambda + dense_rank)`,
/// a missing rank contributing nothing. Candidates whose only appearance is
/// in a zero-weight list are dropped. Output is best first, ties by ord.
pub fn rrf_fuse(
    sparse: &[RankedHit],
    dense: &[RankedHit],
    cfg: &FusionConfig,
) -> Result<Vec<RankedCandidate>> {
    cfg.validate()?;
    check_ranked(sparse, "sparse")?;
    check_ranked(dense, "dense")?;

    let mut by_ord: BTreeMap<usize, RankedCandidate> = BTreeMap::new();
    let blank = |chunk_ord| RankedCandidate {
        chunk_ord,
        sparse_rank: None,
        dense_rank: None,
        sparse_score: None,
        dense_score: None,
        fused_score: 0.0,
    };
    for hit in sparse {
        let c = by_ord
            .entry(hit.chunk_ord)
            .or_insert_with(|| blank(hit.chunk_ord));
        c.sparse_rank = Some(hit.rank);
        c.sparse_score = Some(hit.score);
    }
    for hit in dense {
        let c = by_ord
            .entry(hit.chunk_ord)
            .or_insert_with(|| blank(hit.chunk_ord));
        c.dense_rank = Some(hit.rank);
        c.dense_score = Some(hit.score);
    }

    let mut fused: Vec<RankedCandidate> = by_ord
        .into_values()
        .map(|mut c| {
            c.fused_score = fused_score(c.sparse_rank, c.dense_rank, cfg);
            c
        })
        .filter(|c| c.fused_score > 0.0)
        .collect();
    fused.sort_by(|a, b| {
        b.fused_score
            .total_cmp(&a.fused_score)
            .then(a.chunk_ord.cmp(&b.chunk_ord))
    });
    Ok(fused)
}

pub(crate) fn fused_score(
    sparse_rank: Option<usize>,
    dense_rank: Option<usize>,
    cfg: &FusionConfig,
) -> f64 {
    let term = |w: f64, rank: Option<usize>| rank.map_or(0.0, |r| w / (cfg.rrf_lambda + r as f64));
    term(cfg.w_sparse, sparse_rank) + term(cfg.w_dense, dense_rank)
}
