use super::{rank_hits, require_k, RankedHit, RetrievalQuery};
use crate::embed::cosine;
use crate::error::{Error, Result};
use crate::index::ChunkIndex;

/// Exhaustive cosine scan over every chunk. The query must carry a vector.
/// Chunks whose vector is zero score 0.
pub fn dense_retrieve(
    index: &ChunkIndex,
    query: &RetrievalQuery,
    k: usize,
) -> Result<Vec<RankedHit>> {
    require_k(k)?;
    let q = query
        .vector()
        .ok_or_else(|| Error::Precondition("query has not been embedded".into()))?;
    if q.dim() != index.dim {
        return Err(Error::Dimension {
            expected: index.dim,
            actual: q.dim(),
        });
    }
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    let scored = index
        .vectors
        .iter()
        .enumerate()
        .map(|(ord, v)| {
            let s = if v.is_zero() { 0.0 } else { cosine(q, v)? };
            Ok((ord, s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_hits(scored, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Chunk;
    use crate::embed::EmbeddingVector;
    use crate::index::Bm25Params;
    use proptest::prelude::*;

    fn fixture(vectors: Vec<Vec<f64>>) -> ChunkIndex {
        let chunks = (0..vectors.len())
            .map(|ord| Chunk {
                transcript_id: "f".into(),
                ord,
                text: format!("chunk {ord}."),
            })
            .collect();
        let vectors = vectors
            .into_iter()
            .map(|v| EmbeddingVector::new(v).unwrap())
            .collect();
        ChunkIndex::from_parts("f", chunks, vectors, "fixture", Bm25Params::default()).unwrap()
    }

    fn query(v: Vec<f64>) -> RetrievalQuery {
        RetrievalQuery::new("q")
            .unwrap()
            .with_vector(EmbeddingVector::new(v).unwrap())
    }

    #[test]
    fn fixture_vectors() {
        let idx = fixture(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let hits = dense_retrieve(&idx, &query(vec![1.0, 0.0]), 2).unwrap();
        assert_eq!(
            hits,
            [
                RankedHit {
                    chunk_ord: 0,
                    score: 1.0,
                    rank: 1
                },
                RankedHit {
                    chunk_ord: 1,
                    score: 0.0,
                    rank: 2
                }
            ]
        );
        assert_eq!(
            dense_retrieve(&idx, &query(vec![1.0, 0.0]), 10)
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn errors() {
        let idx = fixture(vec![vec![1.0, 0.0]]);
        assert!(matches!(
            dense_retrieve(&idx, &query(vec![1.0, 0.0, 0.0]), 1),
            Err(Error::Dimension {
                expected: 2,
                actual: 3
            })
        ));
        assert!(dense_retrieve(&idx, &RetrievalQuery::new("q").unwrap(), 1).is_err());
        assert!(matches!(
            dense_retrieve(&idx, &query(vec![0.0, 0.0]), 1),
            Err(Error::ZeroVector)
        ));
    }

    proptest! {
        #[test]
        fn matches_exhaustive_argsort(
            vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 10),
            q in prop::collection::vec(0.1f64..1.0, 4),
            k in 1usize..12,
        ) {
            prop_assume!(vs.iter().all(|v| v.iter().any(|x| *x != 0.0)));
            let idx = fixture(vs.clone());
            let hits = dense_retrieve(&idx, &query(q.clone()), k).unwrap();

            // Oracle: direct cosine and a stable sort over every chunk.
            let cos = |a: &[f64], b: &[f64]| {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                dot / (na * nb)
            };
            let mut order: Vec<usize> = (0..vs.len()).collect();
            order.sort_by(|&a, &b| cos(&q, &vs[b]).partial_cmp(&cos(&q, &vs[a])).unwrap());
            let expected: Vec<usize> = order.into_iter().take(k).collect();
            prop_assert_eq!(hits.iter().map(|h| h.chunk_ord).collect::<Vec<_>>(), expected);
            for (i, h) in hits.iter().enumerate() {
                prop_assert_eq!(h.rank, i + 1);
            }
        }
    }
}
