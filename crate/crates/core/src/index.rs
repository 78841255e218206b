//! Per-transcript chunk index: sentences, unit vectors and BM25 statistics.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{chunk_transcript, Chunk, Transcript};
use crate::embed::{embed_batch, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::text;

pub const INDEX_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::Config(format!(
                "bm25 k1 must be >= 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Config(format!(
                "bm25 b must be in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Stats {
    pub doc_freq: BTreeMap<String, usize>,
    pub doc_len: Vec<usize>,
    pub avgdl: f64,
    pub k1: f64,
    pub b: f64,
    pub n_docs: usize,
    /// Term counts per chunk; derived from chunk text, never persisted.
    pub term_freqs: Vec<BTreeMap<String, usize>>,
}

impl Bm25Stats {
    pub fn compute<S: AsRef<str>>(docs: &[S], params: Bm25Params) -> Self {
        let term_freqs: Vec<BTreeMap<String, usize>> = docs
            .iter()
            .map(|d| {
                let mut tf = BTreeMap::new();
                for t in text::terms(d.as_ref()) {
                    *tf.entry(t).or_insert(0) += 1;
                }
                tf
            })
            .collect();
        let doc_len: Vec<usize> = term_freqs.iter().map(|tf| tf.values().sum()).collect();
        let mut doc_freq = BTreeMap::new();
        for tf in &term_freqs {
            for term in tf.keys() {
                *doc_freq.entry(term.clone()).or_insert(0) += 1;
            }
        }
        let n_docs = docs.len();
        Bm25Stats {
            avgdl: mean_len(&doc_len),
            doc_freq,
            doc_len,
            k1: params.k1,
            b: params.b,
            n_docs,
            term_freqs,
        }
    }

    pub fn params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.k1,
            b: self.b,
        }
    }

    /// Okapi idf with the +1 inside the log, so it never goes negative.
    pub fn idf(&self, term: &str) -> f64 {
        let Some(&df) = self.doc_freq.get(term) else {
            return 0.0;
        };
        let (n, df) = (self.n_docs as f64, df as f64);
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }
}

fn mean_len(lens: &[usize]) -> f64 {
    if lens.is_empty() {
        0.0
    } else {
        lens.iter().sum::<usize>() as f64 / lens.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkIndex {
    pub transcript_id: String,
    pub chunks: Vec<Chunk>,
    pub vectors: Vec<EmbeddingVector>,
    pub bm25: Bm25Stats,
    pub provider: String,
    pub dim: usize,
}

impl ChunkIndex {
    /// Assembles an index from precomputed vectors. Vectors are stored as
    /// given; callers going through [`build_index`] get unit vectors.
    pub fn from_parts(
        transcript_id: impl Into<String>,
        chunks: Vec<Chunk>,
        vectors: Vec<EmbeddingVector>,
        provider: impl Into<String>,
        params: Bm25Params,
    ) -> Result<Self> {
        let transcript_id = transcript_id.into();
        if chunks.is_empty() {
            return Err(Error::EmptyTranscript(transcript_id));
        }
        params.validate()?;
        if chunks.len() != vectors.len() {
            return Err(Error::Precondition(format!(
                "{} chunks but {} vectors",
                chunks.len(),
                vectors.len()
            )));
        }
        if let Some(c) = chunks.iter().enumerate().find(|(i, c)| c.ord != *i) {
            return Err(Error::Precondition(format!(
                "chunk ords must run 0..n in order; position {} has ord {}",
                c.0, c.1.ord
            )));
        }
        let dim = vectors[0].dim();
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: v.dim(),
            });
        }
        let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
        let bm25 = Bm25Stats::compute(&texts, params);
        Ok(ChunkIndex {
            transcript_id,
            chunks,
            vectors,
            bm25,
            provider: provider.into(),
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunk(&self, ord: usize) -> Option<&Chunk> {
        self.chunks.get(ord)
    }
}

pub fn build_index(
    transcript: &Transcript,
    provider: &dyn EmbeddingProvider,
) -> Result<ChunkIndex> {
    build_index_with(transcript, provider, Bm25Params::default())
}

pub fn build_index_with(
    transcript: &Transcript,
    provider: &dyn EmbeddingProvider,
    params: Bm25Params,
) -> Result<ChunkIndex> {
    let chunks = chunk_transcript(transcript)?;
    if chunks.is_empty() {
        return Err(Error::EmptyTranscript(transcript.id.clone()));
    }
    params.validate()?;
    let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
    let vectors = embed_batch(provider, &texts)?;
    ChunkIndex::from_parts(
        transcript.id.clone(),
        chunks,
        vectors,
        provider.name(),
        params,
    )
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    version: u64,
    transcript_id: String,
    provider: String,
    dim: usize,
    k1: f64,
    b: f64,
    chunks: Vec<ChunkRecord>,
    vectors: Vec<Vec<f64>>,
    doc_len: Vec<usize>,
    doc_freq: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct ChunkRecord {
    ord: usize,
    text: String,
}

pub fn index_to_json(index: &ChunkIndex) -> String {
    let file = IndexFile {
        version: INDEX_FORMAT_VERSION,
        transcript_id: index.transcript_id.clone(),
        provider: index.provider.clone(),
        dim: index.dim,
        k1: index.bm25.k1,
        b: index.bm25.b,
        chunks: index
            .chunks
            .iter()
            .map(|c| ChunkRecord {
                ord: c.ord,
                text: c.text.clone(),
            })
            .collect(),
        vectors: index.vectors.iter().map(|v| v.values().to_vec()).collect(),
        doc_len: index.bm25.doc_len.clone(),
        doc_freq: index.bm25.doc_freq.clone(),
    };
    serde_json::to_string(&file).expect("index serializes")
}

fn corrupt(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        message: message.into(),
    }
}

pub fn index_from_json(body: &str) -> Result<ChunkIndex> {
    let raw: serde_json::Value = serde_json::from_str(body).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let version = raw
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| corrupt("missing or non-integer \"version\""))?;
    if version != INDEX_FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: INDEX_FORMAT_VERSION,
        });
    }
    let file: IndexFile = serde_json::from_value(raw).map_err(|e| corrupt(e.to_string()))?;

    let chunks: Vec<Chunk> = file
        .chunks
        .into_iter()
        .map(|c| Chunk {
            transcript_id: file.transcript_id.clone(),
            ord: c.ord,
            text: c.text,
        })
        .collect();
    let vectors = file
        .vectors
        .into_iter()
        .map(EmbeddingVector::new)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| corrupt(e.to_string()))?;
    let index = ChunkIndex::from_parts(
        file.transcript_id,
        chunks,
        vectors,
        file.provider,
        Bm25Params {
            k1: file.k1,
            b: file.b,
        },
    )
    .map_err(|e| corrupt(e.to_string()))?;
    if index.dim != file.dim {
        return Err(corrupt(format!(
            "header dim {} but vectors have {}",
            file.dim, index.dim
        )));
    }
    if index.bm25.doc_len != file.doc_len || index.bm25.doc_freq != file.doc_freq {
        return Err(corrupt("BM25 statistics do not match chunk text"));
    }
    Ok(index)
}

pub fn save_index(index: &ChunkIndex, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, index_to_json(index).as_bytes())
}

pub fn load_index(path: &Path) -> Result<ChunkIndex> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    index_from_json(&body)
}
