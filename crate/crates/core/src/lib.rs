//! Retrieval-filtered clinical summarization.
//!
//! A transcript is split into sentence chunks, scored by a BM25 retriever and
//! a dense embedding retriever, and the two rankings are merged with weighted
//! reciprocal rank fusion. The surviving chunks, restored to conversation
//! order, become the context of an Alpaca-style prompt sent to a chat model
//! whose answer is parsed into SOAP sections. The [`eval`] module holds the
//! metrics used to judge the output.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod index;
pub mod infer;
pub mod io;
pub mod retrieve;
pub mod text;
mod transport;

pub use error::{Error, Result};
