//! Retrieval-filtered summarization of one transcript.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::generator::{generate_summary, Generator};
use super::prompt::{render_prompt, DEFAULT_INSTRUCTION};
use super::soap::{parse_soap, SoapSection, SoapSections, SoapSummary};
use super::tokenizer::Tokenizer;
use crate::corpus::{flatten_diarized, Transcript};
use crate::embed::EmbeddingProvider;
use crate::error::{Error, Result};
use crate::index::Bm25Params;
use crate::retrieve::{filter_transcript, FusedContext, FusionConfig, RetrievalQuery};

/// Everything a summarization run needs besides the transcript.
pub struct Pipeline<'a> {
    pub provider: &'a dyn EmbeddingProvider,
    pub generator: &'a dyn Generator,
    pub tokenizer: &'a dyn Tokenizer,
    pub query: RetrievalQuery,
    pub fusion: FusionConfig,
    pub bm25: Bm25Params,
    pub instruction: String,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        provider: &'a dyn EmbeddingProvider,
        generator: &'a dyn Generator,
        tokenizer: &'a dyn Tokenizer,
    ) -> Self {
        Pipeline {
            provider,
            generator,
            tokenizer,
            query: RetrievalQuery::default(),
            fusion: FusionConfig::default(),
            bm25: Bm25Params::default(),
            instruction: DEFAULT_INSTRUCTION.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub transcript_id: String,
    /// Parsed sections; incomplete when `missing_sections` is non-empty.
    pub soap: SoapSummary,
    pub missing_sections: Vec<SoapSection>,
    pub context: FusedContext,
    pub prompt: String,
    pub context_tokens: usize,
    pub transcript_tokens: usize,
    pub latency: Duration,
}

impl PipelineOutput {
    pub fn is_complete(&self) -> bool {
        self.missing_sections.is_empty()
    }

    pub fn record(&self) -> SummaryRecord {
        SummaryRecord {
            id: self.transcript_id.clone(),
            soap: self.soap.sections(),
            raw: self.soap.raw_text.clone(),
            context_tokens: self.context_tokens,
            transcript_tokens: self.transcript_tokens,
        }
    }
}

/// On-disk summary layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub id: String,
    pub soap: SoapSections,
    pub raw: String,
    pub context_tokens: usize,
    pub transcript_tokens: usize,
}

/// filter → prompt → generate → parse. A response missing SOAP sections is
/// not an error here: the partial parse and raw text come back with
/// `missing_sections` filled in so callers can persist them.
pub fn summarize_pipeline(
    transcript: &Transcript,
    pipeline: &Pipeline<'_>,
) -> Result<PipelineOutput> {
    let started = Instant::now();
    let flat = flatten_diarized(transcript)?;
    let context = filter_transcript(
        transcript,
        pipeline.provider,
        &pipeline.query,
        &pipeline.fusion,
        pipeline.bm25,
    )?;
    let prompt = render_prompt(&pipeline.instruction, &context.concatenated_text)?;
    let raw = generate_summary(pipeline.generator, &prompt)?;
    let (soap, missing_sections) = match parse_soap(&raw) {
        Ok(s) => (s, Vec::new()),
        Err(Error::PartialSoap { missing, partial }) => (*partial, missing),
        Err(e) => return Err(e),
    };
    Ok(PipelineOutput {
        transcript_id: transcript.id.clone(),
        soap,
        missing_sections,
        context_tokens: pipeline.tokenizer.count(&context.concatenated_text),
        transcript_tokens: pipeline.tokenizer.count(&flat),
        context,
        prompt,
        latency: started.elapsed(),
    })
}
