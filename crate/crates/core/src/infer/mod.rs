//! Prompt assembly, model clients, SOAP parsing and the end-to-end pipeline.

pub mod generator;
pub mod pipeline;
pub mod prompt;
pub mod soap;
pub mod tokenizer;

pub use generator::{
    generate_summary, ChatClient, ChatClientConfig, Generator, StubGenerator, LLM_API_KEY_ENV,
};
pub use pipeline::{summarize_pipeline, Pipeline, PipelineOutput, SummaryRecord};
pub use prompt::{render_prompt, PromptTemplate, ALPACA_HEADER, DEFAULT_INSTRUCTION};
pub use soap::{parse_soap, SoapSection, SoapSections, SoapSummary};
pub use tokenizer::{Tokenizer, TokenizerKind, WhitespaceTokenizer, WordTokenizer};
