//! TOML configuration with command-line overrides.
//!
//! A key `section.key` in the file is overridden by the flag `--key`; where two
//! sections share a key name (`kind`, `base_url`, `model`, `timeout_secs`) the
//! flag carries the section as a prefix, e.g. `--embedding-base-url`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Args;
use serde::Deserialize;

use clinicsum_core::index::Bm25Params;
use clinicsum_core::infer::prompt::DEFAULT_INSTRUCTION;
use clinicsum_core::infer::TokenizerKind;
use clinicsum_core::retrieve::{FusionConfig, DEFAULT_RETRIEVAL_QUERY};

use crate::CliError;

pub const DEFAULT_DIM: usize = 384;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tokenizer: Option<String>,
    #[serde(default)]
    pub embedding: EmbeddingFile,
    #[serde(default)]
    pub generator: GeneratorFile,
    #[serde(default)]
    pub fusion: FusionFile,
    #[serde(default)]
    pub bm25: Bm25File,
    #[serde(default)]
    pub prompt: PromptFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingFile {
    pub kind: Option<String>,
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub dim: Option<usize>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub kind: Option<String>,
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub timeout_secs: Option<u64>,
    /// Canned answer for the stub generator; without it the stub echoes.
    pub stub_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionFile {
    pub w_sparse: Option<f64>,
    pub w_dense: Option<f64>,
    pub rrf_lambda: Option<f64>,
    pub top_k_per_retriever: Option<usize>,
    pub top_k_final: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bm25File {
    pub k1: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptFile {
    pub query: Option<String>,
    pub instruction: Option<String>,
}

/// Flags that override config-file keys.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub tokenizer: Option<String>,

    #[arg(long, global = true, help_heading = "Embedding")]
    pub embedding_kind: Option<String>,
    #[arg(long, global = true, help_heading = "Embedding")]
    pub embedding_base_url: Option<String>,
    #[arg(long, global = true, help_heading = "Embedding")]
    pub embedding_model: Option<String>,
    #[arg(long, global = true, help_heading = "Embedding")]
    pub dim: Option<usize>,
    #[arg(long, global = true, help_heading = "Embedding")]
    pub embedding_timeout_secs: Option<u64>,

    #[arg(long, global = true, help_heading = "Generator")]
    pub generator_kind: Option<String>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub generator_base_url: Option<String>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub generator_model: Option<String>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub temperature: Option<f64>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub max_tokens: Option<u32>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub generator_timeout_secs: Option<u64>,
    #[arg(long, global = true, help_heading = "Generator")]
    pub stub_file: Option<PathBuf>,

    #[arg(long, global = true, help_heading = "Fusion")]
    pub w_sparse: Option<f64>,
    #[arg(long, global = true, help_heading = "Fusion")]
    pub w_dense: Option<f64>,
    #[arg(long, global = true, help_heading = "Fusion")]
    pub rrf_lambda: Option<f64>,
    #[arg(long, global = true, help_heading = "Fusion")]
    pub top_k_per_retriever: Option<usize>,
    #[arg(long, global = true, help_heading = "Fusion")]
    pub top_k_final: Option<usize>,

    #[arg(long, global = true, help_heading = "BM25")]
    pub k1: Option<f64>,
    #[arg(long, global = true, help_heading = "BM25")]
    pub b: Option<f64>,

    #[arg(long, global = true, help_heading = "Prompt")]
    pub query: Option<String>,
    #[arg(long, global = true, help_heading = "Prompt")]
    pub instruction: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSettings {
    Test {
        dim: usize,
    },
    Http {
        base_url: String,
        model: String,
        dim: usize,
        timeout: Duration,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSettings {
    Stub {
        canned: Option<PathBuf>,
    },
    Http {
        base_url: String,
        model: String,
        temperature: f64,
        max_tokens: u32,
        timeout: Duration,
    },
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub embedding: EmbeddingSettings,
    pub generator: GeneratorSettings,
    pub fusion: FusionConfig,
    pub bm25: Bm25Params,
    pub query: String,
    pub instruction: String,
    pub tokenizer: TokenizerKind,
}

impl AppConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let body = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&body)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        Self::resolve(file, overrides)
    }

    pub fn resolve(file: FileConfig, o: &Overrides) -> Result<Self, CliError> {
        let usage = CliError::Usage;

        let tokenizer = match o.tokenizer.clone().or(file.tokenizer) {
            Some(s) => s
                .parse()
                .map_err(|e: clinicsum_core::Error| usage(e.to_string()))?,
            None => TokenizerKind::default(),
        };

        let e = file.embedding;
        let dim = o.dim.or(e.dim).unwrap_or(DEFAULT_DIM);
        if dim < 2 {
            return Err(usage(format!("dim must be at least 2, got {dim}")));
        }
        let embedding = match o
            .embedding_kind
            .clone()
            .or(e.kind)
            .as_deref()
            .unwrap_or("test")
        {
            "test" => EmbeddingSettings::Test { dim },
            "http" => EmbeddingSettings::Http {
                base_url: o.embedding_base_url.clone().or(e.base_url).ok_or_else(|| {
                    usage("embedding.base_url is required for kind = \"http\"".into())
                })?,
                model: o.embedding_model.clone().or(e.model).ok_or_else(|| {
                    usage("embedding.model is required for kind = \"http\"".into())
                })?,
                dim,
                timeout: Duration::from_secs(
                    o.embedding_timeout_secs.or(e.timeout_secs).unwrap_or(30),
                ),
            },
            other => {
                return Err(usage(format!(
                    "unknown embedding kind {other:?} (expected test or http)"
                )))
            }
        };

        let g = file.generator;
        let generator = match o
            .generator_kind
            .clone()
            .or(g.kind)
            .as_deref()
            .unwrap_or("stub")
        {
            "stub" => GeneratorSettings::Stub {
                canned: o.stub_file.clone().or(g.stub_file),
            },
            "http" => {
                let temperature = o.temperature.or(g.temperature).unwrap_or(0.0);
                if !(temperature.is_finite() && temperature >= 0.0) {
                    return Err(usage(format!(
                        "temperature must be >= 0, got {temperature}"
                    )));
                }
                GeneratorSettings::Http {
                    base_url: o.generator_base_url.clone().or(g.base_url).ok_or_else(|| {
                        usage("generator.base_url is required for kind = \"http\"".into())
                    })?,
                    model: o.generator_model.clone().or(g.model).ok_or_else(|| {
                        usage("generator.model is required for kind = \"http\"".into())
                    })?,
                    temperature,
                    max_tokens: o.max_tokens.or(g.max_tokens).unwrap_or(1024),
                    timeout: Duration::from_secs(
                        o.generator_timeout_secs.or(g.timeout_secs).unwrap_or(120),
                    ),
                }
            }
            other => {
                return Err(usage(format!(
                    "unknown generator kind {other:?} (expected stub or http)"
                )))
            }
        };

        let d = FusionConfig::default();
        let f = file.fusion;
        let fusion = FusionConfig {
            w_sparse: o.w_sparse.or(f.w_sparse).unwrap_or(d.w_sparse),
            w_dense: o.w_dense.or(f.w_dense).unwrap_or(d.w_dense),
            rrf_lambda: o.rrf_lambda.or(f.rrf_lambda).unwrap_or(d.rrf_lambda),
            top_k_per_retriever: o
                .top_k_per_retriever
                .or(f.top_k_per_retriever)
                .unwrap_or(d.top_k_per_retriever),
            top_k_final: o.top_k_final.or(f.top_k_final).unwrap_or(d.top_k_final),
        };
        fusion.validate().map_err(|e| usage(e.to_string()))?;

        let bd = Bm25Params::default();
        let bm25 = Bm25Params {
            k1: o.k1.or(file.bm25.k1).unwrap_or(bd.k1),
            b: o.b.or(file.bm25.b).unwrap_or(bd.b),
        };
        bm25.validate().map_err(|e| usage(e.to_string()))?;

        let query = o
            .query
            .clone()
            .or(file.prompt.query)
            .unwrap_or_else(|| DEFAULT_RETRIEVAL_QUERY.to_string());
        let instruction = o
            .instruction
            .clone()
            .or(file.prompt.instruction)
            .unwrap_or_else(|| DEFAULT_INSTRUCTION.to_string());
        if query.trim().is_empty() || instruction.trim().is_empty() {
            return Err(usage("query and instruction must be non-empty".into()));
        }

        Ok(AppConfig {
            embedding,
            generator,
            fusion,
            bm25,
            query,
            instruction,
            tokenizer,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(body: &str) -> FileConfig {
        toml::from_str(body).unwrap()
    }

    #[test]
    fn defaults_without_file() {
        let c = AppConfig::resolve(FileConfig::default(), &Overrides::default()).unwrap();
        assert_eq!(c.embedding, EmbeddingSettings::Test { dim: DEFAULT_DIM });
        assert_eq!(c.generator, GeneratorSettings::Stub { canned: None });
        assert_eq!(c.fusion, FusionConfig::default());
        assert_eq!(c.query, DEFAULT_RETRIEVAL_QUERY);
    }

    #[test]
    fn flags_override_file() {
        let file = parse(
            r#"
            tokenizer = "words"
            [embedding]
            kind = "test"
            dim = 16
            [fusion]
            w_sparse = 0.7
            w_dense = 0.3
            top_k_final = 5
            [bm25]
            k1 = 1.5
            "#,
        );
        let o = Overrides {
            dim: Some(8),
            top_k_final: Some(9),
            ..Default::default()
        };
        let c = AppConfig::resolve(file, &o).unwrap();
        assert_eq!(c.embedding, EmbeddingSettings::Test { dim: 8 });
        assert_eq!((c.fusion.w_sparse, c.fusion.top_k_final), (0.7, 9));
        assert_eq!(c.bm25.k1, 1.5);
        assert_eq!(c.tokenizer, TokenizerKind::Words);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        assert!(toml::from_str::<FileConfig>("[fusion]\nbogus = 1").is_err());
        for o in [
            Overrides {
                dim: Some(1),
                ..Default::default()
            },
            Overrides {
                w_sparse: Some(0.9),
                ..Default::default()
            },
            Overrides {
                embedding_kind: Some("http".into()),
                ..Default::default()
            },
            Overrides {
                generator_kind: Some("nope".into()),
                ..Default::default()
            },
            Overrides {
                generator_kind: Some("http".into()),
                generator_base_url: Some("http://x".into()),
                generator_model: Some("m".into()),
                temperature: Some(-1.0),
                ..Default::default()
            },
        ] {
            assert!(
                matches!(
                    AppConfig::resolve(FileConfig::default(), &o),
                    Err(CliError::Usage(_))
                ),
                "{o:?}"
            );
        }
    }
}
