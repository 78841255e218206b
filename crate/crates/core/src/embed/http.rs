//! Client for an OpenAI-style `/v1/embeddings` endpoint.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::transport::{self, RetryPolicy};

pub const EMBED_API_KEY_ENV: &str = "CLINICSUM_EMBED_API_KEY";

#[derive(Debug, Clone)]
pub struct HttpEmbedderConfig {
    pub base_url: String,
    pub model: String,
    pub dim: usize,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    /// Falls back to `CLINICSUM_EMBED_API_KEY` when unset.
    pub api_key: Option<String>,
}

impl HttpEmbedderConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, dim: usize) -> Self {
        HttpEmbedderConfig {
            base_url: base_url.into(),
            model: model.into(),
            dim,
            timeout: Duration::from_secs(30),
            retry: RetryPolicy::default(),
            api_key: None,
        }
    }
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

pub struct HttpEmbedder {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    dim: usize,
    retry: RetryPolicy,
    api_key: Option<String>,
}

impl HttpEmbedder {
    pub fn new(config: HttpEmbedderConfig) -> Result<Self> {
        if config.dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        let client = transport::build_client(config.timeout).map_err(Error::Provider)?;
        Ok(HttpEmbedder {
            client,
            url: format!("{}/v1/embeddings", config.base_url.trim_end_matches('/')),
            model: config.model,
            dim: config.dim,
            retry: config.retry,
            api_key: config
                .api_key
                .or_else(|| transport::api_key_from_env(EMBED_API_KEY_ENV)),
        })
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn name(&self) -> &str {
        &self.model
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_raw(&self, texts: &[&str]) -> Result<Vec<EmbeddingVector>> {
        let body = EmbeddingRequest {
            model: &self.model,
            input: texts,
        };
        let resp: EmbeddingResponse = transport::post_json(
            &self.client,
            &self.url,
            self.api_key.as_deref(),
            &body,
            self.retry,
        )
        .map_err(|e| Error::Provider(e.message()))?;

        let mut slots: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        for d in resp.data {
            let slot = slots.get_mut(d.index).ok_or_else(|| {
                Error::Provider(format!("response index {} out of range", d.index))
            })?;
            *slot = Some(EmbeddingVector::new(d.embedding)?);
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Provider(format!("no embedding for input {i}"))))
            .collect()
    }
}
