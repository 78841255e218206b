//! Text generation backends.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::{self, RetryPolicy};

pub const LLM_API_KEY_ENV: &str = "CLINICSUM_LLM_API_KEY";

/// A completion backend. Shared across worker threads during batch runs.
pub trait Generator: Send + Sync {
    fn name(&self) -> &str;

    /// Returns the model's text for `prompt`, possibly empty.
    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Sends `prompt` to `generator` and rejects empty answers.
pub fn generate_summary(generator: &dyn Generator, prompt: &str) -> Result<String> {
    if prompt.trim().is_empty() {
        return Err(Error::Precondition("prompt is empty".into()));
    }
    let text = generator.complete(prompt)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyResponse);
    }
    Ok(text)
}

#[derive(Debug, Clone)]
pub struct ChatClientConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    /// Falls back to `CLINICSUM_LLM_API_KEY` when unset.
    pub api_key: Option<String>,
}

impl ChatClientConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        ChatClientConfig {
            base_url: base_url.into(),
            model: model.into(),
            temperature: 0.0,
            max_tokens: 1024,
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
            api_key: None,
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    #[serde(default)]
    content: Option<String>,
}

/// Client for an OpenAI-compatible `/v1/chat/completions` endpoint.
pub struct ChatClient {
    client: reqwest::blocking::Client,
    url: String,
    config: ChatClientConfig,
}

impl ChatClient {
    pub fn new(mut config: ChatClientConfig) -> Result<Self> {
        if !(config.temperature.is_finite() && config.temperature >= 0.0) {
            return Err(Error::Config(format!(
                "temperature must be >= 0, got {}",
                config.temperature
            )));
        }
        if config.api_key.is_none() {
            config.api_key = transport::api_key_from_env(LLM_API_KEY_ENV);
        }
        let client = transport::build_client(config.timeout).map_err(Error::Generation)?;
        Ok(ChatClient {
            client,
            url: format!(
                "{}/v1/chat/completions",
                config.base_url.trim_end_matches('/')
            ),
            config,
        })
    }
}

impl Generator for ChatClient {
    fn name(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        let body = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let resp: ChatResponse = transport::post_json(
            &self.client,
            &self.url,
            self.config.api_key.as_deref(),
            &body,
            self.config.retry,
        )
        .map_err(|e| Error::Generation(e.message()))?;
        let first = resp
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Error::Generation("response has no choices".into()))?;
        Ok(first.message.content.unwrap_or_default())
    }
}

/// Offline generator for tests and dry runs.
#[derive(Debug, Clone)]
pub enum StubGenerator {
    /// Always answers with this text.
    Canned(String),
    /// Answers with the prompt itself.
    Echo,
}

impl Generator for StubGenerator {
    fn name(&self) -> &str {
        match self {
            StubGenerator::Canned(_) => "stub-canned",
            StubGenerator::Echo => "stub-echo",
        }
    }

    fn complete(&self, prompt: &str) -> Result<String> {
        Ok(match self {
            StubGenerator::Canned(text) => text.clone(),
            StubGenerator::Echo => prompt.to_string(),
        })
    }
}
