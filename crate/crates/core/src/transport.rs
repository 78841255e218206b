//! Blocking JSON-over-HTTP with bounded retries.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

#[derive(Debug)]
pub(crate) enum CallError {
    /// Worth another attempt: connect/timeout failures, 429 and 5xx.
    Transient(String),
    Fatal(String),
}

impl CallError {
    pub(crate) fn message(self) -> String {
        match self {
            CallError::Transient(m) | CallError::Fatal(m) => m,
        }
    }
}

pub(crate) fn build_client(timeout: Duration) -> Result<reqwest::blocking::Client, String> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| format!("cannot build HTTP client: {e}"))
}

pub(crate) fn post_json<B, R>(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &B,
    policy: RetryPolicy,
) -> Result<R, CallError>
where
    B: Serialize,
    R: DeserializeOwned,
{
    let attempts = policy.max_attempts.max(1);
    let mut backoff = policy.initial_backoff;
    let mut last = None;
    for attempt in 1..=attempts {
        match post_once(client, url, api_key, body) {
            Ok(r) => return Ok(r),
            Err(CallError::Fatal(m)) => return Err(CallError::Fatal(m)),
            Err(CallError::Transient(m)) => {
                tracing::warn!(url, attempt, error = %m, "transient failure");
                last = Some(m);
                if attempt < attempts {
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
            }
        }
    }
    Err(CallError::Transient(format!(
        "gave up after {attempts} attempts: {}",
        last.unwrap_or_default()
    )))
}

fn post_once<B, R>(
    client: &reqwest::blocking::Client,
    url: &str,
    api_key: Option<&str>,
    body: &B,
) -> Result<R, CallError>
where
    B: Serialize,
    R: DeserializeOwned,
{
    let mut req = client.post(url).json(body);
    if let Some(key) = api_key {
        req = req.bearer_auth(key);
    }
    let resp = req
        .send()
        .map_err(|e| CallError::Transient(format!("request to {url} failed: {e}")))?;
    let status = resp.status();
    if status.is_server_error() || status.as_u16() == 429 {
        return Err(CallError::Transient(format!("{url} returned {status}")));
    }
    if !status.is_success() {
        let text = resp.text().unwrap_or_default();
        return Err(CallError::Fatal(format!("{url} returned {status}: {text}")));
    }
    let bytes = resp
        .bytes()
        .map_err(|e| CallError::Transient(format!("reading body from {url}: {e}")))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CallError::Fatal(format!("malformed response from {url}: {e}")))
}

pub(crate) fn api_key_from_env(var: &str) -> Option<String> {
    std::env::var(var).ok().filter(|k| !k.is_empty())
}
