use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{prompt_hash, LlmError, ModelConfig};

/// Why a single attempt failed. Drives the retry decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SendError {
    /// Rate limit, 5xx, timeout or connection failure.
    Transient(String),
    /// Authentication or authorisation rejected.
    Credential(String),
    /// Anything else that retrying will not fix.
    Fatal(String),
    /// The mock has no response for this prompt hash.
    FixtureMiss(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, prompt: &str, config: &ModelConfig) -> Result<String, SendError>;

    /// Whether exchanges through this transport should be appended to the
    /// exchange log.
    fn records_exchanges(&self) -> bool {
        true
    }
}

/// One line of `exchanges.jsonl`. The same file is the mock fixture format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub prompt_hash: String,
    #[serde(default)]
    pub prompt: Option<String>,
    pub raw_response: String,
    #[serde(default)]
    pub model: Option<String>,
    /// Seconds since the Unix epoch.
    #[serde(default)]
    pub timestamp: Option<u64>,
}

/// Replays recorded responses keyed by prompt hash.
#[derive(Debug, Default)]
pub struct MockTransport {
    responses: HashMap<String, String>,
    hits: AtomicUsize,
}

impl MockTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = ExchangeRecord>) -> Self {
        let mut mock = Self::new();
        for r in records {
            mock.responses.insert(r.prompt_hash, r.raw_response);
        }
        mock
    }

    /// Loads an exchange log. Later lines override earlier ones for the same
    /// hash. A record with a prompt but an empty hash gets its hash computed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            LlmError::Config(format!("cannot read fixtures {}: {e}", path.display()))
        })?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut rec: ExchangeRecord = serde_json::from_str(line)
                .map_err(|e| LlmError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
            if rec.prompt_hash.is_empty() {
                match &rec.prompt {
                    Some(p) => rec.prompt_hash = prompt_hash(p),
                    None => {
                        return Err(LlmError::Config(format!(
                            "{} line {}: record has neither prompt_hash nor prompt",
                            path.display(),
                            i + 1
                        )))
                    }
                }
            }
            records.push(rec);
        }
        Ok(Self::from_records(records))
    }

    pub fn insert(&mut self, prompt: &str, response: impl Into<String>) {
        self.responses.insert(prompt_hash(prompt), response.into());
    }

    /// Number of `send` calls served so far, hits and misses alike.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Transport for MockTransport {
    fn send(&self, prompt: &str, _config: &ModelConfig) -> Result<String, SendError> {
        self.hits.fetch_add(1, Ordering::SeqCst);
        let hash = prompt_hash(prompt);
        self.responses
            .get(&hash)
            .cloned()
            .ok_or(SendError::FixtureMiss(hash))
    }

    fn records_exchanges(&self) -> bool {
        false
    }
}

/// OpenAI-compatible chat-completion client, one user message per prompt.
pub struct HttpTransport {
    http: reqwest::blocking::Client,
    endpoint_base: String,
    api_key: String,
}

impl HttpTransport {
    pub fn new(endpoint_base: &str, api_key: &str, timeout: Duration) -> Result<Self, LlmError> {
        if api_key.trim().is_empty() {
            return Err(LlmError::Credential("API key is empty".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LlmError::Config(format!("cannot build HTTP client: {e}")))?;
        Ok(Self {
            http,
            endpoint_base: endpoint_base.trim_end_matches('/').to_string(),
            api_key: api_key.to_string(),
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, prompt: &str, config: &ModelConfig) -> Result<String, SendError> {
        let body = json!({
            "model": config.model_id,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": config.temperature,
            "max_tokens": config.max_output_tokens,
        });
        let response = self
            .http
            .post(format!("{}/chat/completions", self.endpoint_base))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| SendError::Transient(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| SendError::Transient(e.to_string()))?;
        match status.as_u16() {
            200..=299 => {}
            401 | 403 => return Err(SendError::Credential(format!("HTTP {status}: {text}"))),
            408 | 429 | 500..=599 => {
                return Err(SendError::Transient(format!("HTTP {status}: {text}")))
            }
            _ => return Err(SendError::Fatal(format!("HTTP {status}: {text}"))),
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| SendError::Fatal(format!("invalid response body: {e}")))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| SendError::Fatal("response has no choices[0].message.content".into()))
    }
}
