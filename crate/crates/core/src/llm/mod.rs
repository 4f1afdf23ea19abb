//! Chat-completion access and response parsing.
//!
//! [`Client`] wraps a [`Transport`] (live HTTP or recorded-response mock) with
//! retries, exponential backoff shared across threads, an in-flight bound and
//! an append-only exchange log. The parsers are pure functions.

mod parse;
mod transport;

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use parse::{
    parse_augmentation, parse_verdict, AugmentParseError, AugmentationPayload, Verdict,
    VerdictValue, CODE_FIELDS,
};
pub use transport::{ExchangeRecord, HttpTransport, MockTransport, SendError, Transport};

pub const API_KEY_ENV: &str = "LOGICERR_API_KEY";
pub const API_BASE_ENV: &str = "LOGICERR_API_BASE";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("credential error: {0}")]
    Credential(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("no mock fixture for prompt hash {hash}")]
    Fixture { hash: String },
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Base of the exponential backoff, in seconds. Attempt `n` (1-based)
    /// waits `base * 2^(n-1)` before attempt `n + 1`.
    pub backoff: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 4,
            backoff: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TransportKind {
    Live,
    Mock { fixture_path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub endpoint_base: String,
    /// Per-request timeout in seconds.
    pub timeout: f64,
    pub retry: RetryPolicy,
    pub transport: TransportKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model_id: "gpt-3.5-turbo".into(),
            temperature: 0.0,
            max_output_tokens: 1024,
            endpoint_base: "https://api.openai.com/v1".into(),
            timeout: 60.0,
            retry: RetryPolicy::default(),
            transport: TransportKind::Live,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if self.retry.max_attempts < 1 {
            return Err(LlmError::Config(
                "retry.max_attempts must be at least 1".into(),
            ));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(LlmError::Config("timeout must be positive".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::Config("temperature must be >= 0".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(LlmError::Config(
                "max_output_tokens must be positive".into(),
            ));
        }
        if !(self.retry.backoff >= 0.0 && self.retry.backoff.is_finite()) {
            return Err(LlmError::Config("retry.backoff must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub prompt_text: String,
    pub raw_response: String,
    pub model_id: String,
    /// Seconds spent across all attempts.
    pub latency: f64,
    pub attempt_count: u32,
}

/// SHA-256 of the exact prompt bytes, lowercase hex.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Counting semaphore bounding concurrent requests.
struct Permits {
    available: Mutex<usize>,
    freed: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

/// Append-only `exchanges.jsonl` writer.
pub struct ExchangeLog {
    file: Mutex<File>,
}

impl ExchangeLog {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, record: &ExchangeRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record).map_err(std::io::Error::other)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(line.as_bytes())?;
        f.flush()
    }
}

pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;

pub struct Client {
    transport: Box<dyn Transport>,
    permits: Permits,
    /// Earliest instant any request may start; pushed forward on transient
    /// failures so every thread backs off together.
    not_before: Mutex<Option<Instant>>,
    log: Option<ExchangeLog>,
}

impl Client {
    pub fn new(transport: Box<dyn Transport>, max_in_flight: usize) -> Self {
        Self {
            transport,
            permits: Permits::new(max_in_flight),
            not_before: Mutex::new(None),
            log: None,
        }
    }

    pub fn with_log(mut self, log: ExchangeLog) -> Self {
        self.log = Some(log);
        self
    }

    /// Builds the transport named by `config.transport`. Live transport reads
    /// the key from `LOGICERR_API_KEY`.
    pub fn from_config(config: &ModelConfig, max_in_flight: usize) -> Result<Self, LlmError> {
        config.validate()?;
        let transport: Box<dyn Transport> = match &config.transport {
            TransportKind::Mock { fixture_path } => Box::new(MockTransport::load(fixture_path)?),
            TransportKind::Live => {
                let key = std::env::var(API_KEY_ENV)
                    .map_err(|_| LlmError::Credential(format!("{API_KEY_ENV} is not set")))?;
                Box::new(HttpTransport::new(
                    &config.endpoint_base,
                    &key,
                    Duration::from_secs_f64(config.timeout),
                )?)
            }
        };
        Ok(Self::new(transport, max_in_flight))
    }

    pub fn transport(&self) -> &dyn Transport {
        self.transport.as_ref()
    }

    fn wait_for_gate(&self) {
        loop {
            let until = *self.not_before.lock().unwrap_or_else(|e| e.into_inner());
            match until {
                Some(t) if t > Instant::now() => std::thread::sleep(t - Instant::now()),
                _ => return,
            }
        }
    }

    fn push_gate(&self, delay: Duration) {
        let mut gate = self.not_before.lock().unwrap_or_else(|e| e.into_inner());
        let candidate = Instant::now() + delay;
        if gate.is_none_or(|t| t < candidate) {
            *gate = Some(candidate);
        }
    }

    pub fn complete(&self, prompt: &str, config: &ModelConfig) -> Result<ChatExchange, LlmError> {
        config.validate()?;
        let started = Instant::now();
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.wait_for_gate();
            let outcome = {
                let _permit = self.permits.acquire();
                self.transport.send(prompt, config)
            };
            match outcome {
                Ok(raw_response) => {
                    let exchange = ChatExchange {
                        prompt_text: prompt.to_string(),
                        raw_response,
                        model_id: config.model_id.clone(),
                        latency: started.elapsed().as_secs_f64(),
                        attempt_count: attempts,
                    };
                    self.record(&exchange);
                    return Ok(exchange);
                }
                Err(SendError::Credential(msg)) => return Err(LlmError::Credential(msg)),
                Err(SendError::FixtureMiss(hash)) => return Err(LlmError::Fixture { hash }),
                Err(SendError::Fatal(message)) => {
                    return Err(LlmError::Transport { attempts, message })
                }
                Err(SendError::Transient(message)) => {
                    if attempts >= config.retry.max_attempts {
                        return Err(LlmError::Transport { attempts, message });
                    }
                    let delay = config.retry.backoff * 2f64.powi(attempts as i32 - 1);
                    log::warn!("transient failure (attempt {attempts}): {message}; retrying in {delay:.3}s");
                    self.push_gate(Duration::from_secs_f64(delay));
                }
            }
        }
    }

    fn record(&self, exchange: &ChatExchange) {
        let Some(log) = &self.log else { return };
        if !self.transport.records_exchanges() {
            return;
        }
        let record = ExchangeRecord {
            prompt_hash: prompt_hash(&exchange.prompt_text),
            prompt: Some(exchange.prompt_text.clone()),
            raw_response: exchange.raw_response.clone(),
            model: Some(exchange.model_id.clone()),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs()),
        };
        if let Err(e) = log.append(&record) {
            log::error!("failed to append to exchange log: {e}");
        }
    }
}
