//! Generic chat-completion client: one JSON request shape, bearer auth from
//! an environment variable, bounded retries with jittered exponential
//! backoff, and a token bucket on request starts.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::HarnessError;

fn default_max_tokens() -> u32 {
    512
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_max_attempts() -> u32 {
    3
}
fn default_backoff_base_ms() -> u64 {
    500
}
fn default_backoff_max_ms() -> u64 {
    30_000
}
fn default_max_concurrent() -> usize {
    1
}

/// Connection and sampling settings for one remote endpoint, as written in
/// the config file. Credentials come only from the named environment
/// variable and are never persisted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteSpec {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Total calls allowed per instance (1 = no retries).
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_backoff_max_ms")]
    pub backoff_max_ms: u64,
    #[serde(default = "default_max_concurrent")]
    pub max_concurrent: usize,
    /// Token-bucket refill rate; unlimited when absent.
    #[serde(default)]
    pub requests_per_second: Option<f64>,
}

impl RemoteSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.temperature < 0.0 {
            return Err(HarnessError::BadSpec("temperature must be >= 0".into()));
        }
        if self.max_attempts == 0 {
            return Err(HarnessError::BadSpec("max_attempts must be >= 1".into()));
        }
        if self.max_concurrent == 0 {
            return Err(HarnessError::BadSpec("max_concurrent must be >= 1".into()));
        }
        if let Some(rps) = self.requests_per_second {
            if rps <= 0.0 {
                return Err(HarnessError::BadSpec("requests_per_second must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// What one remote interaction produced: either raw text or a transport
/// error after all retries, plus how many calls it took.
#[derive(Debug, Clone)]
pub struct RemoteOutcome {
    pub raw: Option<String>,
    pub error: Option<String>,
    pub attempts: u32,
    pub latency_ms: u64,
}

/// Token bucket limiting request starts. Capacity equals the configured
/// concurrency so a full pipeline can start at once, then refills at the
/// configured rate.
struct TokenBucket {
    tokens: f64,
    capacity: f64,
    rate: f64,
    last: Instant,
}

impl TokenBucket {
    fn new(capacity: usize, rate: Option<f64>) -> Option<Mutex<Self>> {
        rate.map(|rate| {
            Mutex::new(TokenBucket {
                tokens: capacity as f64,
                capacity: capacity as f64,
                rate,
                last: Instant::now(),
            })
        })
    }

    /// Blocks until a token is available, then consumes it.
    fn take(bucket: &Mutex<Self>) {
        loop {
            let wait = {
                let mut b = bucket.lock().unwrap();
                let now = Instant::now();
                b.tokens =
                    (b.tokens + now.duration_since(b.last).as_secs_f64() * b.rate).min(b.capacity);
                b.last = now;
                if b.tokens >= 1.0 {
                    b.tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - b.tokens) / b.rate)
            };
            std::thread::sleep(wait);
        }
    }
}

pub(super) struct RemoteClient {
    spec: RemoteSpec,
    http: reqwest::blocking::Client,
    auth: Option<String>,
    bucket: Option<Mutex<TokenBucket>>,
}

impl RemoteClient {
    /// Resolves credentials and builds the HTTP client. An unset credential
    /// variable is a hard error before any request goes out.
    pub(super) fn new(spec: &RemoteSpec) -> Result<Self, HarnessError> {
        spec.validate()?;
        let auth = match &spec.auth_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| HarnessError::MissingCredentials(var.clone()))?,
            ),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(spec.timeout_secs))
            .build()
            .map_err(|e| HarnessError::BadSpec(format!("http client: {e}")))?;
        Ok(RemoteClient {
            bucket: TokenBucket::new(spec.max_concurrent, spec.requests_per_second),
            spec: spec.clone(),
            http,
            auth,
        })
    }

    /// Sends the prompt as a single user message and returns the first text
    /// block of the reply. Retries transient failures (connect/timeout,
    /// 408, 429, 5xx) up to `max_attempts` total calls with jittered
    /// exponential backoff; every other failure is terminal immediately.
    pub(super) fn respond(&self, prompt: &str) -> RemoteOutcome {
        let started = Instant::now();
        let body = json!({
            "model": self.spec.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_tokens,
        });
        let mut attempts = 0;
        let mut last_error = String::new();
        while attempts < self.spec.max_attempts {
            if attempts > 0 {
                std::thread::sleep(self.backoff(attempts));
            }
            if let Some(bucket) = &self.bucket {
                TokenBucket::take(bucket);
            }
            attempts += 1;
            let mut request = self.http.post(&self.spec.endpoint).json(&body);
            if let Some(token) = &self.auth {
                request = request.bearer_auth(token);
            }
            match request.send() {
                Err(e) => {
                    last_error = format!("transport: {e}");
                    continue;
                }
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        return match response
                            .json::<serde_json::Value>()
                            .map_err(|e| format!("malformed reply: not JSON: {e}"))
                            .and_then(|v| extract_text(&v))
                        {
                            Ok(text) => RemoteOutcome {
                                raw: Some(text),
                                error: None,
                                attempts,
                                latency_ms: started.elapsed().as_millis() as u64,
                            },
                            // A malformed body is recorded, not retried:
                            // the endpoint answered, it just isn't usable.
                            Err(e) => self.failure(e, attempts, started),
                        };
                    }
                    let retryable = status.as_u16() == 408
                        || status.as_u16() == 429
                        || status.is_server_error();
                    last_error = format!("http status {status}");
                    if !retryable {
                        return self.failure(last_error, attempts, started);
                    }
                }
            }
        }
        self.failure(last_error, attempts, started)
    }

    fn failure(&self, error: String, attempts: u32, started: Instant) -> RemoteOutcome {
        RemoteOutcome {
            raw: None,
            error: Some(error),
            attempts,
            latency_ms: started.elapsed().as_millis() as u64,
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let base = self.spec.backoff_base_ms.saturating_mul(1u64 << (attempt - 1).min(16));
        let capped = base.min(self.spec.backoff_max_ms);
        // +-25% jitter so synchronized clients spread out.
        let factor = 0.75 + rand::rng().random::<f64>() * 0.5;
        Duration::from_millis((capped as f64 * factor) as u64)
    }
}

/// Pulls the reply text out of the common chat-completion body shapes.
fn extract_text(value: &serde_json::Value) -> Result<String, String> {
    let candidates = [
        &value["choices"][0]["message"]["content"],
        &value["choices"][0]["text"],
        &value["content"][0]["text"],
    ];
    for candidate in candidates {
        if let Some(text) = candidate.as_str() {
            return Ok(text.to_string());
        }
    }
    Err("malformed reply: no text block found".into())
}
