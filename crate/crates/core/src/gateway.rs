//! Optional direct access to a chat-completions endpoint.
//!
//! The default workflow stays manual: print the prompt, paste the reply
//! back. This module automates that round trip for users who have an API
//! key. The model's reply text is returned exactly as received.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const ENV_BASE: &str = "RA_API_BASE";
pub const ENV_KEY: &str = "RA_API_KEY";
pub const ENV_MODEL: &str = "RA_MODEL";

const MAX_BACKOFF: Duration = Duration::from_secs(30);

/// An API key. Never printed, never serialized.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        ApiKey(key.into())
    }

    fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub base_url: String,
    pub api_key: ApiKey,
    pub model: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
    /// First retry delay; doubles per attempt up to 30 s.
    pub backoff_base: Duration,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("gateway configuration: {0}")]
    Config(String),
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("the endpoint rejected the API key (HTTP {0})")]
    AuthFailed(u16),
    #[error("rate limited by the endpoint{}", .retry_after.map(|s| format!("; retry after {s}s")).unwrap_or_default())]
    RateLimited { retry_after: Option<u64> },
    #[error("request timed out")]
    Timeout,
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("endpoint returned HTTP {0}")]
    Http(u16),
    #[error("transport failure: {0}")]
    Transport(String),
}

impl GatewayConfig {
    pub fn new(base_url: &str, api_key: &str, model: &str) -> Self {
        GatewayConfig {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: ApiKey::new(api_key),
            model: model.to_string(),
            timeout: Duration::from_secs(120),
            max_retries: 3,
            temperature: 0.0,
            backoff_base: Duration::from_millis(500),
        }
    }

    /// Reads `RA_API_BASE`, `RA_API_KEY` and `RA_MODEL` through `get`.
    pub fn from_env_with(get: impl Fn(&str) -> Option<String>) -> Result<Self, GatewayError> {
        let need = |name: &str| {
            get(name)
                .filter(|v| !v.trim().is_empty())
                .ok_or_else(|| GatewayError::Config(format!("{name} is not set")))
        };
        let config = GatewayConfig::new(&need(ENV_BASE)?, &need(ENV_KEY)?, &need(ENV_MODEL)?);
        config.validate()?;
        Ok(config)
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        Self::from_env_with(|name| std::env::var(name).ok())
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let rest = self
            .base_url
            .strip_prefix("http://")
            .or_else(|| self.base_url.strip_prefix("https://"))
            .ok_or_else(|| GatewayError::Config("base URL must be http(s)".into()))?;
        let host = rest.split(['/', '?', '#']).next().unwrap_or("");
        if host.is_empty() || host.contains(char::is_whitespace) {
            return Err(GatewayError::Config(format!(
                "base URL `{}` has no host",
                self.base_url
            )));
        }
        if self.timeout.is_zero() {
            return Err(GatewayError::Config("timeout must be positive".into()));
        }
        if self.model.trim().is_empty() {
            return Err(GatewayError::Config("model is empty".into()));
        }
        Ok(())
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url)
    }
}

/// What the provenance log keeps about a gateway call. Holds no secrets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportRecord {
    pub endpoint: String,
    pub model: String,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Value>,
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Value>,
    pub transport: TransportRecord,
}

enum Attempt {
    Done(Completion),
    Retry(GatewayError, Option<Duration>),
}

fn backoff(base: Duration, attempt: u32) -> Duration {
    base.saturating_mul(1u32 << attempt.min(16)).min(MAX_BACKOFF)
}

fn extract(body: &str) -> Result<(String, Option<Value>), GatewayError> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| GatewayError::MalformedResponse(e.to_string()))?;
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::MalformedResponse("no choices[0].message.content".into()))?;
    Ok((text.to_string(), v.get("usage").cloned()))
}

/// Sends `prompt` as a single user message and returns the reply text.
pub fn complete(prompt: &str, config: &GatewayConfig) -> Result<Completion, GatewayError> {
    if prompt.trim().is_empty() {
        return Err(GatewayError::EmptyPrompt);
    }
    config.validate()?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let body = json!({
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    });
    let endpoint = config.endpoint();
    let mut attempt = 0;
    loop {
        attempt += 1;
        match send_once(&agent, &endpoint, config, &body, attempt)? {
            Attempt::Done(c) => return Ok(c),
            Attempt::Retry(err, hint) => {
                if attempt > config.max_retries {
                    return Err(err);
                }
                let wait = hint
                    .unwrap_or_else(|| backoff(config.backoff_base, attempt - 1))
                    .min(MAX_BACKOFF);
                pause(wait);
            }
        }
    }
}

fn pause(wait: Duration) {
    if !wait.is_zero() {
        std::thread::sleep(wait);
    }
}

fn send_once(
    agent: &ureq::Agent,
    endpoint: &str,
    config: &GatewayConfig,
    body: &Value,
    attempt: u32,
) -> Result<Attempt, GatewayError> {
    let result = agent
        .post(endpoint)
        .header("Authorization", &format!("Bearer {}", config.api_key.expose()))
        .send_json(body);
    let mut response = match result {
        Ok(r) => r,
        Err(ureq::Error::Timeout(_)) => return Ok(Attempt::Retry(GatewayError::Timeout, None)),
        Err(e @ (ureq::Error::BadUri(_) | ureq::Error::Http(_))) => {
            return Err(GatewayError::Config(e.to_string()))
        }
        Err(e) => return Ok(Attempt::Retry(GatewayError::Transport(e.to_string()), None)),
    };
    let status = response.status().as_u16();
    match status {
        200..=299 => {
            let text = match response.body_mut().read_to_string() {
                Ok(t) => t,
                Err(ureq::Error::Timeout(_)) => {
                    return Ok(Attempt::Retry(GatewayError::Timeout, None))
                }
                Err(e) => return Err(GatewayError::MalformedResponse(e.to_string())),
            };
            let (text, usage) = extract(&text)?;
            Ok(Attempt::Done(Completion {
                text,
                usage: usage.clone(),
                transport: TransportRecord {
                    endpoint: endpoint.to_string(),
                    model: config.model.clone(),
                    attempts: attempt,
                    usage,
                },
            }))
        }
        401 | 403 => Err(GatewayError::AuthFailed(status)),
        429 => {
            let retry_after = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok());
            Ok(Attempt::Retry(
                GatewayError::RateLimited { retry_after },
                retry_after.map(Duration::from_secs),
            ))
        }
        408 | 500..=599 => Ok(Attempt::Retry(GatewayError::Http(status), None)),
        _ => Err(GatewayError::Http(status)),
    }
}
