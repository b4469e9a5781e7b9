//! Chat transports: a generic chat-completions HTTP client and the scripted
//! mock used by every test.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("transport: {0}")]
    Http(String),
    #[error("endpoint returned malformed payload: {0}")]
    Payload(String),
    #[error("missing API key environment variable '{0}'")]
    MissingKey(String),
    #[error("scripted transport ran out of responses")]
    ScriptExhausted,
    #[error("retries exhausted")]
    Exhausted,
}

impl TransportError {
    pub fn retryable(&self) -> bool {
        matches!(self, TransportError::Http(_) | TransportError::Exhausted)
    }
}

pub trait Transport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, TransportError>;
}

/// Replays a fixed list of completions; records every request for
/// assertions.
pub struct MockTransport {
    responses: VecDeque<String>,
    pub requests: Vec<Vec<ChatMessage>>,
    /// Fail this many times before succeeding (transport-retry tests).
    pub fail_first: usize,
}

impl MockTransport {
    pub fn new(responses: Vec<String>) -> Self {
        MockTransport { responses: responses.into(), requests: Vec::new(), fail_first: 0 }
    }

    pub fn scripted(responses: &[&str]) -> Self {
        Self::new(responses.iter().map(|s| s.to_string()).collect())
    }
}

impl Transport for MockTransport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        self.requests.push(messages.to_vec());
        if self.fail_first > 0 {
            self.fail_first -= 1;
            return Err(TransportError::Http("connection refused".into()));
        }
        self.responses.pop_front().ok_or(TransportError::ScriptExhausted)
    }
}

/// Chat-completions style HTTP transport. The payload shape follows the
/// common `{model, temperature, messages:[{role,content}]}` contract with
/// the completion at `choices[0].message.content`.
pub struct HttpTransport {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub api_key_env: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(endpoint: &str, model: &str, temperature: f64, api_key_env: &str) -> Self {
        HttpTransport {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            temperature,
            api_key_env: api_key_env.to_string(),
            client: reqwest::blocking::Client::builder()
                .timeout(std::time::Duration::from_secs(600))
                .build()
                .expect("client builds"),
        }
    }
}

impl Transport for HttpTransport {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let key = std::env::var(&self.api_key_env)
            .map_err(|_| TransportError::MissingKey(self.api_key_env.clone()))?;
        let payload = serde_json::json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": messages,
        });
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(key)
            .json(&payload)
            .send()
            .map_err(|e| TransportError::Http(e.to_string()))?;
        if !response.status().is_success() {
            return Err(TransportError::Http(format!("status {}", response.status())));
        }
        let body: serde_json::Value =
            response.json().map_err(|e| TransportError::Payload(e.to_string()))?;
        body["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| TransportError::Payload("choices[0].message.content missing".into()))
    }
}
