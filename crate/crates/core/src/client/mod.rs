//! Conversion of unstructured route descriptions into canonical CRD text.
//!
//! Three modes share one entry point: `remote` posts a chat-completion style
//! request with in-context exemplars, `replay` answers the same requests from
//! a recorded fixture file without touching the network, and `offline` runs a
//! rule-based converter.

mod fixture;
pub mod offline;
mod prompt;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::route::{parse_crd, CognitiveRouteDescription, RouteError};

pub use fixture::{Fixture, Interaction};
pub use prompt::{default_exemplars, ChatMessage, SYSTEM_PROMPT};

pub const DEFAULT_API_KEY_ENV: &str = "WTW_API_KEY";

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("service unreachable: {reason}")]
    ServiceUnreachable { reason: String, raw: Option<String> },
    #[error("authentication rejected (HTTP {status})")]
    AuthFailure { status: u16, raw: String },
    #[error("credential missing: environment variable {0} is not set")]
    MissingCredential(String),
    #[error("service returned HTTP {status}")]
    UnexpectedStatus { status: u16, raw: String },
    #[error("response has no choices[0].message.content")]
    MalformedResponse { raw: String },
    #[error("service returned an invalid route after re-prompting: {error}")]
    InvalidCrdReturned { error: RouteError, raw: String },
    #[error(transparent)]
    MalformedRoute(#[from] RouteError),
    #[error("no recorded interaction matches the request")]
    ReplayMiss { request: String },
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("conversion request needs at least one exemplar pair")]
    NoExemplars,
}

impl ClientError {
    /// Raw service payload, when one was received.
    pub fn raw_payload(&self) -> Option<&str> {
        match self {
            ClientError::ServiceUnreachable { raw, .. } => raw.as_deref(),
            ClientError::AuthFailure { raw, .. }
            | ClientError::UnexpectedStatus { raw, .. }
            | ClientError::MalformedResponse { raw }
            | ClientError::InvalidCrdReturned { raw, .. } => Some(raw),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConverterMode {
    Remote,
    #[default]
    Offline,
    Replay,
}

impl std::str::FromStr for ConverterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(Self::Remote),
            "offline" => Ok(Self::Offline),
            "replay" => Ok(Self::Replay),
            other => Err(format!("unknown converter mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    pub mode: ConverterMode,
    pub base_url: String,
    pub model: String,
    pub timeout_ms: u64,
    /// Replay source in `replay` mode; recording target in `remote` mode.
    pub fixture_path: Option<PathBuf>,
    pub api_key_env: String,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            mode: ConverterMode::Offline,
            base_url: "http://127.0.0.1:8000/v1".into(),
            model: "gpt-4".into(),
            timeout_ms: 30_000,
            fixture_path: None,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionRequest {
    pub urd_text: String,
    pub exemplar_pairs: Vec<(String, String)>,
    pub model_name: String,
}

impl ConversionRequest {
    pub fn new(
        urd_text: impl Into<String>,
        exemplar_pairs: Vec<(String, String)>,
        model_name: impl Into<String>,
    ) -> Result<Self, ClientError> {
        if exemplar_pairs.is_empty() {
            return Err(ClientError::NoExemplars);
        }
        Ok(Self {
            urd_text: urd_text.into(),
            exemplar_pairs,
            model_name: model_name.into(),
        })
    }

    pub fn messages(&self) -> Vec<ChatMessage> {
        prompt::build_messages(&self.exemplar_pairs, &self.urd_text)
    }
}

/// A conversion whose text is guaranteed to parse as a CRD.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionResult {
    crd_text: String,
    crd: CognitiveRouteDescription,
    raw_response: String,
    latency_ms: u64,
}

impl ConversionResult {
    pub fn new(
        crd_text: impl Into<String>,
        raw_response: impl Into<String>,
        latency_ms: u64,
    ) -> Result<Self, RouteError> {
        let crd_text = crd_text.into();
        let crd = parse_crd(&crd_text)?;
        Ok(Self {
            crd_text,
            crd,
            raw_response: raw_response.into(),
            latency_ms,
        })
    }

    pub fn crd_text(&self) -> &str {
        &self.crd_text
    }

    pub fn crd(&self) -> &CognitiveRouteDescription {
        &self.crd
    }

    pub fn raw_response(&self) -> &str {
        &self.raw_response
    }

    pub fn latency_ms(&self) -> u64 {
        self.latency_ms
    }
}

/// Deterministic rule-based conversion.
pub fn convert_offline(urd_text: &str) -> Result<ConversionResult, ClientError> {
    let text = offline::convert_text(urd_text)?;
    Ok(ConversionResult::new(text, String::new(), 0)?)
}

enum Transport {
    Http(ureq::Agent),
    Replay(Fixture),
    Offline,
}

/// One client serializes its requests; independent clients share nothing.
pub struct InstructionClient {
    config: ClientConfig,
    exemplars: Vec<(String, String)>,
    transport: Transport,
    recording: Option<Fixture>,
}

impl InstructionClient {
    pub fn new(config: ClientConfig) -> Result<Self, ClientError> {
        let transport = match config.mode {
            ConverterMode::Offline => Transport::Offline,
            ConverterMode::Replay => {
                let path = config
                    .fixture_path
                    .as_ref()
                    .ok_or_else(|| ClientError::Fixture("replay mode needs fixture_path".into()))?;
                Transport::Replay(Fixture::load(path)?)
            }
            ConverterMode::Remote => {
                let agent = ureq::Agent::config_builder()
                    .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
                    .http_status_as_error(false)
                    .build()
                    .new_agent();
                Transport::Http(agent)
            }
        };
        let recording = (config.mode == ConverterMode::Remote && config.fixture_path.is_some())
            .then(Fixture::default);
        Ok(Self {
            config,
            exemplars: default_exemplars(),
            transport,
            recording,
        })
    }

    pub fn with_exemplars(mut self, exemplars: Vec<(String, String)>) -> Self {
        self.exemplars = exemplars;
        self
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// Converts with the configured mode.
    pub fn convert(&mut self, urd_text: &str) -> Result<ConversionResult, ClientError> {
        if let Transport::Offline = self.transport {
            return convert_offline(urd_text);
        }
        let req = ConversionRequest::new(urd_text, self.exemplars.clone(), self.config.model.clone())?;
        self.convert_remote(&req)
    }

    /// Chat-completion conversion with one re-prompt on an unparseable answer.
    pub fn convert_remote(&mut self, req: &ConversionRequest) -> Result<ConversionResult, ClientError> {
        let started = Instant::now();
        let mut messages = req.messages();
        for attempt in 0..2 {
            let body = json!({ "model": req.model_name, "messages": messages });
            let raw = self.post(&body)?;
            let content = extract_content(&raw)?;
            match parse_crd(&content) {
                Ok(_) => {
                    let latency = match self.transport {
                        Transport::Replay(_) => 0,
                        _ => started.elapsed().as_millis() as u64,
                    };
                    self.flush_recording()?;
                    return Ok(ConversionResult::new(content.trim(), raw, latency)?);
                }
                Err(error) if attempt == 0 => {
                    messages.push(ChatMessage::assistant(content));
                    messages.push(ChatMessage::user(prompt::reprompt(&error)));
                }
                Err(error) => {
                    self.flush_recording()?;
                    return Err(ClientError::InvalidCrdReturned { error, raw });
                }
            }
        }
        unreachable!("the second attempt always returns")
    }

    fn post(&mut self, body: &Value) -> Result<String, ClientError> {
        let body_text = serde_json::to_string(body).expect("request serializes");
        let (status, raw) = match &self.transport {
            Transport::Replay(fixture) => {
                let hit = fixture
                    .lookup(body)
                    .ok_or_else(|| ClientError::ReplayMiss { request: body_text.clone() })?;
                (hit.status, hit.response_body.clone())
            }
            Transport::Http(agent) => {
                let key = std::env::var(&self.config.api_key_env)
                    .map_err(|_| ClientError::MissingCredential(self.config.api_key_env.clone()))?;
                let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
                let mut resp = agent
                    .post(&url)
                    .header("Authorization", format!("Bearer {key}"))
                    .header("Content-Type", "application/json")
                    .send(body_text.as_str())
                    .map_err(|e| ClientError::ServiceUnreachable {
                        reason: e.to_string(),
                        raw: None,
                    })?;
                let status = resp.status().as_u16();
                let raw = resp.body_mut().read_to_string().map_err(|e| ClientError::ServiceUnreachable {
                    reason: e.to_string(),
                    raw: None,
                })?;
                if let Some(rec) = self.recording.as_mut() {
                    rec.push(Interaction {
                        request: body.clone(),
                        status,
                        response_body: raw.clone(),
                    });
                }
                (status, raw)
            }
            Transport::Offline => unreachable!("offline mode never posts"),
        };
        match status {
            200..=299 => Ok(raw),
            401 | 403 => Err(ClientError::AuthFailure { status, raw }),
            _ => Err(ClientError::UnexpectedStatus { status, raw }),
        }
    }

    fn flush_recording(&mut self) -> Result<(), ClientError> {
        if let (Some(rec), Some(path)) = (self.recording.as_mut(), self.config.fixture_path.as_ref()) {
            let mut existing = if path.exists() { Fixture::load(path)? } else { Fixture::default() };
            existing.extend(std::mem::take(rec));
            existing.save(path)?;
        }
        Ok(())
    }
}

fn extract_content(raw: &str) -> Result<String, ClientError> {
    let value: Value = serde_json::from_str(raw).map_err(|_| ClientError::MalformedResponse { raw: raw.into() })?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ClientError::MalformedResponse { raw: raw.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_constructor_validates() {
        assert!(ConversionResult::new("Go straight to a box, then stop.", "", 0).is_ok());
        assert!(ConversionResult::new("Go straight to a box, then turn left.", "", 0).is_err());
    }

    #[test]
    fn request_needs_exemplars() {
        assert!(matches!(ConversionRequest::new("x", vec![], "m"), Err(ClientError::NoExemplars)));
    }

    #[test]
    fn content_extraction() {
        let raw = r#"{"choices":[{"message":{"role":"assistant","content":"Go straight to a box, then stop."}}]}"#;
        assert_eq!(extract_content(raw).unwrap(), "Go straight to a box, then stop.");
        assert!(matches!(extract_content("{}"), Err(ClientError::MalformedResponse { .. })));
        assert!(matches!(extract_content("nope"), Err(ClientError::MalformedResponse { .. })));
    }

    #[test]
    fn offline_fixed_point() {
        let text = "Go straight to a white ball, then stop.";
        let r = convert_offline(text).unwrap();
        assert_eq!(r.crd(), &parse_crd(text).unwrap());
        assert!(matches!(convert_offline(""), Err(ClientError::MalformedRoute(_))));
    }

    #[test]
    fn replay_requires_fixture() {
        let cfg = ClientConfig {
            mode: ConverterMode::Replay,
            ..ClientConfig::default()
        };
        assert!(matches!(InstructionClient::new(cfg), Err(ClientError::Fixture(_))));
    }
}
