//! Completion backends: offline mock, recorded replay and a live HTTP adapter.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::parse::{serialize, LlmPrediction, PredictionEntry};

pub fn prompt_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
    #[error("no recorded response for prompt {0}")]
    ReplayMiss(String),
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("unexpected response body: {0}")]
    Protocol(String),
    #[error("replay file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid backend config: {0}")]
    Config(String),
}

pub trait LlmBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

/// Deterministic offline stand-in: the reply is a pure function of the prompt hash.
#[derive(Debug, Clone, Default)]
pub struct MockBackend;

impl LlmBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let digest = Sha256::digest(prompt.as_bytes());
        let tag = &prompt_hash(prompt)[..12];
        let entries = (0..8)
            .map(|i| PredictionEntry {
                entry: i as u8 + 1,
                score: 1 + digest[i] % 4,
                reason: format!("Mock rationale {tag}-{}.", i + 1),
            })
            .collect();
        let p = LlmPrediction::from_entries(entries).expect("well-formed by construction");
        Ok(serialize(&p))
    }
}

/// One recorded exchange, keyed by prompt hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recording {
    pub prompt_hash: String,
    pub response: String,
}

/// Serves recorded responses by prompt hash.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    responses: BTreeMap<String, String>,
}

impl ReplayBackend {
    pub fn new(responses: BTreeMap<String, String>) -> Self {
        Self { responses }
    }

    /// JSON lines of [`Recording`].
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let f = std::fs::File::open(path)?;
        let mut responses = BTreeMap::new();
        for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: Recording = serde_json::from_str(&line)
                .map_err(|e| BackendError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
            responses.insert(r.prompt_hash, r.response);
        }
        Ok(Self { responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn into_map(self) -> BTreeMap<String, String> {
        self.responses
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl LlmBackend for ReplayBackend {
    fn name(&self) -> &str {
        "replay"
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let h = prompt_hash(prompt);
        self.responses
            .get(&h)
            .cloned()
            .ok_or(BackendError::ReplayMiss(h))
    }
}

pub fn write_recordings<W: Write>(
    mut w: W,
    recs: &BTreeMap<String, String>,
) -> std::io::Result<()> {
    for (h, r) in recs {
        let line = serde_json::to_string(&Recording {
            prompt_hash: h.clone(),
            response: r.clone(),
        })?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Gemini `generateContent` adapter. The credential travels only in a request
/// header and is scrubbed from anything written to the exchange log.
pub struct LiveBackend {
    agent: ureq::Agent,
    url: String,
    key: String,
    log: Option<Mutex<std::fs::File>>,
}

impl LiveBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let key = std::env::var(&cfg.credential_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| BackendError::MissingCredential(cfg.credential_env.clone()))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!(
            "{}/models/{}:generateContent",
            cfg.endpoint.trim_end_matches('/'),
            cfg.model
        );
        Ok(Self {
            agent,
            url,
            key,
            log: None,
        })
    }

    /// Append one JSON line per exchange to `path`.
    pub fn with_log(mut self, path: &Path) -> Result<Self, BackendError> {
        let f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        self.log = Some(Mutex::new(f));
        Ok(self)
    }

    fn redact(&self, s: &str) -> String {
        s.replace(&self.key, "[REDACTED]")
    }

    fn record(&self, entry: Value) {
        if let Some(log) = &self.log {
            let line = self.redact(&entry.to_string());
            if let Ok(mut f) = log.lock() {
                let _ = writeln!(f, "{line}");
            }
        }
    }
}

/// Request body for a single-turn prompt at temperature 0.
pub fn gemini_request(prompt: &str) -> Value {
    json!({
        "contents": [{"role": "user", "parts": [{"text": prompt}]}],
        "generationConfig": {"temperature": 0.0}
    })
}

/// Concatenated text parts of the first candidate.
pub fn gemini_text(body: &Value) -> Result<String, BackendError> {
    let parts = body
        .pointer("/candidates/0/content/parts")
        .and_then(Value::as_array)
        .ok_or_else(|| BackendError::Protocol("no candidate parts".into()))?;
    Ok(parts
        .iter()
        .filter_map(|p| p.get("text").and_then(Value::as_str))
        .collect())
}

impl LlmBackend for LiveBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let hash = prompt_hash(prompt);
        let resp = self
            .agent
            .post(&self.url)
            .header("x-goog-api-key", &self.key)
            .send_json(gemini_request(prompt));
        let mut resp = match resp {
            Ok(r) => r,
            Err(e) => {
                let msg = self.redact(&e.to_string());
                self.record(json!({"prompt_hash": hash, "error": msg}));
                return Err(BackendError::Unavailable(msg));
            }
        };
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Unavailable(self.redact(&e.to_string())))?;
        self.record(json!({"prompt_hash": hash, "status": status, "body": body}));
        if status != 200 {
            return Err(BackendError::Unavailable(format!("HTTP {status}")));
        }
        let v: Value =
            serde_json::from_str(&body).map_err(|e| BackendError::Protocol(e.to_string()))?;
        gemini_text(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Replay,
    Live,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Mock => "mock",
            BackendKind::Replay => "replay",
            BackendKind::Live => "live",
        })
    }
}

impl FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(BackendKind::Mock),
            "replay" => Ok(BackendKind::Replay),
            "live" => Ok(BackendKind::Live),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub credential_env: String,
    /// Must stay 0.
    pub temperature: f64,
    pub timeout_s: u64,
    pub max_retries: usize,
    pub max_in_flight: usize,
    /// Recorded responses for the replay backend.
    pub replay_path: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            endpoint: "https://generativelanguage.googleapis.com/v1beta".into(),
            model: "gemini-2.0-flash".into(),
            credential_env: "GEMINI_API_KEY".into(),
            temperature: 0.0,
            timeout_s: 60,
            max_retries: 2,
            max_in_flight: 4,
            replay_path: None,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.temperature != 0.0 {
            return Err(BackendError::Config(format!(
                "temperature is fixed at 0 (got {})",
                self.temperature
            )));
        }
        if self.max_in_flight == 0 {
            return Err(BackendError::Config("max_in_flight must be >= 1".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn LlmBackend>, BackendError> {
        self.validate()?;
        Ok(match self.backend {
            BackendKind::Mock => Box::new(MockBackend),
            BackendKind::Replay => {
                let path = self.replay_path.as_ref().ok_or_else(|| {
                    BackendError::Config("replay backend needs replay_path".into())
                })?;
                Box::new(ReplayBackend::load(path)?)
            }
            BackendKind::Live => Box::new(LiveBackend::new(self)?),
        })
    }
}
