//! Text-generation providers: prompt text in, completion text out.
//!
//! * [`LiveProvider`] posts to an HTTP endpoint.
//! * [`ReplayProvider`] answers from a fixture keyed by the prompt's SHA-256.
//! * [`ScriptedProvider`] answers from a per-problem list indexed by round.
//! * [`RecordingProvider`] wraps another provider and collects a replay
//!   fixture from its answers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::problem::Problem;

pub const FIXTURE_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
pub struct ProviderRequest<'a> {
    pub problem_id: &'a str,
    /// 0 for the initial formulation, then one per refinement.
    pub round: usize,
    pub prompt: &'a str,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("network error: {0}")]
    Network(String),
    #[error("authentication failed (HTTP {0})")]
    Auth(u16),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected response: {0}")]
    Response(String),
    #[error("no fixture response for problem '{problem_id}' round {round} (prompt hash {key})")]
    MissingFixture {
        problem_id: String,
        round: usize,
        key: String,
    },
    #[error("script for problem '{problem_id}' has no response for round {round}")]
    ScriptExhausted { problem_id: String, round: usize },
    #[error("bad fixture: {0}")]
    Fixture(String),
}

/// Must tolerate concurrent calls; problems are evaluated in parallel.
pub trait Provider: Send + Sync {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestStyle {
    /// `{"model", "messages": [{"role": "user", "content": prompt}], "temperature"}`
    #[default]
    Chat,
    /// `{"model", "prompt", "temperature"}`
    Completion,
}

impl RequestStyle {
    fn default_response_path(self) -> &'static str {
        match self {
            RequestStyle::Chat => "choices.0.message.content",
            RequestStyle::Completion => "choices.0.text",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_env_var: String,
    pub temperature: f64,
    pub num_examples: usize,
    pub timeout_seconds: f64,
    pub request_style: RequestStyle,
    /// Dotted path to the completion text in the response JSON; numeric
    /// segments index arrays. Defaults by request style.
    pub response_path: Option<String>,
    pub max_tokens: Option<u32>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint_url: String::new(),
            model_name: String::new(),
            auth_env_var: "LOGIC_LM_API_KEY".to_string(),
            temperature: 0.0,
            num_examples: 2,
            timeout_seconds: 60.0,
            request_style: RequestStyle::Chat,
            response_path: None,
            max_tokens: None,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!(
                "temperature must be a non-negative number, got {}",
                self.temperature
            ));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(format!(
                "timeout_seconds must be positive, got {}",
                self.timeout_seconds
            ));
        }
        Ok(())
    }

    pub fn response_path(&self) -> &str {
        self.response_path
            .as_deref()
            .unwrap_or(self.request_style.default_response_path())
    }
}

/// Follows a dotted path such as `choices.0.message.content`.
pub fn extract_path<'v>(value: &'v Value, path: &str) -> Option<&'v Value> {
    path.split('.')
        .filter(|s| !s.is_empty())
        .try_fold(value, |v, seg| match v {
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
            Value::Object(map) => map.get(seg),
            _ => None,
        })
}

pub struct LiveProvider {
    config: ProviderConfig,
    agent: ureq::Agent,
}

impl LiveProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        config.validate().map_err(ProviderError::Fixture)?;
        if config.endpoint_url.is_empty() {
            return Err(ProviderError::Network("no endpoint_url configured".to_string()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_seconds)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveProvider { config, agent })
    }

    fn body(&self, prompt: &str) -> Value {
        let c = &self.config;
        let mut body = serde_json::json!({
            "model": c.model_name,
            "temperature": c.temperature,
        });
        match c.request_style {
            RequestStyle::Chat => body["messages"] = serde_json::json!([{"role": "user", "content": prompt}]),
            RequestStyle::Completion => body["prompt"] = Value::String(prompt.to_string()),
        }
        if let Some(n) = c.max_tokens {
            body["max_tokens"] = n.into();
        }
        body
    }
}

impl Provider for LiveProvider {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let mut request = self.agent.post(&self.config.endpoint_url);
        if let Ok(token) = std::env::var(&self.config.auth_env_var) {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        log::debug!("provider call: problem {} round {}", req.problem_id, req.round);
        let mut response = request.send_json(self.body(req.prompt)).map_err(|e| match e {
            ureq::Error::Timeout(t) => ProviderError::Timeout(t.to_string()),
            other => ProviderError::Network(other.to_string()),
        })?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Network(e.to_string()))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(ProviderError::Auth(status)),
            _ => {
                let body: String = text.chars().take(500).collect();
                return Err(ProviderError::Http { status, body });
            }
        }
        let json: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Response(e.to_string()))?;
        let path = self.config.response_path();
        match extract_path(&json, path) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(ProviderError::Response(format!("'{path}' is not a string"))),
            None => Err(ProviderError::Response(format!("no '{path}' in response"))),
        }
    }
}

/// Lowercase hex SHA-256 of the prompt bytes.
pub fn prompt_key(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub schema_version: u32,
    pub responses: BTreeMap<String, String>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Fixture, ProviderError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ProviderError::Fixture(format!("{}: {e}", path.display())))?;
        let f: Fixture =
            serde_json::from_str(&text).map_err(|e| ProviderError::Fixture(format!("{}: {e}", path.display())))?;
        if f.schema_version != FIXTURE_SCHEMA_VERSION {
            return Err(ProviderError::Fixture(format!(
                "{}: schema_version {} is not supported",
                path.display(),
                f.schema_version
            )));
        }
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("fixture serializes");
        text.push('\n');
        std::fs::write(path, text)
    }
}

pub struct ReplayProvider {
    fixture: Fixture,
}

impl ReplayProvider {
    pub fn new(fixture: Fixture) -> Self {
        ReplayProvider { fixture }
    }

    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        Fixture::load(path).map(ReplayProvider::new)
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let key = prompt_key(req.prompt);
        self.fixture
            .responses
            .get(&key)
            .cloned()
            .ok_or_else(|| ProviderError::MissingFixture {
                problem_id: req.problem_id.to_string(),
                round: req.round,
                key,
            })
    }
}

/// Per-problem responses by round. With `repeat_last`, rounds past the end
/// of a script get its last response.
#[derive(Clone, Debug, Default)]
pub struct ScriptedProvider {
    scripts: BTreeMap<String, Vec<String>>,
    repeat_last: bool,
}

impl ScriptedProvider {
    pub fn new(scripts: BTreeMap<String, Vec<String>>) -> Self {
        ScriptedProvider {
            scripts,
            repeat_last: false,
        }
    }

    /// JSON object mapping problem ids to response lists.
    pub fn load(path: &Path) -> Result<Self, ProviderError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ProviderError::Fixture(format!("{}: {e}", path.display())))?;
        let scripts =
            serde_json::from_str(&text).map_err(|e| ProviderError::Fixture(format!("{}: {e}", path.display())))?;
        Ok(ScriptedProvider::new(scripts))
    }

    pub fn repeat_last(mut self, yes: bool) -> Self {
        self.repeat_last = yes;
        self
    }

    /// Serves each problem's reference `formulation` on every round.
    pub fn identity(problems: &[Problem]) -> Self {
        let scripts = problems
            .iter()
            .filter_map(|p| p.formulation.clone().map(|f| (p.id.clone(), vec![f])))
            .collect();
        ScriptedProvider::new(scripts).repeat_last(true)
    }
}

impl Provider for ScriptedProvider {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let exhausted = || ProviderError::ScriptExhausted {
            problem_id: req.problem_id.to_string(),
            round: req.round,
        };
        let script = self.scripts.get(req.problem_id).ok_or_else(exhausted)?;
        match script.get(req.round) {
            Some(r) => Ok(r.clone()),
            None if self.repeat_last => script.last().cloned().ok_or_else(exhausted),
            None => Err(exhausted()),
        }
    }
}

pub struct RecordingProvider<P> {
    inner: P,
    recorded: Mutex<BTreeMap<String, String>>,
}

impl<P: Provider> RecordingProvider<P> {
    pub fn new(inner: P) -> Self {
        RecordingProvider {
            inner,
            recorded: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn fixture(&self) -> Fixture {
        Fixture {
            schema_version: FIXTURE_SCHEMA_VERSION,
            responses: self.recorded.lock().unwrap().clone(),
        }
    }
}

impl<P: Provider> Provider for RecordingProvider<P> {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let out = self.inner.complete(req)?;
        self.recorded
            .lock()
            .unwrap()
            .insert(prompt_key(req.prompt), out.clone());
        Ok(out)
    }
}

impl<P: Provider + ?Sized> Provider for &P {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        (**self).complete(req)
    }
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn complete(&self, req: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        (**self).complete(req)
    }
}
