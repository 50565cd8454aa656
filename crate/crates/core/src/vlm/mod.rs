//! Function-calling client that turns a text or image description into a
//! validated [`TerrainSpec`].
//!
//! The pipeline sends the tool schemas with a system prompt, parses the
//! returned tool calls through the spec parser, and re-prompts with the
//! validator's message when the calls do not check out.

mod client;
mod prompt;

pub use client::{request_terrain, request_terrain_with, HttpTransport, Transport};
pub use prompt::{build_prompt, parse_tool_calls, retry_message, system_prompt, SYSTEM_PROMPT_TEMPLATE};

use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::spec::Layout;

pub const ENV_API_URL: &str = "GENTE_API_URL";
pub const ENV_API_KEY: &str = "GENTE_API_KEY";
pub const ENV_MODEL: &str = "GENTE_MODEL";

pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const DEFAULT_TIMEOUT_SECS: f64 = 120.0;

#[derive(Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: String,
    pub model_name: String,
    pub timeout: Duration,
    pub max_retries: u32,
}

impl std::fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &"<redacted>")
            .field("model_name", &self.model_name)
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl EndpointConfig {
    /// Resolves each field from the explicit value, falling back to the
    /// `GENTE_*` environment variables.
    pub fn resolve(base_url: Option<String>, api_key: Option<String>, model: Option<String>) -> Result<Self> {
        fn pick(explicit: Option<String>, var: &str, what: &str) -> Result<String> {
            explicit
                .or_else(|| std::env::var(var).ok())
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Config(format!("no {what}: pass it as a flag or set {var}")))
        }
        Ok(Self {
            base_url: pick(base_url, ENV_API_URL, "endpoint URL")?,
            api_key: pick(api_key, ENV_API_KEY, "API key")?,
            model_name: pick(model, ENV_MODEL, "model name")?,
            timeout: Duration::from_secs_f64(DEFAULT_TIMEOUT_SECS),
            max_retries: DEFAULT_MAX_RETRIES,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::Config("timeout must be positive".into()));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Text,
    Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagePayload {
    pub data_base64: String,
    pub media_type: String,
}

impl ImagePayload {
    pub fn from_bytes(bytes: &[u8], media_type: &str) -> Self {
        Self {
            data_base64: base64::engine::general_purpose::STANDARD.encode(bytes),
            media_type: media_type.to_string(),
        }
    }

    pub fn data_url(&self) -> String {
        format!("data:{};base64,{}", self.media_type, self.data_base64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub input_kind: InputKind,
    pub text_prompt: Option<String>,
    pub image_payload: Option<ImagePayload>,
    /// Overrides the bundled system prompt template.
    pub system_prompt: Option<String>,
    pub layout: Layout,
    pub global_seed: u64,
}

impl GenerationRequest {
    pub fn text(prompt: impl Into<String>) -> Self {
        Self {
            input_kind: InputKind::Text,
            text_prompt: Some(prompt.into()),
            image_payload: None,
            system_prompt: None,
            layout: Layout::default(),
            global_seed: 0,
        }
    }

    pub fn image(payload: ImagePayload) -> Self {
        Self {
            input_kind: InputKind::Image,
            text_prompt: None,
            image_payload: Some(payload),
            system_prompt: None,
            layout: Layout::default(),
            global_seed: 0,
        }
    }

    pub fn with_layout(mut self, layout: Layout, global_seed: u64) -> Self {
        self.layout = layout;
        self.global_seed = global_seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AttemptOutcome {
    Valid,
    Invalid { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    /// Request body as sent (the API key travels in a header and is never logged).
    pub request: Value,
    pub response: Value,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub endpoint: String,
    pub model: String,
    pub attempts: Vec<Attempt>,
    /// The accepted spec document, when generation succeeded.
    pub final_spec: Option<Value>,
    pub failure: Option<String>,
}
