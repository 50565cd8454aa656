use std::time::Duration;

use serde_json::Value;

use super::{build_prompt, parse_tool_calls, retry_message, Attempt, AttemptOutcome, EndpointConfig, GenerationRequest, GenerationTrace};
use crate::error::{Error, Result};
use crate::spec::{export_function_schemas, TerrainSpec};

/// One request/response exchange with a chat-completions endpoint.
pub trait Transport {
    fn post_json(&self, url: &str, api_key: &str, body: &Value, timeout: Duration) -> Result<Value>;
}

/// Blocking HTTP transport with bearer authentication.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn post_json(&self, url: &str, api_key: &str, body: &Value, timeout: Duration) -> Result<Value> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut resp = agent
            .post(url)
            .header("Authorization", &format!("Bearer {api_key}"))
            .send_json(body)
            .map_err(|e| Error::Network(format!("POST {url}: {e}")))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Network(format!("reading response from {url}: {e}")))?;
        if !status.is_success() {
            let snippet: String = text.chars().take(300).collect();
            return Err(Error::Network(format!("POST {url} returned {status}: {snippet}")));
        }
        serde_json::from_str(&text).map_err(|e| Error::Network(format!("response from {url} is not JSON: {e}")))
    }
}

pub fn request_terrain(request: &GenerationRequest, cfg: &EndpointConfig) -> Result<(TerrainSpec, GenerationTrace)> {
    request_terrain_with(&HttpTransport, request, cfg)
}

/// Sends the prompt and re-prompts on invalid tool calls, at most
/// `max_retries` times. Each retry appends the previous validation error, so
/// attempt k sees every error from attempts 1..k.
pub fn request_terrain_with(
    transport: &dyn Transport,
    request: &GenerationRequest,
    cfg: &EndpointConfig,
) -> Result<(TerrainSpec, GenerationTrace)> {
    cfg.validate()?;
    let mut body = build_prompt(request, &export_function_schemas())?;
    body["model"] = Value::String(cfg.model_name.clone());
    let url = cfg.completions_url();
    let mut trace = GenerationTrace { endpoint: url.clone(), model: cfg.model_name.clone(), ..Default::default() };

    for _ in 0..=cfg.max_retries {
        let response = transport.post_json(&url, &cfg.api_key, &body, cfg.timeout)?;
        let parsed = parse_tool_calls(&response, &request.layout, request.global_seed);
        match parsed {
            Ok(spec) => {
                trace.attempts.push(Attempt { request: body.clone(), response, outcome: AttemptOutcome::Valid });
                trace.final_spec = Some(spec.to_json());
                return Ok((spec, trace));
            }
            Err(e @ (Error::Spec(_) | Error::EmptyResponse)) => {
                let error = e.to_string();
                trace.attempts.push(Attempt {
                    request: body.clone(),
                    response,
                    outcome: AttemptOutcome::Invalid { error: error.clone() },
                });
                body["messages"].as_array_mut().expect("prompt has messages").push(retry_message(&error));
            }
            Err(other) => return Err(other),
        }
    }
    let reason = match trace.attempts.last().map(|a| &a.outcome) {
        Some(AttemptOutcome::Invalid { error }) => format!("last error: {error}"),
        _ => "no valid response".to_string(),
    };
    trace.failure = Some(reason.clone());
    Err(Error::GenerationFailed { reason, trace: Box::new(trace) })
}
