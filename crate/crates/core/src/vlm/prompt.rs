use serde_json::{json, Map, Value};

use super::{GenerationRequest, InputKind};
use crate::error::{Error, Result, SpecError};
use crate::spec::{parse_value, registry, Layout, TerrainSpec, SPEC_VERSION};

pub const SYSTEM_PROMPT_TEMPLATE: &str = include_str!("../../assets/system_prompt_v1.txt");

/// Fills the system prompt template for a layout.
pub fn system_prompt(template: &str, layout: &Layout) -> String {
    let names: Vec<&str> = registry::tools().iter().map(|t| t.kind.name()).collect();
    template
        .replace("{rows}", &layout.rows.to_string())
        .replace("{cols}", &layout.cols.to_string())
        .replace("{max_row}", &(layout.rows - 1).to_string())
        .replace("{max_col}", &(layout.cols - 1).to_string())
        .replace("{tile_cells}", &layout.tile_cells.to_string())
        .replace("{cell_size}", &layout.cell_size.to_string())
        .replace("{tool_names}", &names.join(", "))
}

/// Chat-completions request body: system prompt, the user's text or image,
/// and the tool definitions. `model` is filled in by the client.
pub fn build_prompt(request: &GenerationRequest, schemas: &Value) -> Result<Value> {
    let text = request.text_prompt.as_deref();
    let image = request.image_payload.as_ref();
    let user_content = match (request.input_kind, text, image) {
        (InputKind::Text, Some(t), None) if !t.trim().is_empty() => json!(t),
        (InputKind::Image, None, Some(img)) => json!([
            { "type": "text", "text": "Build a terrain matching this image." },
            { "type": "image_url", "image_url": { "url": img.data_url() } }
        ]),
        _ => {
            return Err(Error::InvalidArgument(
                "a generation request needs exactly one non-empty input matching its kind".into(),
            ))
        }
    };
    let template = request.system_prompt.as_deref().unwrap_or(SYSTEM_PROMPT_TEMPLATE);
    Ok(json!({
        "messages": [
            { "role": "system", "content": system_prompt(template, &request.layout) },
            { "role": "user", "content": user_content }
        ],
        "tools": schemas,
        "tool_choice": "required"
    }))
}

/// Follow-up user turn carrying a validation error verbatim.
pub fn retry_message(error: &str) -> Value {
    json!({
        "role": "user",
        "content": format!(
            "Your tool calls were rejected by the terrain validator: {error}\n\
             Reply again with the complete, corrected list of tool calls."
        )
    })
}

/// Maps the first choice's tool calls onto a spec and validates it.
pub fn parse_tool_calls(raw: &Value, layout: &Layout, global_seed: u64) -> Result<TerrainSpec> {
    let calls = raw
        .pointer("/choices/0/message/tool_calls")
        .and_then(Value::as_array)
        .filter(|c| !c.is_empty())
        .ok_or(Error::EmptyResponse)?;

    let mut spec_calls = Vec::with_capacity(calls.len());
    for (i, call) in calls.iter().enumerate() {
        let name = call.pointer("/function/name").and_then(Value::as_str).ok_or_else(|| SpecError::Missing {
            path: format!("calls[{i}].tool"),
        })?;
        let mut args: Map<String, Value> = match call.pointer("/function/arguments") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::String(s)) if s.trim().is_empty() => Map::new(),
            Some(Value::String(s)) => match serde_json::from_str::<Value>(s) {
                Ok(Value::Object(m)) => m,
                _ => return Err(SpecError::Type { path: format!("calls[{i}].args"), expected: "JSON object" }.into()),
            },
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return Err(SpecError::Type { path: format!("calls[{i}].args"), expected: "JSON object" }.into()),
        };
        let target = args.remove("target").unwrap_or_else(|| json!("all"));
        spec_calls.push(json!({ "tool": name, "target": target, "args": args }));
    }
    let doc = json!({
        "version": SPEC_VERSION,
        "layout": {
            "rows": layout.rows,
            "cols": layout.cols,
            "tile_cells": layout.tile_cells,
            "cell_size": layout.cell_size,
        },
        "global_seed": global_seed,
        "calls": spec_calls,
    });
    Ok(parse_value(&doc)?)
}
