use serde_json::{json, Map, Value};
use terragen_core::spec::registry::{parameters_schema, tools, ToolDef};
use terragen_core::spec::{export_function_schemas, parse_value};
use terragen_core::SpecError;

fn example_args(def: &ToolDef, skip: Option<&str>) -> Map<String, Value> {
    def.params.iter().filter(|p| Some(p.name) != skip).map(|p| (p.name.to_string(), p.example.to_json())).collect()
}

fn spec_with(tool: &str, args: Map<String, Value>) -> Value {
    json!({
        "version": "1",
        "layout": { "rows": 1, "cols": 1, "tile_cells": 64, "cell_size": 0.1 },
        "global_seed": 3,
        "calls": [{ "tool": tool, "args": args }]
    })
}

#[test]
fn exported_schemas_are_valid_json_schema() {
    let all = export_function_schemas();
    let list = all.as_array().unwrap();
    assert_eq!(list.len(), 9);
    for entry in list {
        assert_eq!(entry["type"], "function");
        let params = &entry["function"]["parameters"];
        jsonschema::meta::validate(params).unwrap_or_else(|e| panic!("{}: {e}", entry["function"]["name"]));
        assert!(!entry["function"]["description"].as_str().unwrap().is_empty());
    }
}

#[test]
fn every_parameter_is_documented() {
    for def in tools() {
        for p in def.params {
            assert!(!p.doc.is_empty(), "{}.{}", def.kind.name(), p.name);
        }
        let schema = parameters_schema(def, true);
        for (name, prop) in schema["properties"].as_object().unwrap() {
            assert!(prop.get("description").is_some(), "{}.{name}", def.kind.name());
        }
    }
}

#[test]
fn examples_satisfy_schema_and_parser() {
    for def in tools() {
        let args = example_args(def, None);
        let validator = jsonschema::validator_for(&parameters_schema(def, true)).unwrap();
        assert!(validator.is_valid(&Value::Object(args.clone())), "{} examples fail schema", def.kind.name());
        parse_value(&spec_with(def.kind.name(), args))
            .unwrap_or_else(|e| panic!("{} examples fail parser: {e}", def.kind.name()));
    }
}

#[test]
fn schema_and_parser_agree_on_missing_required() {
    for def in tools() {
        for p in def.params.iter().filter(|p| p.required()) {
            let args = example_args(def, Some(p.name));
            let validator = jsonschema::validator_for(&parameters_schema(def, false)).unwrap();
            assert!(!validator.is_valid(&Value::Object(args.clone())));
            match parse_value(&spec_with(def.kind.name(), args)) {
                Err(SpecError::Missing { path }) => assert_eq!(path, format!("calls[0].args.{}", p.name)),
                other => panic!("{}.{}: {other:?}", def.kind.name(), p.name),
            }
        }
    }
}

#[test]
fn stairs_requires_its_geometry() {
    let stairs = tools().iter().find(|t| t.kind.name() == "stairs").unwrap();
    let schema = parameters_schema(stairs, false);
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    for name in ["step_height", "step_depth", "count"] {
        assert!(required.contains(&name));
    }
}

#[test]
fn unknown_parameter_is_rejected_by_both() {
    for def in tools() {
        let mut args = example_args(def, None);
        args.insert("colour".into(), json!(1));
        let validator = jsonschema::validator_for(&parameters_schema(def, false)).unwrap();
        assert!(!validator.is_valid(&Value::Object(args.clone())));
        assert!(matches!(parse_value(&spec_with(def.kind.name(), args)), Err(SpecError::Unknown { .. })));
    }
}
