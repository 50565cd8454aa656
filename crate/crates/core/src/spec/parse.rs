use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::registry::{self, ParamKind, ToolDef};
use super::{ArgValue, Layout, Target, TerrainSpec, ToolCall, ToolKind, SPEC_VERSION};
use crate::error::SpecError;

/// Soil region ids are packed into six bits of the attribute byte.
pub(crate) const MAX_SOIL_REGIONS: usize = 63;

const MAX_TILES_PER_SIDE: i64 = 64;
const MAX_TILE_CELLS: i64 = 4096;

type Res<T> = Result<T, SpecError>;

/// Parses and schema-checks a spec document.
pub fn parse_spec(text: &str) -> Res<TerrainSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| json_error(text, &e))?;
    parse_value(&value)
}

fn json_error(text: &str, e: &serde_json::Error) -> SpecError {
    let (line, column) = (e.line(), e.column());
    // serde_json columns are 1-based; a column of 0 means "before the first byte".
    let offset = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum::<usize>()
        + column.saturating_sub(1);
    SpecError::Json { line, column, offset: offset.min(text.len()), message: e.to_string() }
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Res<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(SpecError::Unknown { path: join(prefix, key) });
        }
    }
    Ok(())
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, prefix: &str) -> Res<&'a Value> {
    obj.get(key).ok_or_else(|| SpecError::Missing { path: join(prefix, key) })
}

fn as_object<'a>(v: &'a Value, path: &str) -> Res<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| SpecError::Type { path: path.to_string(), expected: "object" })
}

/// Integer, accepting floats with no fractional part.
fn as_integer(v: &Value, path: &str) -> Res<i64> {
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    match v.as_f64() {
        Some(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Ok(f as i64),
        _ => Err(SpecError::Type { path: path.to_string(), expected: "integer" }),
    }
}

fn int_in(v: &Value, path: &str, min: i64, max: i64) -> Res<i64> {
    let i = as_integer(v, path)?;
    if i < min || i > max {
        return Err(SpecError::Range { path: path.to_string(), message: format!("{i} not in [{min}, {max}]") });
    }
    Ok(i)
}

fn as_number(v: &Value, path: &str) -> Res<f64> {
    v.as_f64().ok_or_else(|| SpecError::Type { path: path.to_string(), expected: "number" })
}

/// Schema-checks an already-decoded spec document.
pub fn parse_value(doc: &Value) -> Res<TerrainSpec> {
    let root = as_object(doc, "$")?;
    check_keys(root, &["version", "layout", "global_seed", "calls"], "")?;

    let version = field(root, "version", "")?
        .as_str()
        .ok_or_else(|| SpecError::Type { path: "version".into(), expected: "string" })?;
    if version != SPEC_VERSION {
        return Err(SpecError::Range {
            path: "version".into(),
            message: format!("unsupported version {version:?}, expected {SPEC_VERSION:?}"),
        });
    }

    let layout = parse_layout(field(root, "layout", "")?)?;
    let seed_v = field(root, "global_seed", "")?;
    let global_seed = seed_v
        .as_u64()
        .ok_or_else(|| SpecError::Type { path: "global_seed".into(), expected: "unsigned 64-bit integer" })?;

    let calls_v = field(root, "calls", "")?
        .as_array()
        .ok_or_else(|| SpecError::Type { path: "calls".into(), expected: "array" })?;
    let mut calls = Vec::with_capacity(calls_v.len());
    for (i, c) in calls_v.iter().enumerate() {
        calls.push(parse_call(i, c, &layout)?);
    }
    let soil_regions = calls.iter().filter(|c| c.tool == ToolKind::Deformable).count();
    if soil_regions > MAX_SOIL_REGIONS {
        return Err(SpecError::Range {
            path: "calls".into(),
            message: format!("{soil_regions} deformable calls exceed the limit of {MAX_SOIL_REGIONS}"),
        });
    }
    Ok(TerrainSpec { version: version.to_string(), layout, global_seed, calls })
}

fn parse_layout(v: &Value) -> Res<Layout> {
    let obj = as_object(v, "layout")?;
    check_keys(obj, &["rows", "cols", "tile_cells", "cell_size"], "layout")?;
    let rows = int_in(field(obj, "rows", "layout")?, "layout.rows", 1, MAX_TILES_PER_SIDE)? as usize;
    let cols = int_in(field(obj, "cols", "layout")?, "layout.cols", 1, MAX_TILES_PER_SIDE)? as usize;
    let tile_cells = int_in(field(obj, "tile_cells", "layout")?, "layout.tile_cells", 2, MAX_TILE_CELLS)? as usize;
    let cell_size = as_number(field(obj, "cell_size", "layout")?, "layout.cell_size")?;
    if !(cell_size > 0.0 && cell_size <= 10.0) {
        return Err(SpecError::Range {
            path: "layout.cell_size".into(),
            message: format!("{cell_size} not in (0, 10]"),
        });
    }
    Ok(Layout { rows, cols, tile_cells, cell_size })
}

fn parse_target(v: Option<&Value>, prefix: &str, layout: &Layout, def: &ToolDef) -> Res<Target> {
    let path = join(prefix, "target");
    let target = match v {
        None => Target::All,
        Some(Value::String(s)) if s == "all" => Target::All,
        Some(Value::Object(obj)) => {
            check_keys(obj, &["row", "col"], &path)?;
            let row = int_in(field(obj, "row", &path)?, &join(&path, "row"), 0, layout.rows as i64 - 1)? as usize;
            let col = int_in(field(obj, "col", &path)?, &join(&path, "col"), 0, layout.cols as i64 - 1)? as usize;
            Target::Tile { row, col }
        }
        Some(_) => return Err(SpecError::Type { path, expected: "\"all\" or {\"row\", \"col\"}" }),
    };
    if def.whole_map_only && target != Target::All {
        return Err(SpecError::Range { path, message: format!("{} only targets the whole map", def.kind.name()) });
    }
    Ok(target)
}

fn parse_call(index: usize, v: &Value, layout: &Layout) -> Res<ToolCall> {
    let prefix = format!("calls[{index}]");
    let obj = as_object(v, &prefix)?;
    check_keys(obj, &["tool", "target", "args"], &prefix)?;
    let name = field(obj, "tool", &prefix)?
        .as_str()
        .ok_or_else(|| SpecError::Type { path: join(&prefix, "tool"), expected: "string" })?;
    let kind = ToolKind::from_name(name).ok_or_else(|| SpecError::UnknownTool { index, name: name.to_string() })?;
    let def = registry::tool(kind);
    let target = parse_target(obj.get("target"), &prefix, layout, def)?;

    let args_path = join(&prefix, "args");
    let empty = Map::new();
    let args_obj = match obj.get("args") {
        None => &empty,
        Some(a) => as_object(a, &args_path)?,
    };
    let args = parse_args(def, args_obj, &args_path)?;
    let call = ToolCall { tool: kind, target, args };
    check_cross_args(&call, layout, &args_path)?;
    Ok(call)
}

pub(crate) fn parse_args(def: &ToolDef, obj: &Map<String, Value>, prefix: &str) -> Res<BTreeMap<String, ArgValue>> {
    for key in obj.keys() {
        if def.param(key).is_none() {
            return Err(SpecError::Unknown { path: join(prefix, key) });
        }
    }
    let mut args = BTreeMap::new();
    for p in def.params {
        let path = join(prefix, p.name);
        let Some(v) = obj.get(p.name) else {
            if p.required() {
                return Err(SpecError::Missing { path });
            }
            continue;
        };
        let value = match p.kind {
            ParamKind::Number { min, max, exclusive_min } => {
                let x = as_number(v, &path)?;
                let above = if exclusive_min { x > min } else { x >= min };
                if !(above && x <= max) {
                    let open = if exclusive_min { "(" } else { "[" };
                    return Err(SpecError::Range { path, message: format!("{x} not in {open}{min}, {max}]") });
                }
                ArgValue::Number(x)
            }
            ParamKind::Integer { min, max } => ArgValue::Integer(int_in(v, &path, min, max)?),
            ParamKind::Choice(options) => {
                let s = v.as_str().ok_or_else(|| SpecError::Type { path: path.clone(), expected: "string" })?;
                if !options.contains(&s) {
                    return Err(SpecError::Range { path, message: format!("{s:?} not one of {options:?}") });
                }
                ArgValue::Choice(s.to_string())
            }
        };
        args.insert(p.name.to_string(), value);
    }
    Ok(args)
}

/// Constraints spanning several arguments or the layout.
fn check_cross_args(call: &ToolCall, layout: &Layout, prefix: &str) -> Res<()> {
    let range = |name: &str, message: String| SpecError::Range { path: join(prefix, name), message };
    let (_, _, w, h) = layout.region(call.target);
    match call.tool {
        ToolKind::Stairs => {
            let depth = call.number("step_depth");
            if depth < layout.cell_size {
                return Err(range("step_depth", format!("{depth} m is below the cell size {} m", layout.cell_size)));
            }
            let cells = if call.choice("axis") == "x" { w } else { h };
            let run = (cells - 1) as f64 * layout.cell_size;
            let needed = call.integer("count") as f64 * depth;
            if needed > run + 1e-9 {
                return Err(range("count", format!("flight needs {needed} m but the region spans {run} m")));
            }
        }
        ToolKind::Pillars | ToolKind::Rocks => {
            let (rmin, rmax) = (call.number("radius_min"), call.number("radius_max"));
            if rmin > rmax {
                return Err(range("radius_max", format!("{rmax} is below radius_min {rmin}")));
            }
            if rmin < layout.cell_size {
                return Err(range("radius_min", format!("{rmin} m is below the cell size {} m", layout.cell_size)));
            }
            let (hmin, hmax) = (call.number("height_min"), call.number("height_max"));
            if hmin > hmax {
                return Err(range("height_max", format!("{hmax} is below height_min {hmin}")));
            }
        }
        ToolKind::Compose => {
            let b = call.integer("blend_width") as usize;
            if b > layout.tile_cells {
                return Err(range("blend_width", format!("{b} exceeds tile_cells {}", layout.tile_cells)));
            }
        }
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(calls: &str) -> String {
        format!(
            r#"{{"version": "1", "layout": {{"rows": 1, "cols": 2, "tile_cells": 32, "cell_size": 0.1}},
                "global_seed": 3, "calls": [{calls}]}}"#
        )
    }

    #[test]
    fn minimal_spec() {
        let spec = parse_spec(&doc(r#"{"tool": "flat", "target": "all", "args": {"elevation": 0.0}}"#)).unwrap();
        assert_eq!(spec.calls.len(), 1);
        assert_eq!(spec.calls[0].tool, ToolKind::Flat);
        assert_eq!(spec.global_seed, 3);
    }

    #[test]
    fn unknown_tool_is_named() {
        let err = parse_spec(&doc(r#"{"tool": "lava", "args": {}}"#)).unwrap_err();
        assert_eq!(err, SpecError::UnknownTool { index: 0, name: "lava".into() });
    }

    #[test]
    fn missing_arg_reports_path() {
        let err = parse_spec(&doc(r#"{"tool": "stairs", "args": {"step_depth": 0.3, "count": 3}}"#)).unwrap_err();
        assert_eq!(err, SpecError::Missing { path: "calls[0].args.step_height".into() });
        assert_eq!(err.call_index(), Some(0));
    }

    #[test]
    fn extra_arg_reports_path() {
        let err = parse_spec(&doc(
            r#"{"tool": "flat", "args": {"elevation": 0.0}}, {"tool": "rough", "args": {"amplitude": 0.1, "color": 3}}"#,
        ))
        .unwrap_err();
        assert_eq!(err, SpecError::Unknown { path: "calls[1].args.color".into() });
        assert_eq!(err.call_index(), Some(1));
    }

    #[test]
    fn range_and_type_errors() {
        let err = parse_spec(&doc(r#"{"tool": "rough", "args": {"amplitude": 3.0}}"#)).unwrap_err();
        assert!(matches!(err, SpecError::Range { ref path, .. } if path == "calls[0].args.amplitude"));
        let err = parse_spec(&doc(r#"{"tool": "rough", "args": {"amplitude": "big"}}"#)).unwrap_err();
        assert!(matches!(err, SpecError::Type { ref path, .. } if path == "calls[0].args.amplitude"));
        let err = parse_spec(&doc(r#"{"tool": "stairs", "args": {"step_height": 0.1, "step_depth": 0.3, "count": 2.5}}"#))
            .unwrap_err();
        assert!(matches!(err, SpecError::Type { expected: "integer", .. }));
    }

    #[test]
    fn integral_floats_are_integers() {
        let spec =
            parse_spec(&doc(r#"{"tool": "stairs", "args": {"step_height": 0.1, "step_depth": 0.3, "count": 3.0}}"#)).unwrap();
        assert_eq!(spec.calls[0].args["count"], ArgValue::Integer(3));
    }

    #[test]
    fn targets_are_checked_against_layout() {
        let ok = parse_spec(&doc(r#"{"tool": "flat", "target": {"row": 0, "col": 1}, "args": {"elevation": 1.0}}"#)).unwrap();
        assert_eq!(ok.calls[0].target, Target::Tile { row: 0, col: 1 });
        let err = parse_spec(&doc(r#"{"tool": "flat", "target": {"row": 1, "col": 0}, "args": {"elevation": 1.0}}"#))
            .unwrap_err();
        assert!(matches!(err, SpecError::Range { ref path, .. } if path == "calls[0].target.row"));
        let err = parse_spec(&doc(r#"{"tool": "compose", "target": {"row": 0, "col": 0}, "args": {"blend_width": 2}}"#))
            .unwrap_err();
        assert!(matches!(err, SpecError::Range { .. }));
    }

    #[test]
    fn stairs_must_fit_region() {
        let err = parse_spec(&doc(
            r#"{"tool": "stairs", "target": {"row": 0, "col": 0}, "args": {"step_height": 0.1, "step_depth": 0.5, "count": 7}}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, SpecError::Range { ref path, .. } if path == "calls[0].args.count"));
        // the whole map (64 cells) has room
        parse_spec(&doc(r#"{"tool": "stairs", "args": {"step_height": 0.1, "step_depth": 0.5, "count": 7}}"#)).unwrap();
    }

    #[test]
    fn obstacle_ranges_are_ordered() {
        let err = parse_spec(&doc(r#"{"tool": "rocks", "args": {"density": 0.1, "radius_min": 0.3, "radius_max": 0.2}}"#))
            .unwrap_err();
        assert!(matches!(err, SpecError::Range { ref path, .. } if path == "calls[0].args.radius_max"));
    }

    #[test]
    fn malformed_json_carries_offset() {
        let text = "{\"version\": \"1\",\n  \"layout\": [}";
        match parse_spec(text).unwrap_err() {
            SpecError::Json { line, offset, .. } => {
                assert_eq!(line, 2);
                assert!(offset > 16 && offset <= text.len(), "{offset}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn top_level_is_strict() {
        let err = parse_spec(r#"{"version": "1", "layout": {"rows": 1, "cols": 1, "tile_cells": 8, "cell_size": 0.1}, "global_seed": 1, "calls": [], "extra": 1}"#).unwrap_err();
        assert_eq!(err, SpecError::Unknown { path: "extra".into() });
        let err = parse_spec(r#"{"version": "2", "layout": {"rows": 1, "cols": 1, "tile_cells": 8, "cell_size": 0.1}, "global_seed": 1, "calls": []}"#).unwrap_err();
        assert!(matches!(err, SpecError::Range { ref path, .. } if path == "version"));
        let err = parse_spec(r#"{"version": "1", "global_seed": 1, "calls": []}"#).unwrap_err();
        assert_eq!(err, SpecError::Missing { path: "layout".into() });
    }
}
