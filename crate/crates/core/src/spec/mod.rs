//! The terrain spec language.
//!
//! A spec is a versioned JSON document listing tool calls against a tile
//! layout:
//!
//! ```json
//! {"version": "1",
//!  "layout": {"rows": 1, "cols": 2, "tile_cells": 64, "cell_size": 0.1},
//!  "global_seed": 7,
//!  "calls": [{"tool": "flat", "target": "all", "args": {"elevation": 0.0}},
//!            {"tool": "wading", "target": {"row": 0, "col": 1}, "args": {"water_level": 0.2}}]}
//! ```
//!
//! Calls run in order against one accumulator terrain. `flat` replaces the
//! geometry of its region; the other geometry tools add to it. `wading` and
//! `deformable` paint the attribute layer, and `compose` blends tile seams.

mod compile;
mod parse;
pub mod registry;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use compile::{compile, AttributeGrid, GeneratedTerrain, ATTRIBUTES_FILE, ATTRIBUTES_SIDECAR, MAX_CELLS};
pub use parse::{parse_spec, parse_value};
pub use registry::export_function_schemas;
pub use validate::{lint_spec, validate_spec, Warning, WarningKind};

use crate::error::Result;

pub const SPEC_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolKind {
    Flat,
    Slope,
    Stairs,
    Rough,
    Pillars,
    Rocks,
    Wading,
    Deformable,
    Compose,
}

impl ToolKind {
    pub const ALL: [ToolKind; 9] = [
        ToolKind::Flat,
        ToolKind::Slope,
        ToolKind::Stairs,
        ToolKind::Rough,
        ToolKind::Pillars,
        ToolKind::Rocks,
        ToolKind::Wading,
        ToolKind::Deformable,
        ToolKind::Compose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ToolKind::Flat => "flat",
            ToolKind::Slope => "slope",
            ToolKind::Stairs => "stairs",
            ToolKind::Rough => "rough",
            ToolKind::Pillars => "pillars",
            ToolKind::Rocks => "rocks",
            ToolKind::Wading => "wading",
            ToolKind::Deformable => "deformable",
            ToolKind::Compose => "compose",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Tools that modify the height map.
    pub fn is_geometry(self) -> bool {
        matches!(
            self,
            ToolKind::Flat | ToolKind::Slope | ToolKind::Stairs | ToolKind::Rough | ToolKind::Pillars | ToolKind::Rocks
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub rows: usize,
    pub cols: usize,
    /// Cells along each side of a square tile.
    pub tile_cells: usize,
    pub cell_size: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Self { rows: 1, cols: 1, tile_cells: 64, cell_size: crate::heightmap::DEFAULT_CELL_SIZE }
    }
}

impl Layout {
    pub fn width_cells(&self) -> usize {
        self.cols * self.tile_cells
    }

    pub fn height_cells(&self) -> usize {
        self.rows * self.tile_cells
    }

    /// `(col0, row0, width, height)` of a target in cells.
    pub fn region(&self, target: Target) -> (usize, usize, usize, usize) {
        match target {
            Target::All => (0, 0, self.width_cells(), self.height_cells()),
            Target::Tile { row, col } => (col * self.tile_cells, row * self.tile_cells, self.tile_cells, self.tile_cells),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    #[default]
    All,
    Tile {
        row: usize,
        col: usize,
    },
}

impl Target {
    pub fn to_json(self) -> Value {
        match self {
            Target::All => json!("all"),
            Target::Tile { row, col } => json!({ "row": row, "col": col }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Number(f64),
    Integer(i64),
    Choice(String),
}

impl ArgValue {
    pub fn to_json(&self) -> Value {
        match self {
            ArgValue::Number(v) => json!(v),
            ArgValue::Integer(v) => json!(v),
            ArgValue::Choice(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolCall {
    pub tool: ToolKind,
    pub target: Target,
    /// Arguments as given; omitted optional parameters take registry defaults.
    pub args: BTreeMap<String, ArgValue>,
}

impl ToolCall {
    pub fn new(tool: ToolKind, target: Target) -> Self {
        Self { tool, target, args: BTreeMap::new() }
    }

    pub fn arg(mut self, name: &str, value: ArgValue) -> Self {
        self.args.insert(name.to_string(), value);
        self
    }

    pub fn num_arg(self, name: &str, v: f64) -> Self {
        self.arg(name, ArgValue::Number(v))
    }

    fn lookup(&self, name: &str) -> ArgValue {
        if let Some(v) = self.args.get(name) {
            return v.clone();
        }
        let def = registry::tool(self.tool)
            .param(name)
            .unwrap_or_else(|| panic!("{} has no parameter {name}", self.tool.name()));
        match def.default.expect("required parameters are present after parsing") {
            registry::Lit::Num(v) => ArgValue::Number(v),
            registry::Lit::Int(v) => ArgValue::Integer(v),
            registry::Lit::Str(s) => ArgValue::Choice(s.to_string()),
        }
    }

    /// Numeric argument (or its default).
    pub fn number(&self, name: &str) -> f64 {
        match self.lookup(name) {
            ArgValue::Number(v) => v,
            ArgValue::Integer(v) => v as f64,
            ArgValue::Choice(_) => panic!("{name} is not numeric"),
        }
    }

    pub fn integer(&self, name: &str) -> i64 {
        match self.lookup(name) {
            ArgValue::Integer(v) => v,
            other => panic!("{name} is not an integer: {other:?}"),
        }
    }

    pub fn choice(&self, name: &str) -> String {
        match self.lookup(name) {
            ArgValue::Choice(s) => s,
            other => panic!("{name} is not a choice: {other:?}"),
        }
    }

    pub fn to_json(&self) -> Value {
        let args: serde_json::Map<String, Value> = self.args.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
        json!({ "tool": self.tool.name(), "target": self.target.to_json(), "args": args })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainSpec {
    pub version: String,
    pub layout: Layout,
    pub global_seed: u64,
    pub calls: Vec<ToolCall>,
}

impl TerrainSpec {
    pub fn new(layout: Layout, global_seed: u64) -> Self {
        Self { version: SPEC_VERSION.to_string(), layout, global_seed, calls: Vec::new() }
    }

    pub fn with_call(mut self, call: ToolCall) -> Self {
        self.calls.push(call);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "version": self.version,
            "layout": {
                "rows": self.layout.rows,
                "cols": self.layout.cols,
                "tile_cells": self.layout.tile_cells,
                "cell_size": self.layout.cell_size,
            },
            "global_seed": self.global_seed,
            "calls": self.calls.iter().map(ToolCall::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("spec values are always serializable")
    }
}

/// Serializes and re-parses a spec; a valid spec comes back unchanged.
pub fn spec_roundtrip(spec: &TerrainSpec) -> Result<TerrainSpec> {
    Ok(parse_spec(&spec.to_json_string())?)
}
