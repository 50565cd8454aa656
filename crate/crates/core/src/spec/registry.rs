//! The tool registry: one entry per atomic terrain function, with typed,
//! ranged, documented parameters. Parsing, schema export and compilation
//! all read from this table.

use serde_json::{json, Map, Value};

use super::ToolKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Number { min: f64, max: f64, exclusive_min: bool },
    Integer { min: i64, max: i64 },
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lit {
    Num(f64),
    Int(i64),
    Str(&'static str),
}

impl Lit {
    pub fn to_json(self) -> Value {
        match self {
            Lit::Num(v) => json!(v),
            Lit::Int(v) => json!(v),
            Lit::Str(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub kind: ParamKind,
    /// `None` means the parameter is required.
    pub default: Option<Lit>,
    pub unit: &'static str,
    pub doc: &'static str,
    pub example: Lit,
}

impl ParamDef {
    pub fn required(&self) -> bool {
        self.default.is_none()
    }
}

#[derive(Debug)]
pub struct ToolDef {
    pub kind: ToolKind,
    pub doc: &'static str,
    pub params: &'static [ParamDef],
    /// The tool can only target the whole map.
    pub whole_map_only: bool,
}

impl ToolDef {
    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

const fn num(min: f64, max: f64) -> ParamKind {
    ParamKind::Number { min, max, exclusive_min: false }
}

const fn pos(max: f64) -> ParamKind {
    ParamKind::Number { min: 0.0, max, exclusive_min: true }
}

const fn p(
    name: &'static str,
    kind: ParamKind,
    default: Option<Lit>,
    unit: &'static str,
    doc: &'static str,
    example: Lit,
) -> ParamDef {
    ParamDef { name, kind, default, unit, doc, example }
}

use Lit::{Int, Num, Str};

static FLAT: [ParamDef; 1] = [p(
    "elevation",
    num(-10.0, 10.0),
    None,
    "m",
    "Elevation of the level ground; replaces the existing geometry in the target region.",
    Num(0.0),
)];

static SLOPE: [ParamDef; 2] = [
    p("grade", num(-1.0, 1.0), None, "rise/run", "Rise over run of the ramp.", Num(0.15)),
    p(
        "heading_deg",
        num(-360.0, 360.0),
        Some(Num(0.0)),
        "deg",
        "Uphill direction, counter-clockwise from +x.",
        Num(90.0),
    ),
];

static STAIRS: [ParamDef; 5] = [
    p("step_height", ParamKind::Number { min: 0.0, max: 0.5, exclusive_min: true }, None, "m", "Riser height.", Num(0.15)),
    p("step_depth", pos(5.0), None, "m", "Tread depth; at least one grid cell.", Num(0.3)),
    p("count", ParamKind::Integer { min: 1, max: 200 }, None, "steps", "Number of steps in the flight.", Int(5)),
    p(
        "direction",
        ParamKind::Choice(&["ascending", "descending"]),
        Some(Str("ascending")),
        "",
        "Whether the flight climbs or drops along the axis.",
        Str("ascending"),
    ),
    p("axis", ParamKind::Choice(&["x", "y"]), Some(Str("x")), "", "Grid axis the flight runs along.", Str("x")),
];

static ROUGH: [ParamDef; 5] = [
    p("amplitude", num(0.0, 1.0), None, "m", "Maximum deviation from the underlying surface.", Num(0.05)),
    p("octaves", ParamKind::Integer { min: 1, max: 8 }, Some(Int(4)), "", "Number of noise octaves.", Int(4)),
    p("lacunarity", num(1.0, 4.0), Some(Num(2.0)), "ratio", "Frequency multiplier per octave.", Num(2.0)),
    p("persistence", num(0.0, 1.0), Some(Num(0.5)), "ratio", "Amplitude multiplier per octave.", Num(0.5)),
    p("frequency", pos(10.0), Some(Num(1.0)), "1/m", "Base spatial frequency.", Num(1.0)),
];

static PILLARS: [ParamDef; 5] = [
    p("density", num(0.0, 2.0), None, "1/m^2", "Obstacles per square meter.", Num(0.2)),
    p("radius_min", pos(2.0), Some(Num(0.15)), "m", "Smallest footprint radius.", Num(0.15)),
    p("radius_max", pos(2.0), Some(Num(0.4)), "m", "Largest footprint radius.", Num(0.4)),
    p("height_min", num(0.5, 5.0), Some(Num(1.0)), "m", "Shortest pillar (trees, lamp posts).", Num(1.0)),
    p("height_max", num(0.5, 5.0), Some(Num(2.0)), "m", "Tallest pillar.", Num(2.0)),
];

static ROCKS: [ParamDef; 5] = [
    p("density", num(0.0, 2.0), None, "1/m^2", "Obstacles per square meter.", Num(0.3)),
    p("radius_min", pos(2.0), Some(Num(0.1)), "m", "Smallest footprint radius.", Num(0.1)),
    p("radius_max", pos(2.0), Some(Num(0.3)), "m", "Largest footprint radius.", Num(0.3)),
    p("height_min", ParamKind::Number { min: 0.0, max: 0.5, exclusive_min: true }, Some(Num(0.05)), "m", "Lowest rock crest.", Num(0.05)),
    p("height_max", ParamKind::Number { min: 0.0, max: 0.5, exclusive_min: true }, Some(Num(0.3)), "m", "Highest rock crest.", Num(0.3)),
];

static WADING: [ParamDef; 10] = [
    p("water_level", num(-10.0, 10.0), None, "m", "Water surface elevation above the datum.", Num(0.2)),
    p(
        "flow_kind",
        ParamKind::Choice(&["still", "current", "tide"]),
        Some(Str("still")),
        "",
        "Still water, a steady current, or an oscillating tide.",
        Str("tide"),
    ),
    p("drag_coeff", num(0.82, 1.0), Some(Num(0.9)), "", "Cylinder drag coefficient in turbulent flow.", Num(0.9)),
    p("added_mass_coeff", num(0.0, 2.0), Some(Num(0.5)), "", "Added-mass coefficient of a leg.", Num(0.5)),
    p("water_density", ParamKind::Number { min: 500.0, max: 2000.0, exclusive_min: false }, Some(Num(1025.0)), "kg/m^3", "Water density.", Num(1025.0)),
    p("dyn_viscosity", pos(1.0), Some(Num(0.0011)), "Pa*s", "Dynamic viscosity.", Num(0.0011)),
    p("current_amplitude", num(-500.0, 500.0), Some(Num(0.0)), "N", "Steady current force.", Num(5.0)),
    p("tide_amplitude", num(-500.0, 500.0), Some(Num(0.0)), "N", "Tide force amplitude.", Num(10.0)),
    p("tide_omega", num(0.0, 100.0), Some(Num(0.5)), "rad/s", "Tide angular frequency.", Num(0.5)),
    p("tide_phase", num(-10.0, 10.0), Some(Num(0.0)), "rad", "Tide phase shift.", Num(0.0)),
];

static DEFORMABLE: [ParamDef; 4] = [
    p("bulldozing_coeff", pos(100_000.0), Some(Num(1000.0)), "N/m^n", "Bulldozing coefficient a.", Num(1000.0)),
    p("bulldozing_exp", pos(3.0), Some(Num(1.1)), "", "Bulldozing exponent n.", Num(1.1)),
    p("friction_coeff", pos(2.0), Some(Num(0.6)), "", "Soil friction coefficient.", Num(0.6)),
    p("presliding_scale", pos(1.0), Some(Num(0.01)), "m", "Pre-sliding displacement scale K.", Num(0.01)),
];

static COMPOSE: [ParamDef; 1] = [p(
    "blend_width",
    ParamKind::Integer { min: 0, max: 4096 },
    None,
    "cells",
    "Width of the linear cross-fade across every tile seam; 0 leaves seams sharp.",
    Int(4),
)];

static TOOLS: [ToolDef; 9] = [
    ToolDef { kind: ToolKind::Flat, doc: "Level ground at a fixed elevation.", params: &FLAT, whole_map_only: false },
    ToolDef { kind: ToolKind::Slope, doc: "Planar ramp added to the existing surface.", params: &SLOPE, whole_map_only: false },
    ToolDef { kind: ToolKind::Stairs, doc: "Flight of stairs added to the existing surface.", params: &STAIRS, whole_map_only: false },
    ToolDef { kind: ToolKind::Rough, doc: "Fractal surface roughness added to the existing surface.", params: &ROUGH, whole_map_only: false },
    ToolDef { kind: ToolKind::Pillars, doc: "Tall obstacles such as trees and street lamps.", params: &PILLARS, whole_map_only: false },
    ToolDef { kind: ToolKind::Rocks, doc: "Low obstacles such as rocks and bins.", params: &ROCKS, whole_map_only: false },
    ToolDef { kind: ToolKind::Wading, doc: "Water layer: drag, added mass, buoyancy and flow forces on submerged legs.", params: &WADING, whole_map_only: false },
    ToolDef { kind: ToolKind::Deformable, doc: "Soft soil layer: bulldozing resistance and pre-sliding friction on sunken feet.", params: &DEFORMABLE, whole_map_only: false },
    ToolDef { kind: ToolKind::Compose, doc: "Blend the seams between layout tiles.", params: &COMPOSE, whole_map_only: true },
];

pub fn tools() -> &'static [ToolDef] {
    &TOOLS
}

pub fn tool(kind: ToolKind) -> &'static ToolDef {
    TOOLS.iter().find(|t| t.kind == kind).expect("every tool kind is registered")
}

fn param_schema(p: &ParamDef) -> Value {
    let unit = if p.unit.is_empty() { String::new() } else { format!(" Unit: {}.", p.unit) };
    let mut s = Map::new();
    match p.kind {
        ParamKind::Number { min, max, exclusive_min } => {
            s.insert("type".into(), json!("number"));
            s.insert(if exclusive_min { "exclusiveMinimum" } else { "minimum" }.into(), json!(min));
            s.insert("maximum".into(), json!(max));
        }
        ParamKind::Integer { min, max } => {
            s.insert("type".into(), json!("integer"));
            s.insert("minimum".into(), json!(min));
            s.insert("maximum".into(), json!(max));
        }
        ParamKind::Choice(options) => {
            s.insert("type".into(), json!("string"));
            s.insert("enum".into(), json!(options));
        }
    }
    s.insert("description".into(), json!(format!("{}{unit}", p.doc)));
    if let Some(d) = p.default {
        s.insert("default".into(), d.to_json());
    }
    s.insert("examples".into(), json!([p.example.to_json()]));
    Value::Object(s)
}

fn target_schema(whole_map_only: bool) -> Value {
    let all = json!({ "type": "string", "enum": ["all"] });
    if whole_map_only {
        return json!({ "description": "Always the whole map.", "oneOf": [all] });
    }
    json!({
        "description": "Region to apply the tool to: \"all\" for the whole map or a layout tile. Defaults to \"all\".",
        "oneOf": [
            all,
            {
                "type": "object",
                "properties": {
                    "row": { "type": "integer", "minimum": 0 },
                    "col": { "type": "integer", "minimum": 0 }
                },
                "required": ["row", "col"],
                "additionalProperties": false
            }
        ]
    })
}

/// JSON-Schema `parameters` object for one tool. With `with_target` the
/// optional `target` property used on the function-calling wire is included.
pub fn parameters_schema(def: &ToolDef, with_target: bool) -> Value {
    let mut props = Map::new();
    for p in def.params {
        props.insert(p.name.into(), param_schema(p));
    }
    if with_target {
        props.insert("target".into(), target_schema(def.whole_map_only));
    }
    let required: Vec<&str> = def.params.iter().filter(|p| p.required()).map(|p| p.name).collect();
    json!({
        "type": "object",
        "properties": props,
        "required": required,
        "additionalProperties": false
    })
}

/// One chat-completions tool definition per registered tool.
pub fn export_function_schemas() -> Value {
    Value::Array(
        TOOLS
            .iter()
            .map(|t| {
                json!({
                    "type": "function",
                    "function": {
                        "name": t.kind.name(),
                        "description": t.doc,
                        "parameters": parameters_schema(t, true)
                    }
                })
            })
            .collect(),
    )
}
