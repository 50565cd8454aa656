use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{compile, Target, TerrainSpec, ToolKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    EmptyTerrain,
    DryWadingRegion,
    PartiallyDryWading,
    WadingClipped,
    OverwrittenCall,
    UnusedTile,
}

/// A semantic issue that does not block compilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub call_index: Option<usize>,
    pub kind: WarningKind,
    pub message: String,
}

impl Warning {
    pub fn new(call_index: Option<usize>, kind: WarningKind, message: String) -> Self {
        Self { call_index, kind, message }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.call_index {
            Some(i) => write!(f, "calls[{i}]: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Semantic checks on a parsed spec. Includes the warnings compilation itself
/// would raise (dry water regions and the like).
pub fn validate_spec(spec: &TerrainSpec) -> Vec<Warning> {
    let mut out = lint_spec(spec);
    if let Ok(t) = compile(spec) {
        out.extend(t.warnings);
    }
    out
}

/// The checks of [`validate_spec`] that need no compilation.
pub fn lint_spec(spec: &TerrainSpec) -> Vec<Warning> {
    let mut out = Vec::new();
    if spec.calls.is_empty() {
        out.push(Warning::new(None, WarningKind::EmptyTerrain, "empty terrain, flat default".into()));
    }

    for (j, later) in spec.calls.iter().enumerate() {
        if later.target != Target::All {
            continue;
        }
        let shadows = |tool: ToolKind| match later.tool {
            ToolKind::Flat => tool.is_geometry(),
            ToolKind::Wading | ToolKind::Deformable => tool == later.tool,
            _ => false,
        };
        for (i, earlier) in spec.calls[..j].iter().enumerate() {
            if shadows(earlier.tool) {
                out.push(Warning::new(
                    Some(i),
                    WarningKind::OverwrittenCall,
                    format!("{} is fully overwritten by the whole-map {} at calls[{j}]", earlier.tool.name(), later.tool.name()),
                ));
            }
        }
    }

    let layout = &spec.layout;
    if layout.rows * layout.cols > 1 {
        let painting = spec.calls.iter().filter(|c| c.tool != ToolKind::Compose);
        let mut used = BTreeSet::new();
        let mut whole = false;
        for c in painting {
            match c.target {
                Target::All => whole = true,
                Target::Tile { row, col } => {
                    used.insert((row, col));
                }
            }
        }
        if !whole {
            for row in 0..layout.rows {
                for col in 0..layout.cols {
                    if !used.contains(&(row, col)) {
                        out.push(Warning::new(
                            None,
                            WarningKind::UnusedTile,
                            format!("tile (row {row}, col {col}) is never targeted and stays flat at 0 m"),
                        ));
                    }
                }
            }
        }
    }
    out
}
