//! Shared fixtures for the criterion benches.

use terragen_core::spec::{ArgValue, Layout, Target, TerrainSpec, ToolCall, ToolKind};

/// A 2×2-tile beach: flat ground, rocks, shallow water and soft sand.
pub fn beach_spec(tile_cells: usize) -> TerrainSpec {
    TerrainSpec::new(Layout { rows: 2, cols: 2, tile_cells, cell_size: 0.1 }, 2024)
        .with_call(ToolCall::new(ToolKind::Flat, Target::All).num_arg("elevation", 0.0))
        .with_call(ToolCall::new(ToolKind::Rough, Target::All).num_arg("amplitude", 0.03))
        .with_call(ToolCall::new(ToolKind::Rocks, Target::Tile { row: 0, col: 0 }).num_arg("density", 0.3))
        .with_call(ToolCall::new(ToolKind::Wading, Target::Tile { row: 1, col: 1 }).num_arg("water_level", 0.2))
        .with_call(ToolCall::new(ToolKind::Deformable, Target::Tile { row: 1, col: 0 }))
        .with_call(ToolCall::new(ToolKind::Compose, Target::All).arg("blend_width", ArgValue::Integer(4)))
}
