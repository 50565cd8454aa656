//! Procedural terrains for legged-locomotion simulation.
//!
//! Geometry lives in height maps ([`heightmap`]); physical behaviour is a
//! per-cell attribute layer (wading water, deformable soil) whose forces are
//! evaluated by the kernels in [`physics`]. Terrains are described as an
//! ordered list of tool calls ([`spec`]), which a vision-language model can
//! produce through function calling ([`vlm`]). [`harness`] drives prescribed
//! leg trajectories across a compiled terrain and logs every force term.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod heightmap;
pub mod physics;
pub mod rng;
pub mod spec;
pub mod vlm;

pub use error::{Error, ErrorClass, Result, SpecError};
pub use harness::{ForceReport, ForceRow, FootTrajectory, Preset, SimConfig};
pub use heightmap::{HeightMap, ObstacleField, ObstacleKind};
pub use physics::{FlowKind, FluidParams, LegState, NoiseSpec, PhysicsConfig, SoilParams};
pub use spec::{AttributeGrid, GeneratedTerrain, Layout, Target, TerrainSpec, ToolCall, ToolKind};
pub use vlm::{EndpointConfig, GenerationRequest, GenerationTrace};
