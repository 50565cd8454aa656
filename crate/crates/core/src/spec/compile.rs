use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::validate::{Warning, WarningKind};
use super::{parse_value, Layout, TerrainSpec, ToolCall, ToolKind};
use crate::error::{Error, Result};
use crate::heightmap::{
    compose_tiles, export_heightmap, gen_rough, gen_slope, gen_stairs, load_heightmap, new_flat,
    place_obstacles, Axis, ExportFormat, HeightMap, ObstacleField, ObstacleKind, RoughParams, StairDirection,
    StairsParams,
};
use crate::physics::{FlowKind, FluidParams, SoilParams};
use crate::rng::split_seed;

/// Largest grid `compile` will allocate.
pub const MAX_CELLS: usize = 1 << 24;

pub const ATTRIBUTES_SIDECAR: &str = "attributes.json";
pub const ATTRIBUTES_FILE: &str = "attributes.bin";

const WADING_BIT: u8 = 0b01;
const DEFORMABLE_BIT: u8 = 0b10;
/// Bytes per cell in `attributes.bin`: packed flags then f32 LE water level.
const RECORD_BYTES: usize = 5;

/// Per-cell physical layer matching a height map cell for cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeGrid {
    width: usize,
    height: usize,
    flags: Vec<u8>,
    water_level: Vec<f64>,
    soil_region: Vec<u8>,
}

impl AttributeGrid {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self { width, height, flags: vec![0; n], water_level: vec![0.0; n], soil_region: vec![0; n] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn idx(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn wading(&self, col: usize, row: usize) -> bool {
        self.flags[self.idx(col, row)] & WADING_BIT != 0
    }

    pub fn deformable(&self, col: usize, row: usize) -> bool {
        self.flags[self.idx(col, row)] & DEFORMABLE_BIT != 0
    }

    pub fn water_level(&self, col: usize, row: usize) -> f64 {
        self.water_level[self.idx(col, row)]
    }

    /// 0 when the cell is not deformable.
    pub fn soil_region(&self, col: usize, row: usize) -> u8 {
        self.soil_region[self.idx(col, row)]
    }

    /// bit 0 wading, bit 1 deformable, bits 2..8 soil region id.
    pub fn packed(&self, col: usize, row: usize) -> u8 {
        let i = self.idx(col, row);
        self.flags[i] | (self.soil_region[i] << 2)
    }

    pub fn count_wading(&self) -> usize {
        self.flags.iter().filter(|f| *f & WADING_BIT != 0).count()
    }

    pub fn count_deformable(&self) -> usize {
        self.flags.iter().filter(|f| *f & DEFORMABLE_BIT != 0).count()
    }

    fn set_wading(&mut self, col: usize, row: usize, level: Option<f64>) {
        let i = self.idx(col, row);
        match level {
            Some(l) => {
                self.flags[i] |= WADING_BIT;
                self.water_level[i] = l;
            }
            None => {
                self.flags[i] &= !WADING_BIT;
                self.water_level[i] = 0.0;
            }
        }
    }

    fn set_deformable(&mut self, col: usize, row: usize, region: u8) {
        let i = self.idx(col, row);
        self.flags[i] |= DEFORMABLE_BIT;
        self.soil_region[i] = region;
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.flags.len() * RECORD_BYTES);
        for row in 0..self.height {
            for col in 0..self.width {
                out.push(self.packed(col, row));
                out.extend_from_slice(&(self.water_level(col, row) as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height * RECORD_BYTES {
            return Err(Error::Format(format!(
                "attribute grid holds {} bytes, expected {}",
                bytes.len(),
                width * height * RECORD_BYTES
            )));
        }
        let mut grid = Self::new(width, height);
        for (i, rec) in bytes.chunks_exact(RECORD_BYTES).enumerate() {
            grid.flags[i] = rec[0] & (WADING_BIT | DEFORMABLE_BIT);
            grid.soil_region[i] = rec[0] >> 2;
            grid.water_level[i] = f32::from_le_bytes([rec[1], rec[2], rec[3], rec[4]]) as f64;
        }
        Ok(grid)
    }
}

/// Geometry plus physical layer, ready for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTerrain {
    pub heightmap: HeightMap,
    pub attributes: AttributeGrid,
    pub fluid: FluidParams,
    pub soil_regions: BTreeMap<u8, SoilParams>,
    pub obstacles: Vec<ObstacleField>,
    pub warnings: Vec<Warning>,
    pub provenance: TerrainSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributesSidecar {
    width: usize,
    height: usize,
    cell_size: f64,
    record: String,
    fluid: FluidParams,
    soil_regions: BTreeMap<u8, SoilParams>,
    obstacles: Vec<ObstacleField>,
    warnings: Vec<Warning>,
    spec: serde_json::Value,
}

const RECORD_DOC: &str = "u8 flags (bit0 wading, bit1 deformable, bits2-7 soil region) + f32le water_level, row-major";

impl GeneratedTerrain {
    /// Writes the height map in `formats`; with `raw` the attribute layer and
    /// its sidecar (fluid, soil table, provenance spec) are written too.
    pub fn export(&self, dir: &Path, formats: &[ExportFormat]) -> Result<Vec<PathBuf>> {
        let mut written = export_heightmap(&self.heightmap, dir, formats)?;
        if formats.contains(&ExportFormat::Raw) {
            let bin = dir.join(ATTRIBUTES_FILE);
            fs::write(&bin, self.attributes.to_bytes())?;
            let side = AttributesSidecar {
                width: self.attributes.width,
                height: self.attributes.height,
                cell_size: self.heightmap.cell_size(),
                record: RECORD_DOC.into(),
                fluid: self.fluid.clone(),
                soil_regions: self.soil_regions.clone(),
                obstacles: self.obstacles.clone(),
                warnings: self.warnings.clone(),
                spec: self.provenance.to_json(),
            };
            let side_path = dir.join(ATTRIBUTES_SIDECAR);
            fs::write(&side_path, serde_json::to_string_pretty(&side)?)?;
            written.push(bin);
            written.push(side_path);
        }
        Ok(written)
    }

    /// Loads a terrain exported with the `raw` format.
    pub fn load(dir: &Path) -> Result<Self> {
        let (heightmap, _) = load_heightmap(dir)?;
        let side_path = dir.join(ATTRIBUTES_SIDECAR);
        let side: AttributesSidecar = serde_json::from_slice(&fs::read(&side_path)?)
            .map_err(|e| Error::Format(format!("{}: {e}", side_path.display())))?;
        if (side.width, side.height) != (heightmap.width(), heightmap.height()) {
            return Err(Error::Format("attribute grid and height map dimensions differ".into()));
        }
        let attributes = AttributeGrid::from_bytes(side.width, side.height, &fs::read(dir.join(ATTRIBUTES_FILE))?)?;
        let provenance = parse_value(&side.spec).map_err(|e| Error::Format(format!("embedded spec: {e}")))?;
        Ok(Self {
            heightmap,
            attributes,
            fluid: side.fluid,
            soil_regions: side.soil_regions,
            obstacles: side.obstacles,
            warnings: side.warnings,
            provenance,
        })
    }

    pub fn soil(&self, region: u8) -> Option<&SoilParams> {
        self.soil_regions.get(&region)
    }
}

struct Compiler<'a> {
    layout: &'a Layout,
    map: HeightMap,
    attrs: AttributeGrid,
    fluid: FluidParams,
    soil_regions: BTreeMap<u8, SoilParams>,
    obstacles: Vec<ObstacleField>,
    warnings: Vec<Warning>,
}

/// Runs every call in order. Child seeds are derived from the global seed and
/// the call index, so the output is a pure function of the spec.
pub fn compile(spec: &TerrainSpec) -> Result<GeneratedTerrain> {
    let layout = &spec.layout;
    let (w, h) = (layout.width_cells(), layout.height_cells());
    let cells = w.saturating_mul(h);
    if cells > MAX_CELLS {
        return Err(Error::Capacity { cells, limit: MAX_CELLS });
    }
    // specs built in code skip the parser; run them through it once
    super::parse_value(&spec.to_json())?;
    let map = new_flat(w, h, layout.cell_size, 0.0)?.with_seed(spec.global_seed);
    let mut c = Compiler {
        layout,
        map,
        attrs: AttributeGrid::new(w, h),
        fluid: FluidParams::default(),
        soil_regions: BTreeMap::new(),
        obstacles: Vec::new(),
        warnings: Vec::new(),
    };
    for (i, call) in spec.calls.iter().enumerate() {
        c.apply(i, call, split_seed(spec.global_seed, i as u64))?;
    }
    c.clip_dry_wading();
    Ok(GeneratedTerrain {
        heightmap: c.map,
        attributes: c.attrs,
        fluid: c.fluid,
        soil_regions: c.soil_regions,
        obstacles: c.obstacles,
        warnings: c.warnings,
        provenance: spec.clone(),
    })
}

impl Compiler<'_> {
    fn apply(&mut self, index: usize, call: &ToolCall, seed: u64) -> Result<()> {
        let (col0, row0, w, h) = self.layout.region(call.target);
        let region = self.map.window(col0, row0, w, h);
        let updated = match call.tool {
            ToolKind::Flat => Some(new_flat(w, h, self.layout.cell_size, call.number("elevation"))?),
            ToolKind::Slope => {
                let a = call.number("heading_deg").to_radians();
                Some(gen_slope(&region, call.number("grade"), [a.cos(), a.sin()])?)
            }
            ToolKind::Stairs => {
                let p = StairsParams {
                    step_height: call.number("step_height"),
                    step_depth: call.number("step_depth"),
                    count: call.integer("count") as u32,
                    direction: match call.choice("direction").as_str() {
                        "descending" => StairDirection::Descending,
                        _ => StairDirection::Ascending,
                    },
                    axis: if call.choice("axis") == "y" { Axis::Y } else { Axis::X },
                };
                Some(gen_stairs(&region, &p)?)
            }
            ToolKind::Rough => {
                let p = RoughParams {
                    amplitude: call.number("amplitude"),
                    octaves: call.integer("octaves") as u32,
                    lacunarity: call.number("lacunarity"),
                    persistence: call.number("persistence"),
                    frequency: call.number("frequency"),
                };
                Some(gen_rough(&region, &p, seed)?)
            }
            ToolKind::Pillars | ToolKind::Rocks => {
                let kind = if call.tool == ToolKind::Pillars { ObstacleKind::Pillar } else { ObstacleKind::Rock };
                let (out, field) = place_obstacles(
                    &region,
                    kind,
                    call.number("density"),
                    (call.number("radius_min"), call.number("radius_max")),
                    (call.number("height_min"), call.number("height_max")),
                    seed,
                )?;
                let s = self.layout.cell_size;
                self.obstacles.push(field.translated(col0 as f64 * s, row0 as f64 * s));
                Some(out)
            }
            ToolKind::Wading => {
                self.paint_wading(index, call, (col0, row0, w, h));
                None
            }
            ToolKind::Deformable => {
                let id = self.soil_regions.len() as u8 + 1;
                self.soil_regions.insert(
                    id,
                    SoilParams {
                        bulldozing_coeff: call.number("bulldozing_coeff"),
                        bulldozing_exp: call.number("bulldozing_exp"),
                        friction_coeff: call.number("friction_coeff"),
                        presliding_scale: call.number("presliding_scale"),
                    },
                );
                for row in row0..row0 + h {
                    for col in col0..col0 + w {
                        self.attrs.set_deformable(col, row, id);
                    }
                }
                None
            }
            ToolKind::Compose => {
                self.compose(call.integer("blend_width") as usize)?;
                None
            }
        };
        if let Some(m) = updated {
            self.map.paste(&m, col0, row0);
        }
        Ok(())
    }

    fn paint_wading(&mut self, index: usize, call: &ToolCall, (col0, row0, w, h): (usize, usize, usize, usize)) {
        let level = call.number("water_level");
        self.fluid = FluidParams {
            rho: call.number("water_density"),
            drag_coeff: call.number("drag_coeff"),
            added_mass_coeff: call.number("added_mass_coeff"),
            dyn_viscosity: call.number("dyn_viscosity"),
            flow_kind: match call.choice("flow_kind").as_str() {
                "current" => FlowKind::Current,
                "tide" => FlowKind::Tide,
                _ => FlowKind::Still,
            },
            current_amplitude: call.number("current_amplitude"),
            tide_amplitude: call.number("tide_amplitude"),
            tide_omega: call.number("tide_omega"),
            tide_phase: call.number("tide_phase"),
            water_level: level,
        };
        let mut dry = 0;
        for row in row0..row0 + h {
            for col in col0..col0 + w {
                if level > self.map.get(col, row) {
                    self.attrs.set_wading(col, row, Some(level));
                } else {
                    self.attrs.set_wading(col, row, None);
                    dry += 1;
                }
            }
        }
        if dry == w * h {
            self.warnings.push(Warning::new(
                Some(index),
                WarningKind::DryWadingRegion,
                format!("dry wading region: water level {level} m is at or below the whole region"),
            ));
        } else if dry > 0 {
            self.warnings.push(Warning::new(
                Some(index),
                WarningKind::PartiallyDryWading,
                format!("{dry} of {} cells stand above water level {level} m and were left dry", w * h),
            ));
        }
    }

    /// Later geometry can rise above earlier water; those cells lose their flag.
    fn clip_dry_wading(&mut self) {
        let mut clipped = 0;
        for row in 0..self.map.height() {
            for col in 0..self.map.width() {
                if self.attrs.wading(col, row) && self.attrs.water_level(col, row) <= self.map.get(col, row) {
                    self.attrs.set_wading(col, row, None);
                    clipped += 1;
                }
            }
        }
        if clipped > 0 {
            self.warnings.push(Warning::new(
                None,
                WarningKind::WadingClipped,
                format!("{clipped} wading cells were raised above the water by later geometry and cleared"),
            ));
        }
    }

    fn compose(&mut self, blend_width: usize) -> Result<()> {
        let n = self.layout.tile_cells;
        let tiles: Vec<Vec<HeightMap>> = (0..self.layout.rows)
            .map(|r| (0..self.layout.cols).map(|c| self.map.window(c * n, r * n, n, n)).collect())
            .collect();
        let seed = self.map.seed();
        self.map = compose_tiles(&tiles, blend_width)?.with_seed(seed);
        Ok(())
    }
}
