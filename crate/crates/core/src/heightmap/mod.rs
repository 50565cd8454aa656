//! Regular elevation grids and the atomic geometric generators.
//!
//! Cell `(col, row)` covers `[col·s, (col+1)·s) × [row·s, (row+1)·s)` in map
//! coordinates (meters, origin at the corner of cell `(0, 0)`), where `s` is
//! the cell size. Elevation 0.0 is nominal ground.

mod export;

pub use export::{
    content_hash, encode_png16, export_heightmap, load_heightmap, raw_bytes, read_raw, write_csv, write_raw,
    ExportFormat, HeightmapSidecar, PngPolarity, CSV_FILE, HEIGHTMAP_SIDECAR, PNG_FILE, RAW_FILE,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{lattice_value, rng_from_seed, split_seed};

/// Default grid resolution in meters; resolves a 0.1 m leg diameter.
pub const DEFAULT_CELL_SIZE: f64 = 0.1;

/// Pillars are at least this tall, rocks at most this tall, so any pillar
/// overtops any rock.
pub const PILLAR_MIN_HEIGHT: f64 = 0.5;
pub const ROCK_MAX_HEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    width: usize,
    height: usize,
    cell_size: f64,
    data: Vec<f64>,
    seed: u64,
}

impl HeightMap {
    /// Builds a map from row-major elevations, checking every invariant.
    pub fn from_data(width: usize, height: usize, cell_size: f64, data: Vec<f64>, seed: u64) -> Result<Self> {
        check_dims(width, height, cell_size)?;
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite elevation at index {i}")));
        }
        Ok(Self { width, height, cell_size, data, seed })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Extent in meters along x and y.
    pub fn extent(&self) -> (f64, f64) {
        (self.width as f64 * self.cell_size, self.height as f64 * self.cell_size)
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, col: usize, row: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    /// Center of cell `(col, row)` in map coordinates.
    #[inline]
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        ((col as f64 + 0.5) * self.cell_size, (row as f64 + 0.5) * self.cell_size)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Copy of the `w × h` window whose top-left cell is `(col, row)`.
    pub fn window(&self, col: usize, row: usize, w: usize, h: usize) -> HeightMap {
        assert!(col + w <= self.width && row + h <= self.height, "window out of range");
        let mut data = Vec::with_capacity(w * h);
        for r in row..row + h {
            let start = r * self.width + col;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        HeightMap { width: w, height: h, cell_size: self.cell_size, data, seed: self.seed }
    }

    /// Writes `src` into this map with its top-left cell at `(col, row)`.
    pub fn paste(&mut self, src: &HeightMap, col: usize, row: usize) {
        assert!(col + src.width <= self.width && row + src.height <= self.height, "paste out of range");
        for r in 0..src.height {
            let dst = (row + r) * self.width + col;
            self.data[dst..dst + src.width].copy_from_slice(&src.data[r * src.width..(r + 1) * src.width]);
        }
    }

    /// Little-endian f64 bytes of the grid, used for content hashing.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    fn map_cells(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> HeightMap {
        let mut out = self.clone();
        for row in 0..self.height {
            for col in 0..self.width {
                let i = row * self.width + col;
                out.data[i] = f(col, row, self.data[i]);
            }
        }
        out
    }
}

fn check_dims(width: usize, height: usize, cell_size: f64) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(Error::InvalidArgument(format!(
            "map dimensions must be at least 2x2, got {width}x{height}"
        )));
    }
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidArgument(format!("cell_size must be positive, got {cell_size}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")))
    }
}

pub fn new_flat(width: usize, height: usize, cell_size: f64, elevation: f64) -> Result<HeightMap> {
    check_dims(width, height, cell_size)?;
    check_finite("elevation", elevation)?;
    Ok(HeightMap { width, height, cell_size, data: vec![elevation; width * height], seed: 0 })
}

/// Adds a planar ramp rising at `grade` (rise over run) along `heading`,
/// measured from the center of cell `(0, 0)`. The heading is normalized here.
pub fn gen_slope(base: &HeightMap, grade: f64, heading: [f64; 2]) -> Result<HeightMap> {
    check_finite("grade", grade)?;
    let norm = heading[0].hypot(heading[1]);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument("slope heading must be a non-zero vector".into()));
    }
    let (dx, dy) = (heading[0] / norm, heading[1] / norm);
    let s = base.cell_size;
    Ok(base.map_cells(|col, row, z| {
        let along = col as f64 * s * dx + row as f64 * s * dy;
        z + grade * along
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StairDirection {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StairsParams {
    pub step_height: f64,
    pub step_depth: f64,
    pub count: u32,
    pub direction: StairDirection,
    pub axis: Axis,
}

/// Adds a flight of `count` steps along `axis`. The first tread sits at the
/// base elevation; ascending stairs climb by `step_height` every
/// `step_depth` meters, descending stairs drop by the same amount. The
/// whole flight must fit on the grid.
pub fn gen_stairs(base: &HeightMap, p: &StairsParams) -> Result<HeightMap> {
    let s = base.cell_size;
    if !(p.step_height > 0.0 && p.step_height.is_finite()) {
        return Err(Error::InvalidArgument(format!("step_height must be positive, got {}", p.step_height)));
    }
    if !(p.step_depth >= s && p.step_depth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step_depth {} is smaller than the cell size {s}",
            p.step_depth
        )));
    }
    if p.count == 0 {
        return Err(Error::InvalidArgument("stairs need at least one step".into()));
    }
    let cells = match p.axis {
        Axis::X => base.width,
        Axis::Y => base.height,
    };
    let run = (cells - 1) as f64 * s;
    let needed = p.count as f64 * p.step_depth;
    if needed > run + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "{} steps of depth {} m need {needed} m but the grid spans {run} m",
            p.count, p.step_depth
        )));
    }
    let sign = match p.direction {
        StairDirection::Ascending => 1.0,
        StairDirection::Descending => -1.0,
    };
    Ok(base.map_cells(|col, row, z| {
        let idx = match p.axis {
            Axis::X => col,
            Axis::Y => row,
        };
        let k = stair_index(idx as f64 * s, p.step_depth).min(p.count);
        z + sign * p.step_height * k as f64
    }))
}

#[inline]
fn stair_index(distance: f64, depth: f64) -> u32 {
    // The nudge keeps exact multiples like 0.3 / 0.1 on the intended step.
    (distance / depth + 1e-9).floor() as u32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughParams {
    pub amplitude: f64,
    pub octaves: u32,
    pub lacunarity: f64,
    pub persistence: f64,
    /// Base frequency in cycles per meter.
    pub frequency: f64,
}

impl Default for RoughParams {
    fn default() -> Self {
        Self { amplitude: 0.05, octaves: 4, lacunarity: 2.0, persistence: 0.5, frequency: 1.0 }
    }
}

/// Adds seeded fractal value noise. The octave sum is normalized by its total
/// weight, so the deviation from `base` never exceeds `amplitude`.
pub fn gen_rough(base: &HeightMap, p: &RoughParams, seed: u64) -> Result<HeightMap> {
    if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!("amplitude must be >= 0, got {}", p.amplitude)));
    }
    if p.octaves == 0 {
        return Err(Error::InvalidArgument("octaves must be >= 1".into()));
    }
    if !(p.lacunarity > 0.0 && p.persistence >= 0.0 && p.frequency > 0.0) {
        return Err(Error::InvalidArgument(
            "lacunarity and frequency must be positive, persistence non-negative".into(),
        ));
    }
    if p.amplitude == 0.0 {
        return Ok(base.clone().with_seed(seed));
    }
    let octave_seeds: Vec<u64> = (0..p.octaves as u64).map(|o| split_seed(seed, o)).collect();
    let mut weights = Vec::with_capacity(p.octaves as usize);
    let mut w = 1.0;
    for _ in 0..p.octaves {
        weights.push(w);
        w *= p.persistence;
    }
    let total: f64 = weights.iter().sum();
    let out = base.map_cells(|col, row, z| {
        let (x, y) = base.cell_center(col, row);
        let mut freq = p.frequency;
        let mut acc = 0.0;
        for (o, &wt) in weights.iter().enumerate() {
            acc += wt * value_noise(octave_seeds[o], x * freq, y * freq);
            freq *= p.lacunarity;
        }
        z + p.amplitude * (acc / total).clamp(-1.0, 1.0)
    });
    Ok(out.with_seed(seed))
}

/// Smoothstep-interpolated lattice noise in [-1, 1].
fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smooth(x - fx), smooth(y - fy));
    let v00 = lattice_value(seed, ix, iy);
    let v10 = lattice_value(seed, ix + 1, iy);
    let v01 = lattice_value(seed, ix, iy + 1);
    let v11 = lattice_value(seed, ix + 1, iy + 1);
    let top = v00 + (v10 - v00) * tx;
    let bottom = v01 + (v11 - v01) * tx;
    top + (bottom - top) * ty
}

#[inline]
fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    Pillar,
    Rock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleField {
    pub kind: ObstacleKind,
    pub placements: Vec<Placement>,
}

impl ObstacleField {
    pub(crate) fn translated(mut self, dx: f64, dy: f64) -> Self {
        for p in &mut self.placements {
            p.x += dx;
            p.y += dy;
        }
        self
    }
}

/// Attempts per requested obstacle before rejection sampling gives up.
const ATTEMPTS_PER_OBSTACLE: usize = 100;

/// Scatters non-overlapping obstacles by seeded rejection sampling.
///
/// The requested count is `round(density × area)`. Candidates whose footprint
/// would leave the map or overlap an accepted obstacle are rejected; after
/// `100 × count` attempts the field holds whatever was accepted. Pillars are
/// flat-topped cylinders, rocks are ellipsoidal domes whose crest is the
/// sampled height.
pub fn place_obstacles(
    base: &HeightMap,
    kind: ObstacleKind,
    density: f64,
    radius_range: (f64, f64),
    height_range: (f64, f64),
    seed: u64,
) -> Result<(HeightMap, ObstacleField)> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::InvalidArgument(format!("density must be >= 0, got {density}")));
    }
    check_range("radius_range", radius_range)?;
    check_range("height_range", height_range)?;
    if radius_range.0 < base.cell_size {
        return Err(Error::InvalidArgument(format!(
            "minimum radius {} is below the cell size {}",
            radius_range.0, base.cell_size
        )));
    }
    match kind {
        ObstacleKind::Pillar if height_range.0 < PILLAR_MIN_HEIGHT => {
            return Err(Error::InvalidArgument(format!("pillars must be at least {PILLAR_MIN_HEIGHT} m tall")));
        }
        ObstacleKind::Rock if height_range.1 > ROCK_MAX_HEIGHT => {
            return Err(Error::InvalidArgument(format!("rocks must be at most {ROCK_MAX_HEIGHT} m tall")));
        }
        _ => {}
    }

    let (w, h) = base.extent();
    let target = (density * w * h).round() as usize;
    let mut rng = rng_from_seed(seed);
    let mut placements: Vec<Placement> = Vec::with_capacity(target);
    let mut attempts = 0;
    while placements.len() < target && attempts < target * ATTEMPTS_PER_OBSTACLE {
        attempts += 1;
        let radius = sample(&mut rng, radius_range);
        if 2.0 * radius >= w || 2.0 * radius >= h {
            continue;
        }
        let x = rng.random_range(radius..w - radius);
        let y = rng.random_range(radius..h - radius);
        let height = sample(&mut rng, height_range);
        let clear = placements
            .iter()
            .all(|p| (p.x - x).hypot(p.y - y) >= p.radius + radius);
        if clear {
            placements.push(Placement { x, y, radius, height });
        }
    }

    let mut out = base.clone().with_seed(seed);
    for p in &placements {
        raise_footprint(&mut out, kind, p);
    }
    Ok((out, ObstacleField { kind, placements }))
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive and non-empty, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn sample(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn raise_footprint(map: &mut HeightMap, kind: ObstacleKind, p: &Placement) {
    let s = map.cell_size;
    let col_lo = ((p.x - p.radius) / s).floor().max(0.0) as usize;
    let col_hi = (((p.x + p.radius) / s).ceil() as usize).min(map.width);
    let row_lo = ((p.y - p.radius) / s).floor().max(0.0) as usize;
    let row_hi = (((p.y + p.radius) / s).ceil() as usize).min(map.height);
    for row in row_lo..row_hi {
        for col in col_lo..col_hi {
            let (cx, cy) = map.cell_center(col, row);
            let d = (cx - p.x).hypot(cy - p.y);
            if d > p.radius {
                continue;
            }
            let lift = match kind {
                ObstacleKind::Pillar => p.height,
                ObstacleKind::Rock => p.height * (1.0 - (d / p.radius).powi(2)).sqrt(),
            };
            let z = map.get(col, row);
            map.set(col, row, z + lift);
        }
    }
}

/// Stitches a rectangular grid of tiles (outer index = tile row) into one map.
///
/// Tiles in the same tile row must share a height and tiles in the same tile
/// column a width. With `blend_width > 0` every seam is cross-faded linearly
/// over `blend_width` cells straddling it; with 0 the tiles abut exactly.
pub fn compose_tiles(tiles: &[Vec<HeightMap>], blend_width: usize) -> Result<HeightMap> {
    let rows = tiles.len();
    let cols = tiles.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || tiles.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("tile grid must be non-empty and rectangular".into()));
    }
    let cell_size = tiles[0][0].cell_size;
    if tiles.iter().flatten().any(|t| t.cell_size != cell_size) {
        return Err(Error::InvalidArgument("all tiles must share one cell_size".into()));
    }
    let col_widths: Vec<usize> = tiles[0].iter().map(HeightMap::width).collect();
    let row_heights: Vec<usize> = tiles.iter().map(|r| r[0].height).collect();
    for (r, tile_row) in tiles.iter().enumerate() {
        for (c, t) in tile_row.iter().enumerate() {
            if t.width != col_widths[c] || t.height != row_heights[r] {
                return Err(Error::InvalidArgument(format!(
                    "tile ({r}, {c}) is {}x{}, expected {}x{}",
                    t.width, t.height, col_widths[c], row_heights[r]
                )));
            }
        }
    }
    if rows == 1 && cols == 1 {
        return Ok(tiles[0][0].clone());
    }
    let min_dim = col_widths.iter().chain(&row_heights).copied().min().unwrap_or(0);
    if blend_width > min_dim {
        return Err(Error::InvalidArgument(format!(
            "blend_width {blend_width} exceeds the smallest tile dimension {min_dim}"
        )));
    }

    let width: usize = col_widths.iter().sum();
    let height: usize = row_heights.iter().sum();
    let mut out = HeightMap {
        width,
        height,
        cell_size,
        data: vec![0.0; width * height],
        seed: tiles[0][0].seed,
    };
    let mut y0 = 0;
    for (r, tile_row) in tiles.iter().enumerate() {
        let mut x0 = 0;
        for (c, t) in tile_row.iter().enumerate() {
            out.paste(t, x0, y0);
            x0 += col_widths[c];
        }
        y0 += row_heights[r];
    }
    if blend_width == 0 {
        return Ok(out);
    }

    let seams = |sizes: &[usize]| -> Vec<usize> {
        sizes.iter().scan(0, |acc, &s| { *acc += s; Some(*acc) }).take(sizes.len() - 1).collect()
    };
    let b = blend_width;
    let lead = b / 2;

    let pre = out.clone();
    for seam in seams(&col_widths) {
        for row in 0..height {
            for k in 0..b {
                let col = seam - lead + k;
                let t = (k as f64 + 0.5) / b as f64;
                let left = pre.get(col.min(seam - 1), row);
                let right = pre.get(col.max(seam), row);
                out.set(col, row, (1.0 - t) * left + t * right);
            }
        }
    }
    let pre = out.clone();
    for seam in seams(&row_heights) {
        for k in 0..b {
            let row = seam - lead + k;
            let t = (k as f64 + 0.5) / b as f64;
            for col in 0..width {
                let up = pre.get(col, row.min(seam - 1));
                let down = pre.get(col, row.max(seam));
                out.set(col, row, (1.0 - t) * up + t * down);
            }
        }
    }
    Ok(out)
}
