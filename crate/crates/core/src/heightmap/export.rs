//! On-disk formats: raw little-endian f32 grid, 16-bit grayscale PNG, CSV,
//! all described by one JSON sidecar.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HeightMap;
use crate::error::{Error, Result};

pub const HEIGHTMAP_SIDECAR: &str = "heightmap.json";
pub const RAW_FILE: &str = "heightmap.r32";
pub const PNG_FILE: &str = "heightmap.png";
pub const CSV_FILE: &str = "heightmap.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExportFormat {
    Raw,
    Png,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "png" => Ok(Self::Png),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?} (raw|png|csv)"))),
        }
    }
}

/// Which end of the gray ramp marks high ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PngPolarity {
    /// white = high; the usual height-map convention, used for exports.
    LightHigh,
    /// black = high, white = low; used for previews.
    DarkHigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightmapSidecar {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub min: f64,
    pub max: f64,
    pub seed: u64,
    /// Files written next to this sidecar.
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub png_polarity: Option<PngPolarity>,
}

impl HeightmapSidecar {
    pub fn describe(map: &HeightMap) -> Self {
        let (min, max) = map.min_max();
        Self {
            width: map.width(),
            height: map.height(),
            cell_size: map.cell_size(),
            min,
            max,
            seed: map.seed(),
            files: Vec::new(),
            png_polarity: None,
        }
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn raw_bytes(map: &HeightMap) -> Vec<u8> {
    map.data().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect()
}

pub fn write_raw(map: &HeightMap, path: &Path) -> Result<()> {
    fs::write(path, raw_bytes(map))?;
    Ok(())
}

/// Reads a raw grid back; the byte length must match the sidecar exactly.
pub fn read_raw(path: &Path, sidecar: &HeightmapSidecar) -> Result<HeightMap> {
    let bytes = fs::read(path)?;
    let expected = sidecar.width * sidecar.height * 4;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{} holds {} bytes, sidecar implies {expected}",
            path.display(),
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    HeightMap::from_data(sidecar.width, sidecar.height, sidecar.cell_size, data, sidecar.seed)
        .map_err(|e| Error::Format(e.to_string()))
}

/// 16-bit grayscale PNG normalized to `[min, max]`. A constant map (min == max)
/// maps to the low end of the ramp.
pub fn encode_png16(map: &HeightMap, min: f64, max: f64, polarity: PngPolarity) -> Result<Vec<u8>> {
    let span = max - min;
    let mut samples = Vec::with_capacity(map.len() * 2);
    for &v in map.data() {
        let unit = if span > 0.0 { ((v - min) / span).clamp(0.0, 1.0) } else { 0.0 };
        let unit = match polarity {
            PngPolarity::LightHigh => unit,
            PngPolarity::DarkHigh => 1.0 - unit,
        };
        let level = (unit * 65535.0).round() as u16;
        samples.extend_from_slice(&level.to_be_bytes());
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, map.width() as u32, map.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc.write_header()?;
        writer.write_image_data(&samples)?;
        writer.finish()?;
    }
    Ok(out)
}

pub fn write_csv(map: &HeightMap, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in 0..map.height() {
        let line: Vec<String> = (0..map.width()).map(|c| map.get(c, row).to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the requested formats plus `heightmap.json` into `dir`; returns the
/// paths written, sidecar last.
pub fn export_heightmap(map: &HeightMap, dir: &Path, formats: &[ExportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    let mut sidecar = HeightmapSidecar::describe(map);
    let mut written = Vec::new();
    for f in formats {
        let path = match f {
            ExportFormat::Raw => {
                let p = dir.join(RAW_FILE);
                write_raw(map, &p)?;
                p
            }
            ExportFormat::Png => {
                let p = dir.join(PNG_FILE);
                fs::write(&p, encode_png16(map, sidecar.min, sidecar.max, PngPolarity::LightHigh)?)?;
                sidecar.png_polarity = Some(PngPolarity::LightHigh);
                p
            }
            ExportFormat::Csv => {
                let p = dir.join(CSV_FILE);
                write_csv(map, &p)?;
                p
            }
        };
        sidecar.files.push(path.file_name().unwrap().to_string_lossy().into_owned());
        written.push(path);
    }
    let side_path = dir.join(HEIGHTMAP_SIDECAR);
    fs::write(&side_path, serde_json::to_string_pretty(&sidecar)?)?;
    written.push(side_path);
    Ok(written)
}

/// Loads `heightmap.json` + `heightmap.r32` from a terrain directory.
pub fn load_heightmap(dir: &Path) -> Result<(HeightMap, HeightmapSidecar)> {
    let side_path = dir.join(HEIGHTMAP_SIDECAR);
    let sidecar: HeightmapSidecar = serde_json::from_slice(&fs::read(&side_path)?)
        .map_err(|e| Error::Format(format!("{}: {e}", side_path.display())))?;
    let map = read_raw(&dir.join(RAW_FILE), &sidecar)?;
    Ok((map, sidecar))
}
