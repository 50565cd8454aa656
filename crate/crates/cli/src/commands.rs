use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use terragen_core::harness::{self, Preset, PresetParams};
use terragen_core::heightmap::{
    content_hash, encode_png16, load_heightmap, raw_bytes, ExportFormat, HeightmapSidecar, PngPolarity, PNG_FILE,
};
use terragen_core::physics::NoiseSpec;
use terragen_core::spec::{compile, lint_spec, parse_spec, parse_value, Layout, TerrainSpec};
use terragen_core::vlm::{self, GenerationRequest, ImagePayload};
use terragen_core::{EndpointConfig, Error, GeneratedTerrain, Result, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "terragen", version, about = "Procedural terrains for legged-robot simulation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a spec file and export the terrain.
    Gen(GenArgs),
    /// Ask a vision-language model for a spec, then compile it.
    Prompt(PromptArgs),
    /// Print the tool schemas sent to the model.
    Schemas {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a trajectory preset over a compiled terrain and log forces.
    Harness(HarnessArgs),
    /// Compile every spec in a directory and write a hash manifest.
    Atlas(AtlasArgs),
    /// Grayscale preview of an exported height map (dark = high).
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "raw,png")]
    formats: Vec<String>,
}

impl ExportArgs {
    fn formats(&self) -> Result<Vec<ExportFormat>> {
        let mut f: Vec<ExportFormat> = self.formats.iter().map(|s| s.trim().parse()).collect::<Result<_>>()?;
        f.sort();
        f.dedup();
        if f.is_empty() {
            return Err(Error::InvalidArgument("--formats is empty".into()));
        }
        Ok(f)
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    spec: PathBuf,
    #[command(flatten)]
    export: ExportArgs,
    /// Overrides the spec's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec's cell size in meters.
    #[arg(long)]
    cell_size: Option<f64>,
}

#[derive(Debug, Args)]
struct PromptArgs {
    /// Text description of the terrain.
    #[arg(conflicts_with = "image", required_unless_present = "image")]
    text: Option<String>,
    /// Image of the terrain instead of a text description.
    #[arg(long)]
    image: Option<PathBuf>,
    #[command(flatten)]
    export: ExportArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    cell_size: f64,
    #[arg(long, default_value_t = 1)]
    rows: usize,
    #[arg(long, default_value_t = 1)]
    cols: usize,
    #[arg(long, default_value_t = 64)]
    tile_cells: usize,
    #[arg(long, env = vlm::ENV_API_URL)]
    api_url: Option<String>,
    #[arg(long, env = vlm::ENV_API_KEY, hide_env_values = true)]
    api_key: Option<String>,
    #[arg(long, env = vlm::ENV_MODEL)]
    model: Option<String>,
    #[arg(long, default_value_t = vlm::DEFAULT_MAX_RETRIES)]
    max_retries: u32,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = vlm::DEFAULT_TIMEOUT_SECS)]
    timeout: f64,
    /// Replaces the bundled system prompt.
    #[arg(long)]
    system_prompt: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HarnessArgs {
    /// Directory written by `gen` with the raw format.
    terrain: PathBuf,
    /// walk-in-place, straight-walk or sinusoid.
    #[arg(long, default_value = "straight-walk")]
    preset: String,
    /// CSV output path; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the rows as JSON lines.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// SimConfig JSON; individual flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Foot speed in m/s.
    #[arg(long)]
    speed: Option<f64>,
    /// Start point `x,y` in meters; defaults depend on the preset.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    start: Option<Vec<f64>>,
    #[arg(long)]
    foot_z: Option<f64>,
    /// Fix ε and ξ at 1.
    #[arg(long)]
    no_noise: bool,
}

#[derive(Debug, Args)]
struct AtlasArgs {
    spec_dir: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Directory holding heightmap.json and heightmap.r32.
    terrain: PathBuf,
    /// Output PNG; a JSON sidecar is written next to it.
    #[arg(long, short)]
    out: PathBuf,
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Prompt(a) => cmd_prompt(a),
        Command::Schemas { out } => {
            let text = serde_json::to_string_pretty(&terragen_core::spec::export_function_schemas())?;
            match out {
                Some(p) => fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Harness(a) => cmd_harness(a),
        Command::Atlas(a) => cmd_atlas(a),
        Command::Render(a) => cmd_render(a),
    }
}

fn emit(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("value serializes"));
}

fn paths(p: &[PathBuf]) -> Vec<String> {
    p.iter().map(|p| p.display().to_string()).collect()
}

/// Compiles, prints warnings and exports.
fn build(spec: &TerrainSpec, dir: &Path, formats: &[ExportFormat]) -> Result<(GeneratedTerrain, Vec<PathBuf>)> {
    let terrain = compile(spec)?;
    let mut warnings = lint_spec(spec);
    warnings.extend(terrain.warnings.iter().cloned());
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(dir)?;
    let written = terrain.export(dir, formats)?;
    Ok((terrain, written))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let formats = a.export.formats()?;
    let text = fs::read_to_string(&a.spec)?;
    let mut spec = parse_spec(&text)?;
    if a.seed.is_some() || a.cell_size.is_some() {
        spec.global_seed = a.seed.unwrap_or(spec.global_seed);
        spec.layout.cell_size = a.cell_size.unwrap_or(spec.layout.cell_size);
        spec = parse_value(&spec.to_json())?;
    }
    let (terrain, written) = build(&spec, &a.export.out, &formats)?;
    emit(&json!({
        "out": a.export.out.display().to_string(),
        "width": terrain.heightmap.width(),
        "height": terrain.heightmap.height(),
        "files": paths(&written),
        "warnings": terrain.warnings,
    }));
    Ok(())
}

fn media_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("webp") => "image/webp",
        Some("gif") => "image/gif",
        _ => "image/png",
    }
}

fn cmd_prompt(a: PromptArgs) -> Result<()> {
    let formats = a.export.formats()?;
    let layout = Layout { rows: a.rows, cols: a.cols, tile_cells: a.tile_cells, cell_size: a.cell_size };
    let mut request = match (&a.text, &a.image) {
        (Some(t), None) => GenerationRequest::text(t.clone()),
        (None, Some(p)) => {
            let bytes = fs::read(p).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
            GenerationRequest::image(ImagePayload::from_bytes(&bytes, media_type(p)))
        }
        _ => return Err(Error::InvalidArgument("pass either a text prompt or --image".into())),
    }
    .with_layout(layout, a.seed);
    if let Some(p) = &a.system_prompt {
        request.system_prompt = Some(fs::read_to_string(p)?);
    }
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        return Err(Error::Config("--timeout must be positive".into()));
    }
    let mut cfg = EndpointConfig::resolve(a.api_url, a.api_key, a.model)?;
    cfg.max_retries = a.max_retries;
    cfg.timeout = Duration::from_secs_f64(a.timeout);

    let out = &a.export.out;
    fs::create_dir_all(out)?;
    let trace_path = out.join("trace.json");
    match vlm::request_terrain(&request, &cfg) {
        Ok((spec, trace)) => {
            fs::write(&trace_path, serde_json::to_string_pretty(&trace)?)?;
            let spec_path = out.join("spec.json");
            fs::write(&spec_path, spec.to_json_string())?;
            let (terrain, mut written) = build(&spec, out, &formats)?;
            written.insert(0, spec_path);
            written.insert(1, trace_path);
            emit(&json!({
                "out": out.display().to_string(),
                "attempts": trace.attempts.len(),
                "files": paths(&written),
                "warnings": terrain.warnings,
            }));
            Ok(())
        }
        Err(Error::GenerationFailed { reason, trace }) => {
            fs::write(&trace_path, serde_json::to_string_pretty(&trace)?)?;
            Err(Error::GenerationFailed {
                reason: format!("{reason} (trace written to {})", trace_path.display()),
                trace,
            })
        }
        Err(e) => Err(e),
    }
}

fn cmd_harness(a: HarnessArgs) -> Result<()> {
    let preset: Preset = a.preset.parse()?;
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<SimConfig>(&fs::read_to_string(p)?)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?,
        None => SimConfig::default(),
    };
    cfg.dt = a.dt.unwrap_or(cfg.dt);
    cfg.duration = a.duration.unwrap_or(cfg.duration);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    if a.no_noise {
        cfg.episode_noise = NoiseSpec::unit();
        cfg.step_noise = NoiseSpec::unit();
    }
    cfg.validate()?;

    let terrain = GeneratedTerrain::load(&a.terrain)?;
    let (ex, ey) = terrain.heightmap.extent();
    let start = match preset {
        // leave room to walk forward
        Preset::StraightWalk => [terrain.heightmap.cell_size(), ey / 2.0],
        _ => [ex / 2.0, ey / 2.0],
    };
    let mut params = PresetParams { start, ..Default::default() };
    if let Some(s) = &a.start {
        params.start = [s[0], s[1]];
    }
    params.speed = a.speed.unwrap_or(params.speed);
    params.foot_z = a.foot_z.unwrap_or(params.foot_z);

    let report = harness::run_preset(&terrain, &cfg, preset, &params)?;
    match &a.out {
        Some(p) => report.save_csv(p)?,
        None => report.write_csv(std::io::stdout().lock())?,
    }
    if let Some(p) = &a.jsonl {
        report.save_jsonl(p)?;
    }
    Ok(())
}

fn cmd_atlas(a: AtlasArgs) -> Result<()> {
    let mut specs: Vec<PathBuf> = fs::read_dir(&a.spec_dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    specs.retain(|p| p.extension().is_some_and(|e| e == "json"));
    specs.sort();
    if specs.is_empty() {
        return Err(Error::InvalidArgument(format!("no *.json spec files in {}", a.spec_dir.display())));
    }
    fs::create_dir_all(&a.out)?;

    let mut entries = Vec::with_capacity(specs.len());
    let mut failures = 0;
    for path in &specs {
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spec").to_string();
        let entry = match atlas_entry(path, &a.out.join(&name)) {
            Ok((seed, hashes)) => json!({
                "name": name,
                "spec": path.display().to_string(),
                "seed": seed,
                "status": "ok",
                "hashes": hashes,
            }),
            Err(e) => {
                failures += 1;
                eprintln!("error: {}: {e}", path.display());
                json!({ "name": name, "spec": path.display().to_string(), "status": "failed", "error": e.to_string() })
            }
        };
        entries.push(entry);
    }
    let manifest = json!({
        "hash": "sha256",
        "hashed": {
            "heightmap": "little-endian f32 grid, row-major",
            "attributes": "attributes.bin bytes",
            "png": "heightmap.png file bytes",
        },
        "entries": entries,
    });
    let manifest_path = a.out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    emit(&json!({ "manifest": manifest_path.display().to_string(), "entries": specs.len(), "failures": failures }));
    if failures > 0 {
        return Err(Error::InvalidArgument(format!("{failures} of {} specs failed", specs.len())));
    }
    Ok(())
}

fn atlas_entry(spec_path: &Path, dir: &Path) -> Result<(u64, Value)> {
    let spec = parse_spec(&fs::read_to_string(spec_path)?)?;
    let terrain = compile(&spec)?;
    fs::create_dir_all(dir)?;
    terrain.export(dir, &[ExportFormat::Raw, ExportFormat::Png])?;
    let hashes = json!({
        "heightmap": content_hash(&raw_bytes(&terrain.heightmap)),
        "attributes": content_hash(&terrain.attributes.to_bytes()),
        "png": content_hash(&fs::read(dir.join(PNG_FILE))?),
    });
    Ok((spec.global_seed, hashes))
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let (map, _) = load_heightmap(&a.terrain)?;
    let mut side = HeightmapSidecar::describe(&map);
    let png = encode_png16(&map, side.min, side.max, PngPolarity::DarkHigh)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&a.out, png)?;
    side.png_polarity = Some(PngPolarity::DarkHigh);
    side.files = a.out.file_name().map(|n| n.to_string_lossy().into_owned()).into_iter().collect();
    let side_path = a.out.with_extension("json");
    fs::write(&side_path, serde_json::to_string_pretty(&side)?)?;
    emit(&json!({ "png": a.out.display().to_string(), "sidecar": side_path.display().to_string() }));
    Ok(())
}
