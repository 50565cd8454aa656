//! One pass/fail line per acceptance criterion, at the stated tolerances.
//! Run with `cargo test -p terragen-cli --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use terragen_core::harness::{self, FootSample, Preset, PresetParams, Simulation};
use terragen_core::heightmap::*;
use terragen_core::physics::*;
use terragen_core::rng::rng_from_seed;
use terragen_core::spec::*;
use terragen_core::vlm::{request_terrain, AttemptOutcome};
use terragen_core::{EndpointConfig, Error, GenerationRequest, SimConfig, SpecError};

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn c1_reynolds() -> Outcome {
    let t = Instant::now();
    let re = reynolds(1025.0, 1.0, 0.1, 0.0011).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    check(((re - 93181.8) / 93181.8).abs() < 1e-6, format!("Re = {re}"))?;
    check(((re - 93182.0) / 93182.0).abs() <= 1e-4, format!("Re = {re} vs 93182"))?;
    check(is_turbulent(re), "not turbulent")?;
    check(elapsed < Duration::from_millis(1), format!("took {elapsed:?}"))?;
    Ok(format!("Re = {re:.1}, turbulent"))
}

fn c2_effective_mass() -> Outcome {
    let unit = FluidParams { added_mass_coeff: 1.0, ..Default::default() };
    for v in [0.0, 1e-4, 2.356e-3, 0.01] {
        let m = effective_mass(1.0, 30.0, &unit, v, v).map_err(|e| e.to_string())?;
        check(m == 30.0, format!("C_m = 1 gives {m} at V = {v}"))?;
    }
    let half = FluidParams::default();
    let m = effective_mass(1.0, 30.0, &half, 2.356e-3, 2.356e-3).map_err(|e| e.to_string())?;
    // independent arithmetic: 30 - 0.5 * 1025 * 0.004712
    let oracle = 30.0 - 0.5 * 1025.0 * (2.0 * 2.356e-3);
    check(((m - oracle) / oracle).abs() <= 1e-9, format!("{m} vs {oracle}"))?;
    check((m - 27.585).abs() < 5e-4, format!("{m} vs 27.585"))?;
    Ok(format!("C_m = 1 volume-independent; m_eff = {m:.3} kg"))
}

fn c3_force_laws() -> Outcome {
    let mut rng = rng_from_seed(3);
    use rand::Rng;
    let n = 1000;
    for _ in 0..n {
        let eps = rng.random_range(0.7..1.3);
        let f = FluidParams { drag_coeff: rng.random_range(0.82..1.0), ..Default::default() };
        let a = rng.random_range(1e-4..1.0);
        let v = rng.random_range(1e-3..10.0);
        let d1 = drag_force(eps, &f, a, v);
        check(drag_force(eps, &f, a, 2.0 * v) / d1 == 4.0, "drag ratio is not exactly 4")?;

        let s = SoilParams {
            friction_coeff: rng.random_range(0.05..2.0),
            presliding_scale: rng.random_range(1e-3..1.0),
            bulldozing_coeff: rng.random_range(1.0..1e5),
            bulldozing_exp: rng.random_range(0.1..3.0),
        };
        let fnl = rng.random_range(1.0..2000.0);
        let x = rng.random_range(0.0..100.0);
        let cap = s.friction_coeff * fnl;
        check(friction_force(&s, fnl, x).unwrap() <= cap, "friction exceeds mu*F_N")?;
        let k = s.presliding_scale;
        let h = 1e-7 * k;
        let fd = (friction_force(&s, fnl, k + h).unwrap() - friction_force(&s, fnl, k - h).unwrap()) / (2.0 * h);
        let exact = cap * (-1.0f64).exp() / k;
        check(((fd - exact) / exact).abs() <= 1e-4, format!("friction slope {fd} vs {exact}"))?;

        let z = 10f64.powf(rng.random_range(-4.0..0.0));
        let lhs = bulldozing_resistance(&s, z).ln();
        let rhs = s.bulldozing_coeff.ln() + s.bulldozing_exp * z.ln();
        check((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "bulldozing not log-linear")?;

        let omega = rng.random_range(0.1..5.0);
        let tide = FluidParams {
            flow_kind: FlowKind::Tide,
            tide_amplitude: rng.random_range(-20.0..20.0),
            tide_omega: omega,
            tide_phase: rng.random_range(-3.0..3.0),
            ..Default::default()
        };
        let t = rng.random_range(0.0..10.0);
        let xi = rng.random_range(0.7..1.3);
        let p = std::f64::consts::TAU / omega;
        check((flow_force(&tide, t, xi) - flow_force(&tide, t + p, xi)).abs() <= 1e-12, "tide not periodic")?;

        let terms: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1e3..1e3));
        let [dr, fl, bu, fr] = terms;
        check(horizontal_force(false, false, xi, dr, fl, bu, fr) == 0.0, "zero flags leak force")?;
        check(horizontal_force(true, false, xi, dr, fl, bu, fr) == xi * (dr + fl), "wading-only mixes in soil")?;
        check(horizontal_force(false, true, xi, dr, fl, bu, fr) == xi * (bu + fr), "soil-only mixes in water")?;
        let both = horizontal_force(true, true, xi, dr, fl, bu, fr);
        check(horizontal_force(true, true, 2.0 * xi, dr, fl, bu, fr) == 2.0 * both, "not linear in xi")?;
    }
    Ok(format!("{n} randomized cases per law"))
}

fn c4_noise() -> Outcome {
    let spec = NoiseSpec::default();
    let mut rng = rng_from_seed(4);
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_noise(&spec, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    check((mean - 1.0).abs() <= 0.005, format!("mean {mean}"))?;
    check((sd - 0.1).abs() <= 0.01, format!("std {sd}"))?;
    check(xs.iter().all(|x| (0.7..=1.3).contains(x)), "sample outside 3 sigma")?;

    let terrain = compile(&TerrainSpec::new(Layout::default(), 1).with_call(
        ToolCall::new(ToolKind::Flat, Target::All).num_arg("elevation", 0.0),
    ))
    .map_err(|e| e.to_string())?;
    let cfg = SimConfig { duration: 10.0, seed: 12, ..Default::default() };
    let rep = harness::run_preset(&terrain, &cfg, Preset::WalkInPlace, &PresetParams { start: [3.2, 3.2], ..Default::default() })
        .map_err(|e| e.to_string())?;
    check(rep.len() == 1000, "run length")?;
    let eps = rep.rows[0].epsilon;
    check(rep.rows.iter().all(|r| r.epsilon == eps), "epsilon changed within a run")?;
    let distinct: std::collections::BTreeSet<u64> = rep.rows.iter().map(|r| r.xi.to_bits()).collect();
    check(distinct.len() > 1, "xi constant")?;
    Ok(format!("mean {mean:.4}, std {sd:.4}; eps fixed, {} distinct xi over 1000 steps", distinct.len()))
}

fn c5_determinism() -> Outcome {
    let base = new_flat(48, 40, 0.1, 0.0).unwrap();
    let gens = |seed: u64| -> Vec<Vec<u8>> {
        let stairs = StairsParams { step_height: 0.15, step_depth: 0.3, count: 5, direction: StairDirection::Ascending, axis: Axis::X };
        let (rocks, _) = place_obstacles(&base, ObstacleKind::Rock, 0.8, (0.1, 0.3), (0.05, 0.3), seed).unwrap();
        let (pillars, _) = place_obstacles(&base, ObstacleKind::Pillar, 0.5, (0.15, 0.4), (1.0, 2.0), seed).unwrap();
        let rough = gen_rough(&base, &RoughParams::default(), seed).unwrap();
        let tiles = vec![vec![rough.clone(), rocks.clone()], vec![pillars.clone(), base.clone()]];
        [
            new_flat(48, 40, 0.1, 0.3).unwrap(),
            gen_slope(&base, 0.2, [1.0, 1.0]).unwrap(),
            gen_stairs(&base, &stairs).unwrap(),
            rough,
            rocks,
            pillars,
            compose_tiles(&tiles, 4).unwrap(),
        ]
        .iter()
        .map(|m| m.to_le_bytes())
        .collect()
    };
    check(gens(5) == gens(5), "a generator is not deterministic")?;

    // golden pins, compiled in-process
    let golden_dir = fixtures().join("../golden");
    let mut pinned = 0;
    let mut specs: Vec<_> = std::fs::read_dir(fixtures().join("tools")).unwrap().map(|e| e.unwrap().path()).collect();
    specs.push(fixtures().join("beach.json"));
    for path in &specs {
        let spec = parse_spec(&std::fs::read_to_string(path).unwrap()).map_err(|e| e.to_string())?;
        let t = compile(&spec).map_err(|e| e.to_string())?;
        let name = path.file_stem().unwrap().to_string_lossy();
        let golden: BTreeMap<String, String> =
            serde_json::from_str(&std::fs::read_to_string(golden_dir.join(format!("{name}.json"))).map_err(|e| e.to_string())?)
                .unwrap();
        check(golden["heightmap_f64"] == content_hash(&t.heightmap.to_le_bytes()), format!("{name} height map drifted"))?;
        check(golden["attributes"] == content_hash(&t.attributes.to_bytes()), format!("{name} attributes drifted"))?;
        pinned += 1;
    }

    // two separate CLI executions: gen and harness
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let dir = tmp.path().join(format!("run{i}"));
        let d = dir.display().to_string();
        let csv = dir.join("forces.csv").display().to_string();
        let o = run(&["gen", &fixture("beach.json"), "--out", &d, "--formats", "raw,png,csv"]);
        check(code(&o) == 0, stderr(&o))?;
        let o = run(&["harness", &d, "--preset", "sinusoid", "--seed", "3", "--out", &csv]);
        check(code(&o) == 0, stderr(&o))?;
        let files: Vec<Vec<u8>> = ["heightmap.r32", "heightmap.png", "heightmap.csv", "attributes.bin", "forces.csv"]
            .iter()
            .map(|f| std::fs::read(dir.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    check(outputs[0] == outputs[1], "CLI outputs differ between runs")?;
    Ok(format!("7 generators, {pinned} golden terrains, CLI gen+harness byte-identical"))
}

fn c6_spec_pipeline() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("all_tools.json")).unwrap();
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    let kinds: std::collections::BTreeSet<_> = spec.calls.iter().map(|c| c.tool.name()).collect();
    check(kinds.len() == 9, format!("fixture covers {} tools", kinds.len()))?;
    check(parse_spec(&spec.to_json_string()).map_err(|e| e.to_string())? == spec, "roundtrip changed the spec")?;

    let doc = |calls: &str| {
        format!(r#"{{"version":"1","layout":{{"rows":1,"cols":1,"tile_cells":16,"cell_size":0.1}},"global_seed":0,"calls":{calls}}}"#)
    };
    match parse_spec(&doc(r#"[{"tool":"flat","args":{"elevation":0}},{"tool":"lava","args":{}}]"#)) {
        Err(SpecError::UnknownTool { index: 1, ref name }) if name == "lava" => {}
        other => return Err(format!("unknown tool gave {other:?}")),
    }
    match parse_spec(&doc(r#"[{"tool":"stairs","args":{"step_depth":0.3,"count":5}}]"#)) {
        Err(SpecError::Missing { ref path }) if path == "calls[0].args.step_height" => {}
        other => return Err(format!("missing arg gave {other:?}")),
    }
    let broken = r#"{"version":"1","layout": {"rows":1,"#;
    match parse_spec(broken) {
        Err(SpecError::Json { offset, line: 1, .. }) if offset > 0 && offset <= broken.len() => {}
        other => return Err(format!("malformed JSON gave {other:?}")),
    }

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t").display().to_string();
    let mut codes = Vec::new();
    for (name, body) in [
        ("unknown", doc(r#"[{"tool":"lava","args":{}}]"#)),
        ("missing", doc(r#"[{"tool":"stairs","args":{"step_depth":0.3,"count":5}}]"#)),
        ("malformed", broken.to_string()),
    ] {
        let p = tmp.path().join(format!("{name}.json"));
        std::fs::write(&p, body).unwrap();
        let o = run(&["gen", &p.display().to_string(), "--out", &out]);
        let err = stderr(&o);
        codes.push(code(&o));
        let wanted: &str = match name {
            "unknown" => "calls[0]",
            "missing" => "calls[0].args.step_height",
            _ => "byte offset",
        };
        check(err.contains(wanted), format!("{name}: stderr lacks {wanted:?}: {err}"))?;
    }
    check(codes == [1, 1, 1], format!("exit codes {codes:?}"))?;
    let o = run(&["gen", &tmp.path().join("absent.json").display().to_string(), "--out", &out]);
    check(code(&o) == 2, "unreadable spec should exit 2")?;
    Ok("9-tool roundtrip; unknown/missing/malformed errors structured, exit 1 (I/O exit 2)".into())
}

fn c7_vlm_loop() -> Outcome {
    let layout = Layout { rows: 1, cols: 1, tile_cells: 32, cell_size: 0.1 };
    let req = GenerationRequest::text("rocky beach with shallow water").with_layout(layout, 5);
    let cfg = |url: &str, max_retries| EndpointConfig {
        base_url: url.into(),
        api_key: "test".into(),
        model_name: "mock".into(),
        timeout: Duration::from_secs(5),
        max_retries,
    };
    let mut lens = Vec::new();
    for script in [vec![valid_reply()], vec![invalid_reply(), valid_reply()]] {
        let mock = serve(script);
        let (spec, trace) = request_terrain(&req, &cfg(&mock.url, 2)).map_err(|e| e.to_string())?;
        mock.handle.join().unwrap();
        parse_value(&spec.to_json()).map_err(|e| e.to_string())?;
        validate_spec(&spec);
        compile(&spec).map_err(|e| e.to_string())?;
        check(trace.attempts.last().unwrap().outcome == AttemptOutcome::Valid, "last attempt not valid")?;
        lens.push(trace.attempts.len());
    }
    let max_retries = 3;
    let mock = serve(vec![invalid_reply(); max_retries as usize + 1]);
    match request_terrain(&req, &cfg(&mock.url, max_retries)) {
        Err(Error::GenerationFailed { trace, .. }) => lens.push(trace.attempts.len()),
        other => return Err(format!("always-invalid gave {other:?}")),
    }
    mock.handle.join().unwrap();
    check(lens == [1, 2, max_retries as usize + 1], format!("trace lengths {lens:?}"))?;
    Ok(format!("trace lengths {lens:?} with max_retries = {max_retries}"))
}

fn c8_harness() -> Outcome {
    let layout = Layout { rows: 1, cols: 2, tile_cells: 128, cell_size: 0.1 };
    let wet = compile(
        &TerrainSpec::new(layout, 8)
            .with_call(ToolCall::new(ToolKind::Flat, Target::All).num_arg("elevation", 0.0))
            .with_call(ToolCall::new(ToolKind::Wading, Target::All).num_arg("water_level", 0.2)),
    )
    .map_err(|e| e.to_string())?;
    let cfg = SimConfig {
        duration: 10.0,
        dt: 0.01,
        episode_noise: NoiseSpec::unit(),
        step_noise: NoiseSpec::unit(),
        ..Default::default()
    };
    let params = PresetParams { start: [0.5, 6.4], speed: 1.0, ..Default::default() };
    let started = Instant::now();
    let rep = harness::run_preset(&wet, &cfg, Preset::StraightWalk, &params).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(rep.len() == 1000, "row count")?;
    let area = projected_area(cfg.leg_radius, 0.2).unwrap();
    let kernel = drag_force(1.0, &wet.fluid, area, 1.0);
    let mut worst: f64 = 0.0;
    for r in &rep.rows {
        check(r.epsilon == 1.0 && r.xi == 1.0, "noise not pinned")?;
        for l in r.legs() {
            check((l.submerged_length - 0.2).abs() < 1e-12, "depth")?;
            check(l.flow == 0.0, "still water produced flow")?;
            worst = worst.max((l.drag.abs() - kernel).abs());
        }
    }
    check(worst <= 1e-12, format!("drag differs from kernel by {worst}"))?;
    check(rep.max_consistency_error() <= 1e-12, "total not recomputable")?;
    check(elapsed < Duration::from_secs(1), format!("10 s run took {elapsed:?}"))?;

    // single-step oracle: one wet leg at 1 m/s
    let mut sim = Simulation::new(&wet, cfg).map_err(|e| e.to_string())?;
    let moving = FootSample { pos: [1.0, 1.0, 0.0], vel: [1.0, 0.0, 0.0] };
    let high = FootSample { pos: [1.0, 1.3, 0.4], vel: [0.0; 3] };
    let row = sim.step(0.0, [moving, high], 1.0, 1.0).map_err(|e| e.to_string())?;
    check(row.horizontal_total == -kernel + flow_force(&wet.fluid, 0.0, 1.0), "one-leg total")?;

    let dry = compile(&TerrainSpec::new(layout, 8).with_call(ToolCall::new(ToolKind::Flat, Target::All).num_arg("elevation", 0.0)))
        .map_err(|e| e.to_string())?;
    let dry_cfg = SimConfig { step_noise: NoiseSpec::default(), ..cfg };
    for preset in Preset::ALL {
        let p = PresetParams { start: [if preset == Preset::StraightWalk { 0.5 } else { 12.8 }, 6.4], ..Default::default() };
        let rep = harness::run_preset(&dry, &dry_cfg, preset, &p).map_err(|e| e.to_string())?;
        for r in &rep.rows {
            let zero = r.legs().iter().all(|l| l.drag == 0.0 && l.flow == 0.0 && l.bulldozing == 0.0 && l.friction == 0.0);
            check(zero && r.horizontal_total == 0.0 && r.torque_about_com == 0.0, format!("{preset}: dry force"))?;
            check(r.effective_mass == cfg.body_mass, format!("{preset}: m_eff {}", r.effective_mass))?;
        }
    }
    Ok(format!("max |drag - kernel| = {worst:e}; dry runs force-free; 10 s run in {elapsed:.2?}"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 Reynolds worked example", c1_reynolds),
        ("2 effective-mass algebra", c2_effective_mass),
        ("3 force-law properties", c3_force_laws),
        ("4 noise contract", c4_noise),
        ("5 determinism and golden files", c5_determinism),
        ("6 spec pipeline", c6_spec_pipeline),
        ("7 VLM retry loop", c7_vlm_loop),
        ("8 harness end-to-end", c8_harness),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
