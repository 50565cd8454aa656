//! Kinematic test harness: prescribed foot trajectories are swept over a
//! compiled terrain and every force term is logged per step.
//!
//! Forces are resolved along the map's x axis. Drag, bulldozing and friction
//! oppose each foot's horizontal velocity; flow acts along `flow_heading_deg`.

mod report;
mod trajectory;

pub use report::{ForceReport, ForceRow, LegForces, CSV_COLUMNS};
pub use trajectory::{FootSample, FootTrajectory, Preset, PresetParams};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{
    bulldozing_resistance, drag_force, effective_mass, flow_force, friction_force, horizontal_force, projected_area,
    sample_noise, submerged_volume, FluidParams, NoiseSpec, SoilParams, GRAVITY,
};
use crate::rng::{rng_from_seed, split_seed, SimRng};
use crate::spec::GeneratedTerrain;

/// A foot within this distance above the surface counts as touching it.
pub const CONTACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub body_mass: f64,
    pub leg_radius: f64,
    pub leg_length: f64,
    /// Center-of-mass height used to turn horizontal force into torque.
    pub lever_arm: f64,
    pub flow_heading_deg: f64,
    /// ε, drawn once per run.
    pub episode_noise: NoiseSpec,
    /// ξ, drawn every step.
    pub step_noise: NoiseSpec,
    /// Relative std of the per-run jitter on fluid and soil parameters.
    pub param_jitter: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            duration: 1.0,
            seed: 0,
            body_mass: 30.0,
            leg_radius: 0.05,
            leg_length: 0.6,
            lever_arm: 0.5,
            flow_heading_deg: 0.0,
            episode_noise: NoiseSpec::default(),
            step_noise: NoiseSpec::default(),
            param_jitter: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.dt, self.body_mass, self.leg_radius, self.leg_length, self.lever_arm];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(
                "dt, body_mass, leg_radius, leg_length and lever_arm must be positive".into(),
            ));
        }
        if !(self.duration >= self.dt) || !self.flow_heading_deg.is_finite() {
            return Err(Error::InvalidArgument("duration must be at least dt".into()));
        }
        if let Some(j) = self.param_jitter {
            if !(j >= 0.0) {
                return Err(Error::InvalidArgument("param_jitter must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Number of report rows, `duration / dt` rounded.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainSample {
    pub elevation: f64,
    pub wading: bool,
    pub deformable: bool,
    pub water_level: f64,
    pub soil_region: u8,
}

/// Elevation by bilinear interpolation between cell centers (clamped at the
/// border half-cells); attributes from the nearest cell.
pub fn query_terrain(terrain: &GeneratedTerrain, x: f64, y: f64) -> Result<TerrainSample> {
    let map = &terrain.heightmap;
    let (ex, ey) = map.extent();
    if !((0.0..=ex).contains(&x) && (0.0..=ey).contains(&y)) {
        return Err(Error::OutOfBounds { x, y });
    }
    let s = map.cell_size();
    let (w, h) = (map.width(), map.height());
    let axis = |p: f64, n: usize| {
        let mut f = (p / s - 0.5).clamp(0.0, (n - 1) as f64);
        // absorb division round-off so cell centers hit their stored value
        if (f - f.round()).abs() < 1e-9 {
            f = f.round();
        }
        let i = (f.floor() as usize).min(n - 2);
        (i, f - i as f64)
    };
    let (c0, tx) = axis(x, w);
    let (r0, ty) = axis(y, h);
    let lerp = |a: f64, b: f64, t: f64| a * (1.0 - t) + b * t;
    let top = lerp(map.get(c0, r0), map.get(c0 + 1, r0), tx);
    let bottom = lerp(map.get(c0, r0 + 1), map.get(c0 + 1, r0 + 1), tx);

    let col = ((x / s) as usize).min(w - 1);
    let row = ((y / s) as usize).min(h - 1);
    let a = &terrain.attributes;
    Ok(TerrainSample {
        elevation: lerp(top, bottom, ty),
        wading: a.wading(col, row),
        deformable: a.deformable(col, row),
        water_level: a.water_level(col, row),
        soil_region: a.soil_region(col, row),
    })
}

/// `clamp(water_level − foot_z, 0, leg_length)`.
pub fn submerged_length(foot_z: f64, water_level: f64, leg_length: f64) -> f64 {
    (water_level - foot_z).clamp(0.0, leg_length)
}

pub fn torque_about_com(horizontal_force: f64, lever_arm: f64) -> f64 {
    horizontal_force * lever_arm
}

/// PD joint torque `K_p(θ_d − θ) − K_d·θ̇`.
pub fn pd_torque(kp: f64, kd: f64, theta_d: f64, theta: f64, theta_dot: f64) -> f64 {
    kp * (theta_d - theta) - kd * theta_dot
}

// keeps zero magnitudes at +0 so logs never show -0
fn directed(magnitude: f64, unit_x: f64) -> f64 {
    if magnitude == 0.0 || unit_x == 0.0 {
        0.0
    } else {
        magnitude * unit_x
    }
}

/// Stepper holding the per-run state: sampled parameters and the shear
/// displacement each foot has accumulated since touchdown.
pub struct Simulation<'a> {
    terrain: &'a GeneratedTerrain,
    cfg: SimConfig,
    fluid: FluidParams,
    soils: BTreeMap<u8, SoilParams>,
    shear: [f64; 2],
    flow_dir: f64,
}

impl<'a> Simulation<'a> {
    pub fn new(terrain: &'a GeneratedTerrain, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mut fluid = terrain.fluid.clone();
        let mut soils = terrain.soil_regions.clone();
        if let Some(j) = cfg.param_jitter.filter(|j| *j > 0.0) {
            let mut rng = rng_from_seed(split_seed(cfg.seed, 2));
            fluid = fluid.jittered(j, &mut rng)?;
            for soil in soils.values_mut() {
                *soil = soil.jittered(j, &mut rng)?;
            }
        }
        Ok(Self { terrain, cfg, fluid, soils, shear: [0.0; 2], flow_dir: cfg.flow_heading_deg.to_radians().cos() })
    }

    pub fn fluid(&self) -> &FluidParams {
        &self.fluid
    }

    pub fn soil(&self, region: u8) -> Option<&SoilParams> {
        self.soils.get(&region)
    }

    /// Evaluates every force term for one step.
    pub fn step(&mut self, t: f64, feet: [FootSample; 2], eps: f64, xi: f64) -> Result<ForceRow> {
        let cfg = self.cfg;
        let mut samples = [None; 2];
        let mut h = [0.0; 2];
        let mut contact = [false; 2];
        for (i, foot) in feet.iter().enumerate() {
            let s = query_terrain(self.terrain, foot.pos[0], foot.pos[1])?;
            contact[i] = foot.pos[2] <= s.elevation + CONTACT_TOLERANCE;
            if s.wading {
                h[i] = submerged_length(foot.pos[2], s.water_level, cfg.leg_length);
            }
            samples[i] = Some(s);
        }

        let m_eff = effective_mass(
            eps,
            cfg.body_mass,
            &self.fluid,
            submerged_volume(cfg.leg_radius, h[0]),
            submerged_volume(cfg.leg_radius, h[1]),
        )?;
        let in_contact = contact.iter().filter(|c| **c).count();
        let normal_load = if in_contact > 0 { m_eff * GRAVITY / in_contact as f64 } else { 0.0 };

        let mut legs = [LegForces::default(); 2];
        for i in 0..2 {
            let s = samples[i].expect("sampled above");
            let foot = feet[i];
            let speed = foot.vel[0].hypot(foot.vel[1]);
            // x component of a unit vector opposing the horizontal velocity
            let oppose = if speed > 0.0 { -foot.vel[0] / speed } else { 0.0 };
            if contact[i] {
                self.shear[i] += speed * cfg.dt;
            } else {
                self.shear[i] = 0.0;
            }

            let leg = &mut legs[i];
            leg.submerged_length = h[i];
            leg.wading = s.wading && h[i] > 0.0;
            leg.deformable = s.deformable && contact[i];
            if leg.wading {
                let area = projected_area(cfg.leg_radius, h[i])?;
                leg.drag = directed(drag_force(eps, &self.fluid, area, speed), oppose);
                leg.flow = flow_force(&self.fluid, t, 1.0) * self.flow_dir;
            }
            if leg.deformable {
                let soil = self.soils.get(&s.soil_region).ok_or_else(|| {
                    Error::InvalidArgument(format!("deformable cell refers to unknown soil region {}", s.soil_region))
                })?;
                let sinkage = (s.elevation - foot.pos[2]).max(0.0);
                leg.bulldozing = directed(bulldozing_resistance(soil, sinkage), oppose);
                leg.friction = directed(friction_force(soil, normal_load, self.shear[i])?, oppose);
            }
        }

        let horizontal_total: f64 = legs
            .iter()
            .map(|l| horizontal_force(l.wading, l.deformable, xi, l.drag, l.flow, l.bulldozing, l.friction))
            .sum();
        Ok(ForceRow {
            t,
            epsilon: eps,
            xi,
            left: legs[0],
            right: legs[1],
            horizontal_total,
            torque_about_com: torque_about_com(horizontal_total, cfg.lever_arm),
            effective_mass: m_eff,
        })
    }
}

/// Runs a whole episode. ε is drawn once from stream 0 of the seed, ξ once
/// per step from stream 1, and optional parameter jitter from stream 2.
pub fn run(terrain: &GeneratedTerrain, cfg: &SimConfig, trajectory: &FootTrajectory) -> Result<ForceReport> {
    cfg.validate()?;
    let steps = cfg.steps();
    if trajectory.len() != steps {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {} samples, expected duration/dt = {steps}",
            trajectory.len()
        )));
    }
    if (trajectory.dt - cfg.dt).abs() > 1e-12 * cfg.dt {
        return Err(Error::InvalidArgument(format!(
            "trajectory dt {} differs from config dt {}",
            trajectory.dt, cfg.dt
        )));
    }
    let mut eps_rng: SimRng = rng_from_seed(split_seed(cfg.seed, 0));
    let eps = sample_noise(&cfg.episode_noise, &mut eps_rng)?;
    let mut xi_rng: SimRng = rng_from_seed(split_seed(cfg.seed, 1));
    let mut sim = Simulation::new(terrain, *cfg)?;

    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let xi = sample_noise(&cfg.step_noise, &mut xi_rng)?;
        let feet = [trajectory.legs[0][k], trajectory.legs[1][k]];
        let row = sim.step(t, feet, eps, xi).map_err(|e| Error::Step { t, source: Box::new(e) })?;
        rows.push(row);
    }
    Ok(ForceReport { rows })
}

/// Builds a preset trajectory sized for `cfg` and runs it.
pub fn run_preset(
    terrain: &GeneratedTerrain,
    cfg: &SimConfig,
    preset: Preset,
    params: &PresetParams,
) -> Result<ForceReport> {
    cfg.validate()?;
    let tr = preset.trajectory(params, cfg.dt, cfg.steps())?;
    run(terrain, cfg, &tr)
}
