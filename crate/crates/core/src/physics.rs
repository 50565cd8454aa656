//! Force kernels for wading and deformable terrain.
//!
//! Every kernel returns a magnitude (or a signed scalar for the flow term);
//! applying directions, e.g. drag opposing the leg velocity, is up to the
//! caller. Units are SI throughout.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reynolds number above which flow around a leg is treated as turbulent.
pub const TURBULENT_REYNOLDS: f64 = 4000.0;

/// Drag coefficients for a cylinder in turbulent flow fall in this band.
pub const DRAG_COEFF_RANGE: (f64, f64) = (0.82, 1.0);

/// Relative standard deviation of parameter jitter when randomization is on.
pub const DEFAULT_PARAM_JITTER: f64 = 0.1;

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    #[default]
    Still,
    Current,
    Tide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidParams {
    /// Water density, kg/m³.
    pub rho: f64,
    pub drag_coeff: f64,
    pub added_mass_coeff: f64,
    /// Dynamic viscosity, Pa·s.
    pub dyn_viscosity: f64,
    pub flow_kind: FlowKind,
    /// N
    pub current_amplitude: f64,
    /// N
    pub tide_amplitude: f64,
    /// rad/s
    pub tide_omega: f64,
    /// rad
    pub tide_phase: f64,
    /// Meters above the elevation datum.
    pub water_level: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            rho: 1025.0,
            drag_coeff: 0.9,
            added_mass_coeff: 0.5,
            dyn_viscosity: 0.0011,
            flow_kind: FlowKind::Still,
            current_amplitude: 0.0,
            tide_amplitude: 0.0,
            tide_omega: 0.0,
            tide_phase: 0.0,
            water_level: 0.0,
        }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.rho,
            self.drag_coeff,
            self.added_mass_coeff,
            self.dyn_viscosity,
            self.current_amplitude,
            self.tide_amplitude,
            self.tide_omega,
            self.tide_phase,
            self.water_level,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("fluid parameters must be finite".into()));
        }
        if self.rho <= 0.0 || self.dyn_viscosity <= 0.0 {
            return Err(Error::InvalidArgument("rho and dyn_viscosity must be positive".into()));
        }
        let (lo, hi) = DRAG_COEFF_RANGE;
        if !(lo..=hi).contains(&self.drag_coeff) {
            return Err(Error::InvalidArgument(format!(
                "drag_coeff {} outside [{lo}, {hi}]",
                self.drag_coeff
            )));
        }
        if self.added_mass_coeff < 0.0 {
            return Err(Error::InvalidArgument("added_mass_coeff must be >= 0".into()));
        }
        Ok(())
    }

    /// Per-episode randomized copy: each physical coefficient is scaled by a
    /// factor drawn from N(1, rel_std) truncated at 3σ. The drag coefficient
    /// stays inside its validity band.
    pub fn jittered<R: Rng + ?Sized>(&self, rel_std: f64, rng: &mut R) -> Result<Self> {
        let mut f = || jitter_factor(rel_std, rng);
        let (lo, hi) = DRAG_COEFF_RANGE;
        Ok(Self {
            rho: floor_positive(self.rho * f()?),
            drag_coeff: (self.drag_coeff * f()?).clamp(lo, hi),
            added_mass_coeff: (self.added_mass_coeff * f()?).max(0.0),
            dyn_viscosity: floor_positive(self.dyn_viscosity * f()?),
            current_amplitude: self.current_amplitude * f()?,
            tide_amplitude: self.tide_amplitude * f()?,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SoilParams {
    /// Bulldozing coefficient `a`, N/mⁿ.
    pub bulldozing_coeff: f64,
    /// Bulldozing exponent `n`.
    pub bulldozing_exp: f64,
    pub friction_coeff: f64,
    /// Pre-sliding length scale `K`, meters.
    pub presliding_scale: f64,
}

impl Default for SoilParams {
    // Defaults are an illustrative loose-sand table, not measured values.
    fn default() -> Self {
        Self { bulldozing_coeff: 1000.0, bulldozing_exp: 1.1, friction_coeff: 0.6, presliding_scale: 0.01 }
    }
}

impl SoilParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.bulldozing_coeff, self.bulldozing_exp, self.friction_coeff, self.presliding_scale];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("soil parameters must all be strictly positive".into()))
        }
    }

    pub fn jittered<R: Rng + ?Sized>(&self, rel_std: f64, rng: &mut R) -> Result<Self> {
        let mut f = || jitter_factor(rel_std, rng);
        Ok(Self {
            bulldozing_coeff: floor_positive(self.bulldozing_coeff * f()?),
            bulldozing_exp: floor_positive(self.bulldozing_exp * f()?),
            friction_coeff: floor_positive(self.friction_coeff * f()?),
            presliding_scale: floor_positive(self.presliding_scale * f()?),
        })
    }
}

fn jitter_factor<R: Rng + ?Sized>(rel_std: f64, rng: &mut R) -> Result<f64> {
    sample_noise(&NoiseSpec { mean: 1.0, std_dev: rel_std, truncation: 3.0 }, rng)
}

fn floor_positive(v: f64) -> f64 {
    v.max(1e-9)
}

/// Instantaneous kinematic and contact state of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegState {
    pub radius: f64,
    pub submerged_length: f64,
    pub speed: f64,
    pub shear_displacement: f64,
    pub sinkage: f64,
    pub normal_load: f64,
}

impl LegState {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("leg radius must be positive".into()));
        }
        let nonneg = [self.submerged_length, self.shear_displacement, self.sinkage, self.normal_load];
        if nonneg.iter().any(|v| !(*v >= 0.0)) || !self.speed.is_finite() {
            return Err(Error::InvalidArgument(
                "submerged length, shear displacement, sinkage and normal load must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Multiplicative noise N(mean, std_dev) truncated at `truncation` standard
/// deviations. The random stream is owned by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub mean: f64,
    pub std_dev: f64,
    /// Half-width of the accepted band, in standard deviations.
    pub truncation: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { mean: 1.0, std_dev: 0.1, truncation: 3.0 }
    }
}

impl NoiseSpec {
    /// Degenerate spec that always yields exactly 1.0.
    pub fn unit() -> Self {
        Self { std_dev: 0.0, ..Self::default() }
    }

    pub fn bounds(&self) -> (f64, f64) {
        let half = self.truncation * self.std_dev;
        (self.mean - half, self.mean + half)
    }
}

/// Draws one truncated-Gaussian sample by rejection.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Result<f64> {
    if spec.std_dev == 0.0 {
        return Ok(spec.mean);
    }
    if !(spec.std_dev > 0.0 && spec.truncation > 0.0 && spec.mean.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid noise spec {spec:?}")));
    }
    let normal = Normal::new(spec.mean, spec.std_dev).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (lo, hi) = spec.bounds();
    loop {
        let v = normal.sample(rng);
        if (lo..=hi).contains(&v) {
            return Ok(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub fluid: FluidParams,
    pub soil: SoilParams,
    pub noise: NoiseSpec,
}

impl PhysicsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.fluid.validate()?;
        cfg.soil.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Lateral area of the submerged part of a cylindrical leg, 2πrh.
pub fn projected_area(radius: f64, submerged_length: f64) -> Result<f64> {
    if radius < 0.0 || submerged_length < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "radius ({radius}) and submerged length ({submerged_length}) must be >= 0"
        )));
    }
    Ok(2.0 * PI * radius * submerged_length)
}

/// Drag magnitude ½·ε·C_d·ρ·A·v².
pub fn drag_force(eps: f64, fluid: &FluidParams, area: f64, speed: f64) -> f64 {
    0.5 * eps * fluid.drag_coeff * fluid.rho * area * speed * speed
}

/// ρvL/μ.
pub fn reynolds(rho: f64, speed: f64, char_length: f64, dyn_viscosity: f64) -> Result<f64> {
    if !(dyn_viscosity > 0.0) {
        return Err(Error::InvalidArgument(format!("dyn_viscosity must be positive, got {dyn_viscosity}")));
    }
    Ok(rho * speed * char_length / dyn_viscosity)
}

pub fn is_turbulent(re: f64) -> bool {
    re > TURBULENT_REYNOLDS
}

/// πr²h.
pub fn submerged_volume(radius: f64, submerged_length: f64) -> f64 {
    PI * radius * radius * submerged_length
}

/// C_m·ρ·V.
pub fn added_mass(fluid: &FluidParams, submerged_vol: f64) -> f64 {
    fluid.added_mass_coeff * fluid.rho * submerged_vol
}

/// Body mass corrected for added mass and buoyancy of both legs:
/// ε·(m + (C_m − 1)·ρ·(V_left + V_right)).
///
/// A non-positive result means the legs displace more than the body weighs;
/// it is reported as [`Error::Saturation`].
pub fn effective_mass(eps: f64, body_mass: f64, fluid: &FluidParams, v_left: f64, v_right: f64) -> Result<f64> {
    if !(body_mass > 0.0) || v_left < 0.0 || v_right < 0.0 {
        return Err(Error::InvalidArgument("body mass must be positive and volumes non-negative".into()));
    }
    let m = eps * (body_mass + (fluid.added_mass_coeff - 1.0) * fluid.rho * (v_left + v_right));
    if m <= 0.0 {
        return Err(Error::Saturation { effective_mass: m });
    }
    Ok(m)
}

/// Signed flow force: zero in still water, `ξ·F_current` for a steady current,
/// `ξ·F_tide·cos(ωt + φ)` for tide.
pub fn flow_force(fluid: &FluidParams, t: f64, xi: f64) -> f64 {
    match fluid.flow_kind {
        FlowKind::Still => 0.0,
        FlowKind::Current => xi * fluid.current_amplitude,
        FlowKind::Tide => xi * fluid.tide_amplitude * (fluid.tide_omega * t + fluid.tide_phase).cos(),
    }
}

/// a·zⁿ.
pub fn bulldozing_resistance(soil: &SoilParams, sinkage: f64) -> f64 {
    soil.bulldozing_coeff * sinkage.powf(soil.bulldozing_exp)
}

/// Pre-sliding friction μ_f·F_N·(1 − e^(−x/K)); saturates at μ_f·F_N.
pub fn friction_force(soil: &SoilParams, normal_load: f64, shear_displacement: f64) -> Result<f64> {
    if !(soil.presliding_scale > 0.0) {
        return Err(Error::InvalidArgument("presliding_scale must be positive".into()));
    }
    let ramp = -(-shear_displacement / soil.presliding_scale).exp_m1();
    Ok(soil.friction_coeff * normal_load * ramp)
}

/// Inner product of the noisy indicator vector `ξ·[1_w, 1_w, 1_d, 1_d]`
/// with `[drag, flow, bulldozing, friction]`.
pub fn horizontal_force(
    wading: bool,
    deformable: bool,
    xi: f64,
    drag: f64,
    flow: f64,
    bulldozing: f64,
    friction: f64,
) -> f64 {
    let w = if wading { 1.0 } else { 0.0 };
    let d = if deformable { 1.0 } else { 0.0 };
    xi * w * (drag + flow) + xi * d * (bulldozing + friction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    fn fluid(cd: f64) -> FluidParams {
        FluidParams { drag_coeff: cd, ..Default::default() }
    }

    #[test]
    fn projected_area_cases() {
        // oracle: 2 * 3.141592653589793 * 0.05 * 0.3
        assert_relative_eq!(projected_area(0.05, 0.3).unwrap(), 0.094_247_779_607_693_8, max_relative = 1e-15);
        assert_eq!(projected_area(0.05, 0.0).unwrap(), 0.0);
        assert_eq!(projected_area(0.05, 0.6).unwrap(), 2.0 * projected_area(0.05, 0.3).unwrap());
        assert!(projected_area(-0.05, 0.3).is_err());
        assert!(projected_area(0.05, -0.3).is_err());
    }

    #[test]
    fn drag_cases() {
        let f = drag_force(1.0, &fluid(1.0), 0.094_247_8, 1.0);
        assert!((f - 48.30).abs() < 0.005, "{f}");
        assert_eq!(drag_force(1.0, &fluid(1.0), 0.0942478, 0.0), 0.0);
        let one = drag_force(1.0, &fluid(0.9), 0.05, 1.0);
        assert_eq!(drag_force(1.0, &fluid(0.9), 0.05, 2.0), 4.0 * one);
    }

    #[test]
    fn reynolds_cases() {
        let re = reynolds(1025.0, 1.0, 0.1, 0.0011).unwrap();
        assert!((re - 93181.8).abs() < 0.05);
        assert!(is_turbulent(re));
        assert_eq!(reynolds(1025.0, 0.0, 0.1, 0.0011).unwrap(), 0.0);
        assert!(!is_turbulent(0.0));
        let re = reynolds(1000.0, 0.001, 0.1, 0.001).unwrap();
        assert_relative_eq!(re, 100.0, max_relative = 1e-12);
        assert!(!is_turbulent(re));
        assert!(reynolds(1000.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn volume_and_added_mass() {
        assert_relative_eq!(submerged_volume(0.05, 0.3), 2.356_194_490_192_345e-3, max_relative = 1e-14);
        assert_eq!(submerged_volume(0.05, 0.0), 0.0);
        assert_relative_eq!(submerged_volume(0.1, 0.3), 4.0 * submerged_volume(0.05, 0.3), max_relative = 1e-15);
        let fl = FluidParams::default();
        // 0.5 * 1025 * 2.35619e-3
        assert_relative_eq!(added_mass(&fl, 2.35619e-3), 1.207_547_375, max_relative = 1e-9);
        assert_eq!(added_mass(&fl, 0.0), 0.0);
        assert_eq!(added_mass(&FluidParams { added_mass_coeff: 0.0, ..fl }, 1.0), 0.0);
    }

    #[test]
    fn effective_mass_cases() {
        let fl = FluidParams::default();
        let v = submerged_volume(0.05, 0.3);
        let m = effective_mass(1.0, 30.0, &fl, v, v).unwrap();
        assert!((m - 27.585).abs() < 1e-3, "{m}");
        assert_eq!(effective_mass(1.07, 30.0, &fl, 0.0, 0.0).unwrap(), 1.07 * 30.0);
        let unit = FluidParams { added_mass_coeff: 1.0, ..fl.clone() };
        assert_eq!(effective_mass(0.93, 30.0, &unit, v, 3.0 * v).unwrap(), 0.93 * 30.0);
    }

    #[test]
    fn effective_mass_saturation_is_reported() {
        let fl = FluidParams::default();
        let err = effective_mass(1.0, 1.0, &fl, 0.01, 0.01).unwrap_err();
        assert!(matches!(err, Error::Saturation { effective_mass } if effective_mass <= 0.0));
    }

    #[test]
    fn flow_cases() {
        let still = FluidParams::default();
        assert_eq!(flow_force(&still, 12.3, 1.1), 0.0);
        let tide = FluidParams {
            flow_kind: FlowKind::Tide,
            tide_amplitude: 10.0,
            tide_omega: 1.0,
            ..Default::default()
        };
        assert_eq!(flow_force(&tide, 0.0, 1.0), 10.0);
        assert!((flow_force(&tide, PI, 1.0) + 10.0).abs() < 1e-12);
        let current = FluidParams { flow_kind: FlowKind::Current, current_amplitude: 5.0, ..Default::default() };
        assert_eq!(flow_force(&current, 3.0, 0.9), 4.5);
    }

    #[test]
    fn bulldozing_cases() {
        let soil = SoilParams::default();
        // 1000 * 0.02^1.1 = 13.5233...
        assert!((bulldozing_resistance(&soil, 0.02) - 13.52).abs() < 0.005);
        assert_eq!(bulldozing_resistance(&soil, 0.0), 0.0);
        let linear = SoilParams { bulldozing_exp: 1.0, ..soil };
        assert_relative_eq!(bulldozing_resistance(&linear, 0.02), 20.0, max_relative = 1e-15);
    }

    #[test]
    fn friction_cases() {
        let soil = SoilParams::default();
        // 60 * (1 - e^-1) = 37.9272...
        assert!((friction_force(&soil, 100.0, 0.01).unwrap() - 37.93).abs() < 0.005);
        assert_eq!(friction_force(&soil, 100.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(friction_force(&soil, 100.0, 1.0).unwrap(), 60.0, max_relative = 1e-10);
        let bad = SoilParams { presliding_scale: 0.0, ..soil };
        assert!(friction_force(&bad, 100.0, 0.01).is_err());
    }

    #[test]
    fn horizontal_cases() {
        assert_eq!(horizontal_force(false, false, 1.3, 1.0, 2.0, 3.0, 4.0), 0.0);
        assert!((horizontal_force(true, false, 1.0, 48.30, 5.0, 9.0, 9.0) - 53.30).abs() < 1e-12);
        let one = horizontal_force(true, true, 1.0, 1.5, -0.25, 3.0, 7.0);
        assert_eq!(horizontal_force(true, true, 2.0, 1.5, -0.25, 3.0, 7.0), 2.0 * one);
    }

    #[test]
    fn noise_degenerate_and_deterministic() {
        let mut rng = rng_from_seed(1);
        assert_eq!(sample_noise(&NoiseSpec::unit(), &mut rng).unwrap(), 1.0);
        let spec = NoiseSpec::default();
        let a = sample_noise(&spec, &mut rng_from_seed(5)).unwrap();
        let b = sample_noise(&spec, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validation() {
        assert!(FluidParams::default().validate().is_ok());
        assert!(fluid(0.5).validate().is_err());
        assert!(FluidParams { rho: 0.0, ..Default::default() }.validate().is_err());
        assert!(SoilParams::default().validate().is_ok());
        assert!(SoilParams { friction_coeff: 0.0, ..Default::default() }.validate().is_err());
        let leg = LegState {
            radius: 0.05,
            submerged_length: 0.2,
            speed: 1.0,
            shear_displacement: 0.0,
            sinkage: 0.0,
            normal_load: 100.0,
        };
        assert!(leg.validate().is_ok());
        assert!(LegState { sinkage: -0.1, ..leg }.validate().is_err());
        assert!(LegState { radius: 0.0, ..leg }.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok = PhysicsConfig::from_json(r#"{"fluid": {"rho": 1000.0}, "soil": {}, "noise": {"std_dev": 0.05}}"#)
            .unwrap();
        assert_eq!(ok.fluid.rho, 1000.0);
        assert_eq!(ok.noise.std_dev, 0.05);
        assert!(PhysicsConfig::from_json(r#"{"fluid": {"viscosity": 1.0}}"#).is_err());
        assert!(PhysicsConfig::from_json(r#"{"wind": {}}"#).is_err());
        let back = PhysicsConfig::from_json(&ok.to_json().unwrap()).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn jitter_stays_valid() {
        let mut rng = rng_from_seed(11);
        for _ in 0..200 {
            let f = FluidParams::default().jittered(DEFAULT_PARAM_JITTER, &mut rng).unwrap();
            f.validate().unwrap();
            let s = SoilParams::default().jittered(DEFAULT_PARAM_JITTER, &mut rng).unwrap();
            s.validate().unwrap();
            assert!((700.0..=1300.0).contains(&s.bulldozing_coeff));
        }
    }
}
