use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Foot position and velocity at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FootSample {
    pub pos: [f64; 3],
    pub vel: [f64; 3],
}

/// Prescribed foot motion for the left (index 0) and right (index 1) legs,
/// sampled every `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct FootTrajectory {
    pub dt: f64,
    pub legs: [Vec<FootSample>; 2],
}

impl FootTrajectory {
    pub fn new(dt: f64, left: Vec<FootSample>, right: Vec<FootSample>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("trajectory dt must be positive".into()));
        }
        if left.len() != right.len() {
            return Err(Error::InvalidArgument(format!(
                "leg series lengths differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        Ok(Self { dt, legs: [left, right] })
    }

    pub fn len(&self) -> usize {
        self.legs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples a closed-form `f(leg, t)` at `t = k·dt` for `k < steps`.
    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(usize, f64) -> FootSample) -> Result<Self> {
        let series = |leg| (0..steps).map(|k| f(leg, k as f64 * dt)).collect();
        Self::new(dt, series(0), series(1))
    }
}

/// Shipped trajectory presets. All of them hold the feet at `foot_z`
/// (elevation datum 0 is nominal ground) unless stated otherwise.
///
/// * `WalkInPlace`: feet stay at the start point and alternately lift by
///   `lift·max(0, sin(2πft + iπ))`.
/// * `StraightWalk`: both feet travel along +x at constant `speed`.
/// * `Sinusoid`: feet swing fore and aft, `x = x0 + A·sin(2πft + iπ)` with
///   `A = speed / (2πf)` so the peak speed equals `speed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    WalkInPlace,
    StraightWalk,
    Sinusoid,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::WalkInPlace, Preset::StraightWalk, Preset::Sinusoid];

    pub fn name(self) -> &'static str {
        match self {
            Preset::WalkInPlace => "walk-in-place",
            Preset::StraightWalk => "straight-walk",
            Preset::Sinusoid => "sinusoid",
        }
    }

    pub fn trajectory(self, p: &PresetParams, dt: f64, steps: usize) -> Result<FootTrajectory> {
        p.validate()?;
        let [x0, y0] = p.start;
        let w = TAU * p.frequency;
        FootTrajectory::from_fn(dt, steps, |leg, t| {
            let y = y0 + if leg == 0 { 0.5 } else { -0.5 } * p.stance_width;
            let phase = leg as f64 * PI;
            match self {
                Preset::WalkInPlace => {
                    let s = (w * t + phase).sin();
                    let (z, vz) = if s > 0.0 { (p.lift * s, p.lift * w * (w * t + phase).cos()) } else { (0.0, 0.0) };
                    FootSample { pos: [x0, y, p.foot_z + z], vel: [0.0, 0.0, vz] }
                }
                Preset::StraightWalk => FootSample { pos: [x0 + p.speed * t, y, p.foot_z], vel: [p.speed, 0.0, 0.0] },
                Preset::Sinusoid => {
                    let a = p.speed / w;
                    FootSample {
                        pos: [x0 + a * (w * t + phase).sin(), y, p.foot_z],
                        vel: [p.speed * (w * t + phase).cos(), 0.0, 0.0],
                    }
                }
            }
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidArgument(format!("unknown preset {s:?}; expected one of: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PresetParams {
    /// Midpoint between the feet at t = 0, in meters.
    pub start: [f64; 2],
    /// Forward speed (straight walk) or peak speed (sinusoid), m/s.
    pub speed: f64,
    /// Gait frequency in Hz.
    pub frequency: f64,
    pub foot_z: f64,
    pub lift: f64,
    /// Lateral distance between the two feet.
    pub stance_width: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { start: [0.5, 0.5], speed: 1.0, frequency: 1.0, foot_z: 0.0, lift: 0.1, stance_width: 0.3 }
    }
}

impl PresetParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.start.iter().all(|v| v.is_finite())
            && self.speed.is_finite()
            && self.frequency > 0.0
            && self.foot_z.is_finite()
            && self.lift >= 0.0
            && self.stance_width >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid preset parameters {self:?}")))
        }
    }
}
