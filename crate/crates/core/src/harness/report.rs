use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::physics::horizontal_force;

/// Force terms for one leg. Drag, bulldozing and friction are signed x
/// components (they oppose the foot's velocity); flow is signed along x.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LegForces {
    pub submerged_length: f64,
    pub wading: bool,
    pub deformable: bool,
    pub drag: f64,
    pub flow: f64,
    pub bulldozing: f64,
    pub friction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceRow {
    pub t: f64,
    pub epsilon: f64,
    pub xi: f64,
    pub left: LegForces,
    pub right: LegForces,
    pub horizontal_total: f64,
    pub torque_about_com: f64,
    pub effective_mass: f64,
}

impl ForceRow {
    pub fn legs(&self) -> [&LegForces; 2] {
        [&self.left, &self.right]
    }

    /// Horizontal total rebuilt from the logged components.
    pub fn recomputed_total(&self) -> f64 {
        self.legs()
            .iter()
            .map(|l| horizontal_force(l.wading, l.deformable, self.xi, l.drag, l.flow, l.bulldozing, l.friction))
            .sum()
    }
}

/// CSV column order.
pub const CSV_COLUMNS: [&str; 20] = [
    "t",
    "epsilon",
    "xi",
    "left_submerged_length",
    "left_wading",
    "left_deformable",
    "left_drag",
    "left_flow",
    "left_bulldozing",
    "left_friction",
    "right_submerged_length",
    "right_wading",
    "right_deformable",
    "right_drag",
    "right_flow",
    "right_bulldozing",
    "right_friction",
    "horizontal_total",
    "torque_about_com",
    "effective_mass",
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceReport {
    pub rows: Vec<ForceRow>,
}

impl ForceReport {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest |logged total − recomputed total| over all rows.
    pub fn max_consistency_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.horizontal_total - r.recomputed_total()).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string(), r.epsilon.to_string(), r.xi.to_string()];
            for l in r.legs() {
                rec.extend([
                    l.submerged_length.to_string(),
                    u8::from(l.wading).to_string(),
                    u8::from(l.deformable).to_string(),
                    l.drag.to_string(),
                    l.flow.to_string(),
                    l.bulldozing.to_string(),
                    l.friction.to_string(),
                ]);
            }
            rec.extend([r.horizontal_total.to_string(), r.torque_about_com.to_string(), r.effective_mass.to_string()]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.rows {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }
}
