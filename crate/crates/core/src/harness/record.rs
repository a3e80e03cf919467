//! Per-tick trajectory rows and their CSV/JSON files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::PlanarState;

/// One control tick. Units are SI (m, m/s, rad, rad/s, N·m); the steering
/// column is the steering-wheel angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TickRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub vx: f64,
    pub vy: f64,
    pub yaw_rate: f64,
    pub sideslip: f64,
    pub deviation: f64,
    pub rhonn_vx: f64,
    pub rhonn_vy: f64,
    pub rhonn_yaw_rate: f64,
    pub mf_vx: f64,
    pub mf_vy: f64,
    pub mf_yaw_rate: f64,
    pub li_vx: f64,
    pub li_vy: f64,
    pub li_yaw_rate: f64,
    pub ref_vy: f64,
    pub ref_yaw_rate: f64,
    pub ref_sideslip: f64,
    pub steer_wheel: f64,
    pub total_torque: f64,
    pub dm_cmd: f64,
    pub dm_applied: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub solver_cost: f64,
    pub solver_iterations: usize,
    pub solver_failed: bool,
    pub search_cost: f64,
    pub search_converged: bool,
    pub pred_vy: f64,
    pub pred_yaw_rate: f64,
    pub control_active: bool,
    pub saturated: bool,
}

impl TickRecord {
    pub fn truth(&self) -> PlanarState {
        PlanarState::new(self.vx, self.vy, self.yaw_rate)
    }

    pub fn rhonn(&self) -> PlanarState {
        PlanarState::new(self.rhonn_vx, self.rhonn_vy, self.rhonn_yaw_rate)
    }

    pub fn mf(&self) -> PlanarState {
        PlanarState::new(self.mf_vx, self.mf_vy, self.mf_yaw_rate)
    }

    pub fn li(&self) -> PlanarState {
        PlanarState::new(self.li_vx, self.li_vy, self.li_yaw_rate)
    }
}

/// Wall-clock control cost of one tick; kept out of the trajectory file so
/// that trajectories are reproducible byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub t: f64,
    pub compute_ms: f64,
}

const HASH_PREFIX: &str = "# plant_hash=";

/// SHA-256 of a serialisable value's JSON form.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("hashable values serialise");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the hash comment line followed by a headed CSV.
pub fn write_csv<T: Serialize>(path: &FsPath, plant_hash: &str, rows: &[T]) -> Result<(), HarnessError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{HASH_PREFIX}{plant_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_csv`], returning the plant hash and rows.
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &FsPath) -> Result<(String, Vec<T>), HarnessError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let hash = first
        .trim_end()
        .strip_prefix(HASH_PREFIX)
        .ok_or_else(|| HarnessError::Format(format!("{} lacks the plant hash line", path.display())))?
        .to_string();
    let mut r = csv::Reader::from_reader(reader);
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok((hash, rows))
}

pub fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<(), HarnessError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &FsPath) -> Result<T, HarnessError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
