//! Yaw-moment controllers.
//!
//! All three controllers minimise the same three-step quadratic tracking
//! cost on yaw rate and sideslip over the yaw-moment sequence, and apply only
//! the first element. They differ in prediction model and references:
//!
//! * [`NmpcRhonn`]: the identified network, references from the network's
//!   own equilibrium.
//! * [`NmpcMf`]: the small-angle Magic Formula 7-DoF model, linear
//!   steady-state references.
//! * [`Lmpc`]: the linear 2-DoF bicycle, linear references, exact QP.

mod lmpc;
mod nmpc_mf;
pub mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lmpc::{bicycle_matrices, linear_references, Lmpc};
pub use nmpc_mf::NmpcMf;
pub use solver::{minimize_box, SolverConfig};

use crate::reference::ReferenceTargets;
use crate::rhonn::{RhonnError, RhonnModel};
use crate::{ControlCommand, PlanarState};

pub const HORIZON: usize = 3;

/// Speed floor used when forming the predicted sideslip V_y/V_x, m/s.
pub const SIDESLIP_VX_FLOOR: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("speed {0} m/s below the controller floor")]
    LowSpeed(f64),
    #[error(transparent)]
    Model(#[from] RhonnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    #[default]
    NmpcRhonn,
    NmpcMf,
    Lmpc,
    Off,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 4] = [Self::NmpcRhonn, Self::NmpcMf, Self::Lmpc, Self::Off];
}

impl std::str::FromStr for ControllerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nmpcrhonn" | "rhonn" => Ok(Self::NmpcRhonn),
            "nmpcmf" | "mf" => Ok(Self::NmpcMf),
            "lmpc" => Ok(Self::Lmpc),
            "off" | "none" => Ok(Self::Off),
            other => Err(format!("unknown controller '{other}'")),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NmpcRhonn => "nmpc-rhonn",
            Self::NmpcMf => "nmpc-mf",
            Self::Lmpc => "lmpc",
            Self::Off => "off",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmpcConfig {
    /// Yaw-rate weights.
    pub q: [f64; HORIZON],
    /// Sideslip weights.
    pub r: [f64; HORIZON],
    /// Yaw-moment bounds, N·m.
    pub dm_min: f64,
    pub dm_max: f64,
    pub solver: SolverConfig,
}

impl Default for NmpcConfig {
    fn default() -> Self {
        Self {
            q: [100.0; HORIZON],
            r: [1000.0; HORIZON],
            dm_min: -1600.0,
            dm_max: 1600.0,
            solver: SolverConfig::default(),
        }
    }
}

impl NmpcConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !self.q.iter().chain(&self.r).all(|w| *w > 0.0 && w.is_finite()) {
            return Err(ControlError::InvalidConfig("cost weights must be positive".into()));
        }
        if !(self.dm_min < 0.0 && 0.0 < self.dm_max && self.dm_max.is_finite() && self.dm_min.is_finite()) {
            return Err(ControlError::InvalidConfig(format!(
                "yaw-moment bounds must straddle zero, got [{}, {}]",
                self.dm_min, self.dm_max
            )));
        }
        Ok(())
    }

    pub fn lower(&self) -> [f64; HORIZON] {
        [self.dm_min; HORIZON]
    }

    pub fn upper(&self) -> [f64; HORIZON] {
        [self.dm_max; HORIZON]
    }
}

/// Solver output for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct YawMomentCommand {
    /// First element of the optimised sequence, N·m.
    pub dm: f64,
    pub sequence: [f64; HORIZON],
    pub cost: f64,
    pub iterations: usize,
    /// Set when no finite cost was found; `dm` is then zero.
    pub failed: bool,
    /// One-step prediction under the applied sequence.
    pub predicted: PlanarState,
}

impl YawMomentCommand {
    fn neutral() -> Self {
        Self {
            failed: true,
            cost: f64::NAN,
            ..Default::default()
        }
    }
}

pub(crate) fn sideslip_of(s: &PlanarState) -> f64 {
    let vx = if s.vx.abs() < SIDESLIP_VX_FLOOR {
        SIDESLIP_VX_FLOOR.copysign(s.vx)
    } else {
        s.vx
    };
    s.vy / vx
}

/// Three-step RHONN rollout with weights, drive torque and steer held.
pub fn predict_rhonn(
    model: &RhonnModel,
    x: &PlanarState,
    dm_seq: &[f64; HORIZON],
    held: &ControlCommand,
) -> Result<[PlanarState; HORIZON], RhonnError> {
    let mut out = [PlanarState::default(); HORIZON];
    let mut cur = *x;
    for (i, dm) in dm_seq.iter().enumerate() {
        cur = model.step(&cur, &ControlCommand::new(held.total_torque, *dm, held.steer_wheel))?;
        out[i] = cur;
    }
    Ok(out)
}

/// J = Σ q_i(ω_d − ω̂_i)² + r_i(β_d − β̂_i)².
pub fn nmpc_cost(predictions: &[PlanarState; HORIZON], refs: &ReferenceTargets, cfg: &NmpcConfig) -> f64 {
    predictions
        .iter()
        .enumerate()
        .map(|(i, p)| cfg.q[i] * (refs.yaw_rate - p.yaw_rate).powi(2) + cfg.r[i] * (refs.sideslip - sideslip_of(p)).powi(2))
        .sum()
}

/// Previous solution shifted by one step, last element repeated.
pub fn shift_warm_start(prev: &[f64; HORIZON]) -> [f64; HORIZON] {
    [prev[1], prev[2], prev[2]]
}

/// Solves a three-step yaw-moment problem with a generic rollout.
pub(crate) fn solve_with<P>(cfg: &NmpcConfig, warm: &[f64; HORIZON], refs: &ReferenceTargets, mut predict: P) -> YawMomentCommand
where
    P: FnMut(&[f64; HORIZON]) -> Option<[PlanarState; HORIZON]>,
{
    let cost = |seq: &[f64]| {
        let s = [seq[0], seq[1], seq[2]];
        predict(&s).map_or(f64::INFINITY, |p| nmpc_cost(&p, refs, cfg))
    };
    let seeds = [shift_warm_start(warm), [0.0; HORIZON]];
    let m = minimize_box(cost, cfg.lower(), cfg.upper(), &seeds, &cfg.solver);
    if !m.cost.is_finite() {
        return YawMomentCommand::neutral();
    }
    let predicted = predict(&m.x).map_or(PlanarState::default(), |p| p[0]);
    YawMomentCommand {
        dm: m.x[0].clamp(cfg.dm_min, cfg.dm_max),
        sequence: m.x,
        cost: m.cost,
        iterations: m.evaluations,
        failed: false,
        predicted,
    }
}

/// NMPC on the identified network.
#[derive(Debug, Clone, PartialEq)]
pub struct NmpcRhonn {
    pub cfg: NmpcConfig,
    warm: [f64; HORIZON],
}

impl NmpcRhonn {
    pub fn new(cfg: NmpcConfig) -> Result<Self, ControlError> {
        cfg.validate()?;
        Ok(Self { cfg, warm: [0.0; HORIZON] })
    }

    pub fn solve(&mut self, model: &RhonnModel, x: &PlanarState, held: &ControlCommand, refs: &ReferenceTargets) -> YawMomentCommand {
        let out = solve_nmpc(model, x, held, refs, &self.cfg, &self.warm);
        self.warm = if out.failed { [0.0; HORIZON] } else { out.sequence };
        out
    }
}

/// Single NMPC-RHONN solve; `warm` is the previous tick's sequence.
pub fn solve_nmpc(
    model: &RhonnModel,
    x: &PlanarState,
    held: &ControlCommand,
    refs: &ReferenceTargets,
    cfg: &NmpcConfig,
    warm: &[f64; HORIZON],
) -> YawMomentCommand {
    solve_with(cfg, warm, refs, |seq| predict_rhonn(model, x, seq, held).ok())
}
