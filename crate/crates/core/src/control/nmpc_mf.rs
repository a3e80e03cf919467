//! NMPC with the small-angle Magic Formula 7-DoF prediction model.

use super::{linear_references, solve_with, ControlError, NmpcConfig, YawMomentCommand, HORIZON};
use crate::plant::companion::CompanionModel;
use crate::plant::tire::{TireConfig, TireModelKind};
use crate::plant::{VehicleParams, VehicleState};
use crate::PlanarState;

#[derive(Debug, Clone)]
pub struct NmpcMf {
    pub cfg: NmpcConfig,
    pub model: CompanionModel,
    pub dt: f64,
    warm: [f64; HORIZON],
}

impl NmpcMf {
    pub fn new(cfg: NmpcConfig, params: VehicleParams, tire: TireConfig, dt: f64, substep: f64) -> Result<Self, ControlError> {
        cfg.validate()?;
        let model = CompanionModel::new(params, tire, TireModelKind::MagicFormula, substep)
            .map_err(|e| ControlError::InvalidConfig(e.to_string()))?;
        Ok(Self {
            cfg,
            model,
            dt,
            warm: [0.0; HORIZON],
        })
    }

    /// Rollout with drive torque split evenly and the yaw moment applied as
    /// a left/right difference.
    pub fn predict(&self, s: &VehicleState, total_torque: f64, steer_front: f64, seq: &[f64; HORIZON]) -> Option<[PlanarState; HORIZON]> {
        let mut cur = *s;
        let mut out = [PlanarState::default(); HORIZON];
        for (i, dm) in seq.iter().enumerate() {
            let left = (total_torque - dm) / 4.0;
            let right = (total_torque + dm) / 4.0;
            cur = self.model.step(&cur, &[left, right, left, right], steer_front, self.dt).ok()?;
            out[i] = cur.planar();
        }
        Some(out)
    }

    pub fn solve(&mut self, s: &VehicleState, total_torque: f64, steer_front: f64) -> Result<YawMomentCommand, ControlError> {
        if !(s.vx > super::lmpc::LINEAR_SPEED_FLOOR) {
            return Err(ControlError::LowSpeed(s.vx));
        }
        let refs = linear_references(&self.model.params, s.vx, steer_front);
        let out = solve_with(&self.cfg, &self.warm, &refs, |seq| self.predict(s, total_torque, steer_front, seq));
        self.warm = if out.failed { [0.0; HORIZON] } else { out.sequence };
        Ok(out)
    }
}
