//! Recorded NMPC-RHONN problems with brute-force grid minima, used to check
//! the solver.

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::run_scenario_with;
use super::HarnessError;
use crate::control::{nmpc_cost, NmpcConfig, HORIZON};
use crate::reference::ReferenceTargets;
use crate::rhonn::{RhonnModel, SigmoidSet, Weights};
use crate::{ControlCommand, PlanarState};

/// Grid points per decision variable.
pub const ORACLE_GRID: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub t: f64,
    pub w_vx: Vec<f64>,
    pub w_vy: Vec<f64>,
    pub w_yaw: Vec<f64>,
    pub sigmoids: SigmoidSet,
    pub fixed_gain_vx: f64,
    pub fixed_gain_yaw: f64,
    pub dt: f64,
    pub fixed_term_dt_scaling: bool,
    pub state: PlanarState,
    pub held: ControlCommand,
    pub refs: ReferenceTargets,
    pub nmpc: NmpcConfig,
    pub grid_min: f64,
    pub grid_argmin: [f64; HORIZON],
    /// Cost reached by the solver when the instance was recorded.
    pub solver_cost: f64,
}

impl OracleInstance {
    pub fn model(&self) -> RhonnModel {
        RhonnModel {
            w_vx: Weights::from_column_slice(&self.w_vx),
            w_vy: Weights::from_column_slice(&self.w_vy),
            w_yaw: Weights::from_column_slice(&self.w_yaw),
            sigmoids: self.sigmoids,
            fixed_gain_vx: self.fixed_gain_vx,
            fixed_gain_yaw: self.fixed_gain_yaw,
            dt: self.dt,
            fixed_term_dt_scaling: self.fixed_term_dt_scaling,
        }
    }
}

/// Minimum of the NMPC cost over an `n`³ grid spanning the yaw-moment box.
///
/// The last step's yaw moment only shifts the final yaw-rate prediction,
/// so the two-step rollout is shared across the innermost loop.
pub fn grid_minimum(
    model: &RhonnModel,
    x: &PlanarState,
    held: &ControlCommand,
    refs: &ReferenceTargets,
    cfg: &NmpcConfig,
    n: usize,
) -> (f64, [f64; HORIZON]) {
    let value = |i: usize| cfg.dm_min + (cfg.dm_max - cfg.dm_min) * i as f64 / (n - 1) as f64;
    let step = |s: &PlanarState, dm: f64| model.step(s, &ControlCommand::new(held.total_torque, dm, held.steer_wheel)).ok();
    let mut best = (f64::INFINITY, [0.0; HORIZON]);
    for i in 0..n {
        let Some(p1) = step(x, value(i)) else { continue };
        for j in 0..n {
            let Some(p2) = step(&p1, value(j)) else { continue };
            let Some(base) = step(&p2, 0.0) else { continue };
            let partial = nmpc_cost(&[p1, p2, base], refs, cfg) - cfg.q[2] * (refs.yaw_rate - base.yaw_rate).powi(2);
            for k in 0..n {
                let yaw = base.yaw_rate + model.yaw_moment_gain() * value(k);
                let c = partial + cfg.q[2] * (refs.yaw_rate - yaw).powi(2);
                if c < best.0 {
                    best = (c, [value(i), value(j), value(k)]);
                }
            }
        }
    }
    best
}

/// Records `count` NMPC-RHONN problems spread over `[t_start, t_end]` of a
/// closed-loop run and attaches their grid minima.
pub fn collect_instances(cfg: &ScenarioConfig, count: usize, t_start: f64, t_end: f64) -> Result<Vec<OracleInstance>, HarnessError> {
    let mut seen = Vec::new();
    run_scenario_with(cfg, |ctx| {
        if (t_start..=t_end).contains(&ctx.t) && !ctx.command.failed {
            let m = ctx.model;
            seen.push(OracleInstance {
                t: ctx.t,
                w_vx: m.w_vx.as_slice().to_vec(),
                w_vy: m.w_vy.as_slice().to_vec(),
                w_yaw: m.w_yaw.as_slice().to_vec(),
                sigmoids: m.sigmoids,
                fixed_gain_vx: m.fixed_gain_vx,
                fixed_gain_yaw: m.fixed_gain_yaw,
                dt: m.dt,
                fixed_term_dt_scaling: m.fixed_term_dt_scaling,
                state: ctx.measured,
                held: ctx.held,
                refs: ctx.refs,
                nmpc: cfg.nmpc,
                grid_min: f64::NAN,
                grid_argmin: [0.0; HORIZON],
                solver_cost: ctx.command.cost,
            });
        }
    })?;
    if seen.len() < count {
        return Err(HarnessError::Degenerate(format!("only {} solves in the window, {count} requested", seen.len())));
    }
    let picked: Vec<OracleInstance> = (0..count).map(|i| seen[i * seen.len() / count].clone()).collect();
    use rayon::prelude::*;
    Ok(picked
        .into_par_iter()
        .map(|mut inst| {
            let (c, arg) = grid_minimum(&inst.model(), &inst.state, &inst.held, &inst.refs, &inst.nmpc, ORACLE_GRID);
            inst.grid_min = c;
            inst.grid_argmin = arg;
            inst
        })
        .collect())
}
