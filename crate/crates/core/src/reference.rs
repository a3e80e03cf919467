//! Steady-state lateral targets from the identified model.
//!
//! The targets are the equilibrium (V_y, ω_r) of the learned one-step map
//! with V_x, steer and drive torque frozen and no yaw moment. The
//! equilibrium nearest the previous operating point is found by a grid
//! search over a neighbourhood whose radius grows until some point reaches
//! the cost threshold or the neighbourhood covers the admissible box.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rhonn::{RhonnError, RhonnModel};
use crate::{ControlCommand, PlanarState, GRAVITY};

/// Longitudinal speed below which the desired sideslip is not computed, m/s.
pub const SIDESLIP_SPEED_FLOOR: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("no feasible grid point inside the lateral limits")]
    EmptyFeasibleSet,
    #[error("longitudinal speed {0} m/s too low for a sideslip target")]
    LowSpeed(f64),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] RhonnError),
}

/// Steady lateral velocity (m/s), yaw rate (rad/s) and sideslip (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceTargets {
    pub vy: f64,
    pub yaw_rate: f64,
    pub sideslip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Initial radius (V_y m/s, ω_r rad/s).
    pub initial_radius: [f64; 2],
    pub radius_step: [f64; 2],
    pub grid: [f64; 2],
    pub threshold: f64,
    /// Weight of the yaw-rate residual.
    pub eta: f64,
    /// |V_yd| bound, m/s.
    pub vy_limit: f64,
    /// Fraction of μ·g/V_x allowed for |ω_rd|.
    pub yaw_rate_margin: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            initial_radius: [0.2, 0.02],
            radius_step: [0.2, 0.02],
            grid: [0.05, 0.005],
            threshold: 1e-3,
            eta: 10.0,
            vy_limit: 4.0,
            yaw_rate_margin: 0.85,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ReferenceError> {
        let all_positive = self
            .initial_radius
            .iter()
            .chain(&self.radius_step)
            .chain(&self.grid)
            .chain([&self.threshold, &self.eta, &self.vy_limit, &self.yaw_rate_margin])
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(ReferenceError::InvalidConfig("all search parameters must be positive".into()));
        }
        if self.grid[0] >= self.initial_radius[0] || self.grid[1] >= self.initial_radius[1] {
            return Err(ReferenceError::InvalidConfig("grid interval must be below the initial radius".into()));
        }
        Ok(())
    }

    /// Admissible box for (V_y, ω_r) at the given speed and adhesion.
    pub fn limits(&self, vx: f64, mu: f64) -> SearchBox {
        let r = self.yaw_rate_margin * mu * GRAVITY / vx.abs().max(SIDESLIP_SPEED_FLOOR);
        SearchBox {
            vy: (-self.vy_limit, self.vy_limit),
            yaw_rate: (-r, r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub vy: (f64, f64),
    pub yaw_rate: (f64, f64),
}

impl SearchBox {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        (self.vy.0..=self.vy.1).contains(&p.0) && (self.yaw_rate.0..=self.yaw_rate.1).contains(&p.1)
    }
}

/// Search result plus telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub point: (f64, f64),
    pub cost: f64,
    /// Radius of the last pass.
    pub radius: [f64; 2],
    pub evaluated: usize,
    pub passes: usize,
    /// Whether the threshold was met (false: best point at maximum radius).
    pub converged: bool,
}

/// Residual of the learned map at a candidate equilibrium.
///
/// The candidate replaces V_y and ω_r in the regressor; V_x, steer and drive
/// torque are held and the yaw moment is zero.
pub fn equilibrium_cost(
    candidate: (f64, f64),
    model: &RhonnModel,
    vx: f64,
    held: &ControlCommand,
    eta: f64,
) -> Result<f64, ReferenceError> {
    let u = ControlCommand::new(held.total_torque, 0.0, held.steer_wheel);
    let next = model.step(&PlanarState::new(vx, candidate.0, candidate.1), &u)?;
    Ok((next.vy - candidate.0).abs() + eta * (next.yaw_rate - candidate.1).abs())
}

fn grid_extent(radius: f64, grid: f64) -> i64 {
    (radius / grid + 1e-9).floor() as i64
}

/// Expanding-neighbourhood grid search for the nearest equilibrium.
///
/// Each pass evaluates only grid points not covered by the previous pass;
/// the best feasible point of the first pass that reaches `threshold` is
/// returned. Passes stop once the neighbourhood covers the whole box, in
/// which case the best point seen overall is returned unconverged.
pub fn neighbors_search<F>(
    center: (f64, f64),
    cfg: &SearchConfig,
    bounds: &SearchBox,
    mut cost: F,
) -> Result<SearchOutcome, ReferenceError>
where
    F: FnMut((f64, f64)) -> Result<f64, ReferenceError>,
{
    cfg.validate()?;
    if !(center.0.is_finite() && center.1.is_finite()) {
        return Err(ReferenceError::InvalidConfig("search centre is not finite".into()));
    }
    let r_max = [
        (center.0 - bounds.vy.0).abs().max((bounds.vy.1 - center.0).abs()),
        (center.1 - bounds.yaw_rate.0).abs().max((bounds.yaw_rate.1 - center.1).abs()),
    ];
    let mut radius = cfg.initial_radius;
    let mut inner: Option<(i64, i64)> = None;
    let mut best: Option<((f64, f64), f64)> = None;
    let mut evaluated = 0;
    let mut passes = 0;
    loop {
        passes += 1;
        let nv = grid_extent(radius[0], cfg.grid[0]);
        let nw = grid_extent(radius[1], cfg.grid[1]);
        let mut pass_best: Option<((f64, f64), f64)> = None;
        for i in -nv..=nv {
            for j in -nw..=nw {
                if let Some((iv, iw)) = inner {
                    if i.abs() <= iv && j.abs() <= iw {
                        continue;
                    }
                }
                let p = (center.0 + i as f64 * cfg.grid[0], center.1 + j as f64 * cfg.grid[1]);
                if !bounds.contains(p) {
                    continue;
                }
                let c = cost(p)?;
                evaluated += 1;
                if !c.is_finite() {
                    continue;
                }
                if pass_best.is_none_or(|(_, b)| c < b) {
                    pass_best = Some((p, c));
                }
            }
        }
        if let Some((p, c)) = pass_best {
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((p, c));
            }
            if c <= cfg.threshold {
                return Ok(SearchOutcome {
                    point: p,
                    cost: c,
                    radius,
                    evaluated,
                    passes,
                    converged: true,
                });
            }
        }
        if radius[0] >= r_max[0] && radius[1] >= r_max[1] {
            break;
        }
        inner = Some((nv, nw));
        radius = [radius[0] + cfg.radius_step[0], radius[1] + cfg.radius_step[1]];
    }
    let (point, cost) = best.ok_or(ReferenceError::EmptyFeasibleSet)?;
    Ok(SearchOutcome {
        point,
        cost,
        radius,
        evaluated,
        passes,
        converged: false,
    })
}

/// β_d = V_yd / V̂_x.
pub fn desired_sideslip(vy_target: f64, vx: f64) -> Result<f64, ReferenceError> {
    if vx > SIDESLIP_SPEED_FLOOR {
        Ok(vy_target / vx)
    } else {
        Err(ReferenceError::LowSpeed(vx))
    }
}

/// Full target computation for one control tick.
pub fn reference_targets(
    model: &RhonnModel,
    estimate_vx: f64,
    previous: (f64, f64),
    held: &ControlCommand,
    mu: f64,
    cfg: &SearchConfig,
) -> Result<(ReferenceTargets, SearchOutcome), ReferenceError> {
    let bounds = cfg.limits(estimate_vx, mu);
    let outcome = neighbors_search(previous, cfg, &bounds, |p| {
        equilibrium_cost(p, model, estimate_vx, held, cfg.eta)
    })?;
    let sideslip = desired_sideslip(outcome.point.0, estimate_vx)?;
    Ok((
        ReferenceTargets {
            vy: outcome.point.0,
            yaw_rate: outcome.point.1,
            sideslip,
        },
        outcome,
    ))
}
