//! Highest entry speed at which a controller completes the double lane
//! change.

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::run_scenario;
use super::HarnessError;
use crate::control::ControllerKind;
use crate::plant::path::ScenarioKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierResult {
    pub controller: ControllerKind,
    pub mu: f64,
    /// km/h
    pub frontier: f64,
    /// Every speed tried, with its outcome.
    pub trials: Vec<(f64, bool)>,
}

/// Whether a DLC entered at `v0` km/h stays within the deviation limit.
pub fn completes_dlc(base: &ScenarioConfig, controller: ControllerKind, v0: f64) -> Result<bool, HarnessError> {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::Dlc,
        controller,
        identification_only: false,
        v0,
        ..base.clone()
    };
    let out = run_scenario(&cfg)?;
    Ok(out.summary.stable(cfg.metrics.deviation_limit))
}

/// Bisection on the speed grid `v_min + i·resolution`. Returns `v_min` when
/// even that speed fails and `v_max` when it passes.
pub fn speed_frontier(base: &ScenarioConfig, controller: ControllerKind) -> Result<FrontierResult, HarnessError> {
    let f = base.frontier;
    let speed = |i: usize| f.v_min + i as f64 * f.resolution;
    let n = ((f.v_max - f.v_min) / f.resolution + 1e-9).floor() as usize;
    let mut trials = Vec::new();
    let test = |i: usize, trials: &mut Vec<(f64, bool)>| -> Result<bool, HarnessError> {
        let ok = completes_dlc(base, controller, speed(i))?;
        trials.push((speed(i), ok));
        Ok(ok)
    };
    let result = |i: usize, trials: Vec<(f64, bool)>| FrontierResult {
        controller,
        mu: base.mu,
        frontier: speed(i),
        trials,
    };
    if !test(0, &mut trials)? {
        return Ok(result(0, trials));
    }
    if test(n, &mut trials)? {
        return Ok(result(n, trials));
    }
    let (mut lo, mut hi) = (0, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if test(mid, &mut trials)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(result(lo, trials))
}

/// Frontiers of several controllers, computed in parallel.
pub fn frontiers(base: &ScenarioConfig, controllers: &[ControllerKind]) -> Result<Vec<FrontierResult>, HarnessError> {
    use rayon::prelude::*;
    controllers.par_iter().map(|c| speed_frontier(base, *c)).collect()
}
