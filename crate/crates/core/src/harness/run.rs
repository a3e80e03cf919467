//! Closed-loop scenario runner.

use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::metrics::{metrics_from_records, RunMetrics};
use super::record::{content_hash, write_csv, write_json, TickRecord, TimingRecord};
use super::HarnessError;
use crate::allocation::allocate;
use crate::control::{ControllerKind, Lmpc, NmpcMf, NmpcRhonn, YawMomentCommand};
use crate::ekf::Identifier;
use crate::plant::companion::CompanionModel;
use crate::plant::driver::{driver_steer, SpeedController};
use crate::plant::path::{scenario_path, ScenarioKind};
use crate::plant::tire::TireModelKind;
use crate::plant::{Plant, PlantError, VehicleState};
use crate::reference::{reference_targets, ReferenceTargets};
use crate::rhonn::RhonnModel;
use crate::{ControlCommand, PlanarState, MPS_TO_KMH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Termination {
    /// The driver reached the end of the path.
    Completed,
    TimeLimit,
    /// Sideslip or path deviation beyond the configured limits.
    LostControl,
    /// The plant could not be integrated further.
    PlantFailure(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: ScenarioKind,
    pub controller: ControllerKind,
    pub identification_only: bool,
    pub mu: f64,
    pub v0: f64,
    pub seed: u64,
    pub plant_hash: String,
    pub config_hash: String,
    pub termination: Termination,
    pub metrics: RunMetrics,
    pub mean_compute_ms: f64,
    pub max_compute_ms: f64,
    pub rhonn_resets: u32,
}

impl RunSummary {
    /// Completed with the path deviation below `limit`.
    pub fn stable(&self, limit: f64) -> bool {
        self.termination == Termination::Completed && self.metrics.max_deviation < limit
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TickRecord>,
    pub timings: Vec<TimingRecord>,
    pub summary: RunSummary,
}

/// Hash of everything that determines the plant's response to given inputs.
pub fn plant_hash(cfg: &ScenarioConfig) -> String {
    content_hash(&(cfg.effective_vehicle(), cfg.tire, cfg.timing.plant_dt, cfg.scenario, cfg.path))
}

enum Controller {
    Rhonn(NmpcRhonn),
    Mf(NmpcMf),
    Linear(Lmpc),
    Off,
}

impl Controller {
    fn build(cfg: &ScenarioConfig) -> Result<Self, HarnessError> {
        let vehicle = cfg.effective_vehicle();
        let kind = if cfg.identification_only { ControllerKind::Off } else { cfg.controller };
        let to_cfg = |e: crate::control::ControlError| HarnessError::Config(e.to_string());
        Ok(match kind {
            ControllerKind::NmpcRhonn => Self::Rhonn(NmpcRhonn::new(cfg.nmpc).map_err(to_cfg)?),
            ControllerKind::NmpcMf => Self::Mf(
                NmpcMf::new(cfg.nmpc, vehicle, cfg.tire, cfg.timing.control_dt, cfg.nmpc_mf_substep).map_err(to_cfg)?,
            ),
            ControllerKind::Lmpc => Self::Linear(Lmpc::new(cfg.nmpc, vehicle, cfg.timing.control_dt).map_err(to_cfg)?),
            ControllerKind::Off => Self::Off,
        })
    }
}

struct Noise {
    rng: ChaCha8Rng,
    dists: [Option<Normal<f64>>; 3],
}

impl Noise {
    fn new(cfg: &ScenarioConfig) -> Self {
        let n = &cfg.noise;
        let mk = |s: f64| (s > 0.0).then(|| Normal::new(0.0, s).expect("validated std"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            dists: [mk(n.vx_std), mk(n.vy_std), mk(n.yaw_rate_std)],
        }
    }

    fn measure(&mut self, s: &PlanarState) -> PlanarState {
        let mut a = s.as_array();
        for (v, d) in a.iter_mut().zip(&self.dists) {
            if let Some(d) = d {
                *v += d.sample(&mut self.rng);
            }
        }
        PlanarState::from_array(a)
    }
}

/// Open-loop 7-DoF estimator fed with the plant inputs.
struct Estimator {
    model: CompanionModel,
    state: VehicleState,
    failed: bool,
}

impl Estimator {
    fn step(&mut self, torques: &[f64; 4], steer_front: f64, dt: f64, label: &str) {
        if self.failed {
            return;
        }
        match self.model.step(&self.state, torques, steer_front, dt) {
            Ok(s) => self.state = s,
            Err(e) => {
                warn!("{label} estimator stopped: {e}");
                self.failed = true;
            }
        }
    }
}

/// Controller inputs and output at one active tick, for observers.
#[derive(Debug, Clone, Copy)]
pub struct TickContext<'a> {
    pub t: f64,
    pub model: &'a RhonnModel,
    pub measured: PlanarState,
    pub held: ControlCommand,
    pub refs: ReferenceTargets,
    pub command: YawMomentCommand,
}

/// Runs one scenario to completion, in memory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    run_scenario_with(cfg, |_| {})
}

/// As [`run_scenario`], calling `observe` after every NMPC-RHONN solve.
pub fn run_scenario_with<F: FnMut(&TickContext)>(cfg: &ScenarioConfig, mut observe: F) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let vehicle = cfg.effective_vehicle();
    let path = scenario_path(cfg.scenario, &cfg.path);
    let dt = cfg.timing.control_dt;
    let plant_dt = cfg.timing.plant_dt;
    let steps = cfg.plant_steps_per_tick();
    let activation = cfg.activation_time();
    let config_err = |e: PlantError| HarnessError::Config(e.to_string());

    let init = VehicleState::rolling(cfg.v0 / MPS_TO_KMH, &vehicle);
    let mut plant = Plant::new(vehicle, cfg.tire, init).map_err(config_err)?;
    let mut mf = Estimator {
        model: CompanionModel::new(vehicle, cfg.tire, TireModelKind::MagicFormula, cfg.estimator_substep).map_err(config_err)?,
        state: init,
        failed: false,
    };
    let mut li = Estimator {
        model: CompanionModel::new(vehicle, cfg.tire, TireModelKind::Linear, cfg.estimator_substep).map_err(config_err)?,
        state: init,
        failed: false,
    };
    let model = RhonnModel::new(&vehicle, &cfg.rhonn, dt).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut ident = Identifier::new(model, &cfg.ekf, cfg.regressor).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut controller = Controller::build(cfg)?;
    let mut speed = match cfg.scenario {
        ScenarioKind::Dlc => None,
        ScenarioKind::SlipperyCurve => Some(SpeedController::new(init.vx, &cfg.driver)),
    };
    let mut noise = Noise::new(cfg);

    let mut records = Vec::new();
    let mut timings = Vec::new();
    let mut hint = None;
    let mut prev_ref = (0.0, 0.0);
    let lost_beta = cfg.metrics.lost_sideslip_deg.to_radians();
    let mut k: u64 = 0;
    let termination = loop {
        let t = k as f64 * dt;
        if t > cfg.timing.max_time {
            break Termination::TimeLimit;
        }
        let s = plant.state;
        let (steer_wheel, proj) = match driver_steer(&s, &path, &cfg.driver, &vehicle, hint) {
            Ok(v) => v,
            Err(PlantError::PathExhausted(_)) => break Termination::Completed,
            Err(e) => break Termination::PlantFailure(e.to_string()),
        };
        hint = Some(proj.segment);
        let steer_front = steer_wheel / vehicle.steering_ratio;
        let total_torque = speed.as_mut().map_or(0.0, |c| c.update(s.vx, dt));
        let measured = noise.measure(&s.planar());
        let rhonn_estimate = ident.estimate();

        let started = Instant::now();
        ident.observe(&measured).map_err(|e| HarnessError::Simulation(e.to_string()))?;
        let active = t + 1e-9 >= activation;
        let held = ControlCommand::new(total_torque, 0.0, steer_wheel);
        let mut refs = ReferenceTargets::default();
        let mut search_cost = f64::NAN;
        let mut search_converged = false;
        let cmd: YawMomentCommand = if !active {
            YawMomentCommand::default()
        } else {
            match &mut controller {
                Controller::Off => YawMomentCommand::default(),
                Controller::Rhonn(c) => {
                    match reference_targets(&ident.model, measured.vx, prev_ref, &held, cfg.mu, &cfg.search) {
                        Ok((r, outcome)) => {
                            refs = r;
                            prev_ref = (r.vy, r.yaw_rate);
                            search_cost = outcome.cost;
                            search_converged = outcome.converged;
                            let cmd = c.solve(&ident.model, &measured, &held, &refs);
                            observe(&TickContext { t, model: &ident.model, measured, held, refs, command: cmd });
                            cmd
                        }
                        Err(e) => {
                            debug!("reference search skipped at t={t:.2}: {e}");
                            YawMomentCommand { failed: true, ..Default::default() }
                        }
                    }
                }
                Controller::Mf(c) => {
                    refs = crate::control::linear_references(&vehicle, measured.vx, steer_front);
                    let mut est = s;
                    (est.vx, est.vy, est.yaw_rate) = (measured.vx, measured.vy, measured.yaw_rate);
                    c.solve(&est, total_torque, steer_front).unwrap_or(YawMomentCommand { failed: true, ..Default::default() })
                }
                Controller::Linear(c) => {
                    refs = crate::control::linear_references(&vehicle, measured.vx, steer_front);
                    c.solve(&measured, steer_front).unwrap_or(YawMomentCommand { failed: true, ..Default::default() })
                }
            }
        };
        let alloc = allocate(total_torque, cmd.dm, vehicle.motor_torque_cap).map_err(|e| HarnessError::Simulation(e.to_string()))?;
        ident
            .advance(&measured, &ControlCommand::new(total_torque, alloc.yaw_moment, steer_wheel))
            .map_err(|e| HarnessError::Simulation(e.to_string()))?;
        let compute_ms = started.elapsed().as_secs_f64() * 1e3;
        timings.push(TimingRecord { t, compute_ms });

        let tq = alloc.torques.0;
        records.push(TickRecord {
            t,
            x: s.x,
            y: s.y,
            heading: s.heading,
            vx: s.vx,
            vy: s.vy,
            yaw_rate: s.yaw_rate,
            sideslip: s.sideslip(),
            deviation: proj.lateral,
            rhonn_vx: rhonn_estimate.vx,
            rhonn_vy: rhonn_estimate.vy,
            rhonn_yaw_rate: rhonn_estimate.yaw_rate,
            mf_vx: mf.state.vx,
            mf_vy: mf.state.vy,
            mf_yaw_rate: mf.state.yaw_rate,
            li_vx: li.state.vx,
            li_vy: li.state.vy,
            li_yaw_rate: li.state.yaw_rate,
            ref_vy: refs.vy,
            ref_yaw_rate: refs.yaw_rate,
            ref_sideslip: refs.sideslip,
            steer_wheel,
            total_torque,
            dm_cmd: cmd.dm,
            dm_applied: alloc.yaw_moment,
            t1: tq[0],
            t2: tq[1],
            t3: tq[2],
            t4: tq[3],
            solver_cost: cmd.cost,
            solver_iterations: cmd.iterations,
            solver_failed: cmd.failed,
            search_cost,
            search_converged,
            pred_vy: cmd.predicted.vy,
            pred_yaw_rate: cmd.predicted.yaw_rate,
            control_active: active && !matches!(controller, Controller::Off),
            saturated: alloc.saturated,
        });

        if s.sideslip().abs() > lost_beta || proj.lateral.abs() > cfg.metrics.lost_deviation {
            break Termination::LostControl;
        }
        let mut failure = None;
        for _ in 0..steps {
            if let Err(e) = plant.step(&tq, steer_front, plant_dt) {
                failure = Some(e);
                break;
            }
            mf.step(&tq, steer_front, plant_dt, "7DoF-MF");
            li.step(&tq, steer_front, plant_dt, "7DoF-LI");
        }
        if let Some(e) = failure {
            break Termination::PlantFailure(e.to_string());
        }
        k += 1;
    };

    let metrics = metrics_from_records(&records, cfg.metrics.warmup, (cfg.nmpc.dm_min, cfg.nmpc.dm_max));
    let n = timings.len().max(1) as f64;
    let summary = RunSummary {
        scenario: cfg.scenario,
        controller: cfg.controller,
        identification_only: cfg.identification_only,
        mu: cfg.mu,
        v0: cfg.v0,
        seed: cfg.seed,
        plant_hash: plant_hash(cfg),
        config_hash: content_hash(cfg),
        termination,
        metrics,
        mean_compute_ms: timings.iter().map(|t| t.compute_ms).sum::<f64>() / n,
        max_compute_ms: timings.iter().map(|t| t.compute_ms).fold(0.0, f64::max),
        rhonn_resets: ident.resets(),
    };
    Ok(RunOutput { records, timings, summary })
}

/// File stem identifying a run inside an output directory.
pub fn run_stem(cfg: &ScenarioConfig) -> String {
    let who = if cfg.identification_only { "ident".to_string() } else { cfg.controller.to_string() };
    format!("{}_{}_mu{:.2}_v{:.1}", cfg.scenario, who, cfg.mu, cfg.v0)
}

/// Paths written by [`write_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub trajectory: PathBuf,
    pub timings: PathBuf,
    pub summary: PathBuf,
    pub config: PathBuf,
}

impl RunFiles {
    pub fn new(dir: &FsPath, stem: &str) -> Self {
        Self {
            trajectory: dir.join(format!("{stem}.csv")),
            timings: dir.join(format!("{stem}.timings.csv")),
            summary: dir.join(format!("{stem}.summary.json")),
            config: dir.join(format!("{stem}.config.toml")),
        }
    }
}

pub fn write_run(cfg: &ScenarioConfig, out: &RunOutput, dir: &FsPath) -> Result<RunFiles, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let files = RunFiles::new(dir, &run_stem(cfg));
    let hash = &out.summary.plant_hash;
    write_csv(&files.trajectory, hash, &out.records)?;
    write_csv(&files.timings, hash, &out.timings)?;
    write_json(&files.summary, &out.summary)?;
    std::fs::write(&files.config, cfg.to_toml())?;
    Ok(files)
}

/// Markdown comparison of runs on one plant.
pub fn comparison_markdown(runs: &[RunSummary]) -> Result<String, HarnessError> {
    if let Some(first) = runs.first() {
        if let Some(other) = runs.iter().find(|r| r.plant_hash != first.plant_hash) {
            return Err(HarnessError::MismatchedRuns(format!("{} and {} ran on different plants", first.controller, other.controller)));
        }
    }
    let mut s = String::from(
        "| Controller | Termination | Phase area | Max deviation (m) | Max sideslip (deg) | Saturated ticks | Mean compute (ms) |\n|---|---|---|---|---|---|---|\n",
    );
    for r in runs {
        let term = match &r.termination {
            Termination::PlantFailure(e) => format!("plant failure ({e})"),
            other => format!("{other:?}"),
        };
        s += &format!(
            "| {} | {} | {:.5} | {:.3} | {:.2} | {} | {:.3} |\n",
            r.controller,
            term,
            r.metrics.phase_area,
            r.metrics.max_deviation,
            r.metrics.max_sideslip.to_degrees(),
            r.metrics.saturation_count,
            r.mean_compute_ms
        );
    }
    Ok(s)
}

/// Runs independent scenarios in parallel.
pub fn run_batch(cfgs: &[ScenarioConfig]) -> Vec<Result<RunOutput, HarnessError>> {
    use rayon::prelude::*;
    cfgs.par_iter().map(run_scenario).collect()
}
