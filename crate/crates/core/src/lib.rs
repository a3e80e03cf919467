//! Online identification and lateral stabilization of an in-wheel-motor
//! driven vehicle.
//!
//! A recurrent high-order neural network (RHONN) with fifteen polynomial
//! regressors per neuron learns the planar dynamics (longitudinal speed,
//! lateral speed, yaw rate) online through an EKF weight update. The learned
//! map supplies steady-state lateral targets via an expanding neighbourhood
//! search and acts as the prediction model of a three-step NMPC that
//! chooses the external yaw moment. Two physics-based baselines (a 7-DoF
//! Magic Formula NMPC and a linear 2-DoF MPC) and a 7-DoF ground-truth plant
//! with driver model complete the closed loop.
//!
//! Module map:
//!
//! * [`rhonn`]: sigmoid wrapping, the 15-entry basis and the one-step model.
//! * [`ekf`]: per-neuron EKF learning and the identification loop.
//! * [`plant`]: vehicle parameters, tires, 7-DoF plant, companion models,
//!   driver and scenario paths.
//! * [`reference`]: equilibrium cost and neighbours search for targets.
//! * [`control`]: NMPC-RHONN, NMPC-MF, LMPC and the box-constrained solver.
//! * [`allocation`]: four-wheel torque split.
//! * [`harness`]: configuration, scenario runner, metrics, reports and files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod control;
pub mod ekf;
pub mod harness;
pub mod plant;
pub mod reference;
pub mod rhonn;
pub mod types;

pub use types::{ControlCommand, PlanarState};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

/// Converts m/s to km/h.
pub const MPS_TO_KMH: f64 = 3.6;
