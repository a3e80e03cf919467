//! Ground-truth vehicle and its surroundings.
//!
//! The plant is a planar 7-DoF vehicle (longitudinal, lateral and yaw body
//! motion plus four wheel spins) with full trigonometric force projection,
//! algebraic load transfer and combined-slip Magic Formula tires. The
//! [`companion`] models are the small-angle physics models used by the
//! baseline estimators and the NMPC-MF controller.

pub mod companion;
pub mod driver;
mod params;
pub mod path;
pub mod tire;
mod vehicle;

pub use params::VehicleParams;
pub use vehicle::{integrate, Plant, VehicleState, MAX_PLANT_DT};
use vehicle::Derivative;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("longitudinal speed {0} m/s is below the slip-computation floor")]
    DegenerateSpeed(f64),
    #[error("plant state is not finite")]
    NonFinite,
    #[error("path exhausted at station {0:.2} m")]
    PathExhausted(f64),
    #[error("invalid plant parameter: {0}")]
    InvalidParameter(String),
}

/// Wheel order used throughout: front-left, front-right, rear-left, rear-right.
pub const WHEELS: usize = 4;
