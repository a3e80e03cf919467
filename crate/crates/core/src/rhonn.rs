//! Discrete-time RHONN model of the vehicle planar dynamics.
//!
//! Each of the three neurons (V_x, V_y, ω_r) predicts its next value as a
//! known physical term plus a weighted sum of fifteen high-order products
//! of the sigmoid-wrapped states and steering angle.

use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plant::VehicleParams;
use crate::{ControlCommand, PlanarState};

/// Number of high-order regressors per neuron.
pub const BASIS_LEN: usize = 15;

/// Adaptable weight vector of one neuron.
pub type Weights = SVector<f64, BASIS_LEN>;

/// Index sets (zero-based into ξ) generating each basis entry, in order.
pub const BASIS_INDEX_SETS: [&[usize]; BASIS_LEN] = [
    &[0],
    &[1],
    &[2],
    &[3],
    &[0, 1],
    &[0, 2],
    &[0, 3],
    &[1, 2],
    &[1, 3],
    &[2, 3],
    &[0, 1, 2],
    &[0, 1, 3],
    &[0, 2, 3],
    &[1, 2, 3],
    &[0, 1, 2, 3],
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhonnError {
    #[error("invalid RHONN parameter: {0}")]
    InvalidParameter(String),
    #[error("RHONN prediction is not finite")]
    NonFinite,
}

/// Amplitude and input gain of `mu * tanh(beta * x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub mu: f64,
    pub beta: f64,
}

impl SigmoidParams {
    pub fn new(mu: f64, beta: f64) -> Result<Self, RhonnError> {
        let p = Self { mu, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RhonnError> {
        if self.mu > 0.0 && self.beta > 0.0 && self.mu.is_finite() && self.beta.is_finite() {
            Ok(())
        } else {
            Err(RhonnError::InvalidParameter(format!(
                "sigmoid needs mu > 0 and beta > 0, got mu={} beta={}",
                self.mu, self.beta
            )))
        }
    }
}

/// Bounded odd activation `mu * tanh(beta * x)`.
#[inline]
pub fn sigmoid(x: f64, p: SigmoidParams) -> f64 {
    p.mu * (p.beta * x).tanh()
}

/// One sigmoid per wrapped signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidSet {
    pub vx: SigmoidParams,
    pub vy: SigmoidParams,
    pub yaw_rate: SigmoidParams,
    pub steer: SigmoidParams,
}

impl Default for SigmoidSet {
    fn default() -> Self {
        Self {
            vx: SigmoidParams { mu: 1.0, beta: 0.03 },
            vy: SigmoidParams { mu: 1.0, beta: 0.2 },
            yaw_rate: SigmoidParams { mu: 1.0, beta: 2.0 },
            steer: SigmoidParams { mu: 1.0, beta: 0.5 },
        }
    }
}

impl SigmoidSet {
    pub fn validate(&self) -> Result<(), RhonnError> {
        self.vx.validate()?;
        self.vy.validate()?;
        self.yaw_rate.validate()?;
        self.steer.validate()
    }
}

/// ξ = [S(V_x), S(V_y), S(ω_r), S(δ_w)], each with its own sigmoid.
pub fn build_xi(state: &PlanarState, steer_wheel: f64, sig: &SigmoidSet) -> [f64; 4] {
    [
        sigmoid(state.vx, sig.vx),
        sigmoid(state.vy, sig.vy),
        sigmoid(state.yaw_rate, sig.yaw_rate),
        sigmoid(steer_wheel, sig.steer),
    ]
}

/// The fifteen polynomial regressors, ordered as singles, pairs, triples
/// and the quadruple product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisVector(Weights);

impl BasisVector {
    pub fn entries(&self) -> &Weights {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    #[inline]
    pub fn dot(&self, w: &Weights) -> f64 {
        self.0.dot(w)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; BASIS_LEN]> for BasisVector {
    fn from(a: [f64; BASIS_LEN]) -> Self {
        Self(Weights::from(a))
    }
}

pub fn build_basis(xi: &[f64; 4]) -> BasisVector {
    // Products are formed left to right in index order.
    let [a, b, c, d] = *xi;
    BasisVector(Weights::from([
        a,
        b,
        c,
        d,
        a * b,
        a * c,
        a * d,
        b * c,
        b * d,
        c * d,
        a * b * c,
        a * b * d,
        a * c * d,
        b * c * d,
        a * b * c * d,
    ]))
}

/// Model configuration that is not learned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RhonnConfig {
    pub sigmoids: SigmoidSet,
    /// Multiply the known torque terms by the sample period.
    pub fixed_term_dt_scaling: bool,
}

impl Default for RhonnConfig {
    fn default() -> Self {
        Self {
            sigmoids: SigmoidSet::default(),
            fixed_term_dt_scaling: true,
        }
    }
}

/// Identified model: three weight vectors plus the known drive-torque and
/// yaw-moment gains.
#[derive(Debug, Clone, PartialEq)]
pub struct RhonnModel {
    pub w_vx: Weights,
    pub w_vy: Weights,
    pub w_yaw: Weights,
    pub sigmoids: SigmoidSet,
    /// 1/(m·r), 1/(kg·m).
    pub fixed_gain_vx: f64,
    /// w_B/(2·I_z·r), 1/(kg·m²).
    pub fixed_gain_yaw: f64,
    /// Controller sample period, s.
    pub dt: f64,
    pub fixed_term_dt_scaling: bool,
}

impl RhonnModel {
    /// Zero-weight model with gains taken from the vehicle parameters.
    pub fn new(vehicle: &VehicleParams, cfg: &RhonnConfig, dt: f64) -> Result<Self, RhonnError> {
        cfg.sigmoids.validate()?;
        if !(dt > 0.0) {
            return Err(RhonnError::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let fixed_gain_vx = 1.0 / (vehicle.mass * vehicle.wheel_radius);
        let fixed_gain_yaw = vehicle.track_width / (2.0 * vehicle.yaw_inertia * vehicle.wheel_radius);
        if !(fixed_gain_vx > 0.0 && fixed_gain_yaw > 0.0) {
            return Err(RhonnError::InvalidParameter(
                "fixed gains must be strictly positive".into(),
            ));
        }
        Ok(Self {
            w_vx: Weights::zeros(),
            w_vy: Weights::zeros(),
            w_yaw: Weights::zeros(),
            sigmoids: cfg.sigmoids,
            fixed_gain_vx,
            fixed_gain_yaw,
            dt,
            fixed_term_dt_scaling: cfg.fixed_term_dt_scaling,
        })
    }

    pub fn weights(&self, neuron: usize) -> &Weights {
        match neuron {
            0 => &self.w_vx,
            1 => &self.w_vy,
            2 => &self.w_yaw,
            _ => panic!("neuron index {neuron} out of range"),
        }
    }

    pub fn weights_mut(&mut self, neuron: usize) -> &mut Weights {
        match neuron {
            0 => &mut self.w_vx,
            1 => &mut self.w_vy,
            2 => &mut self.w_yaw,
            _ => panic!("neuron index {neuron} out of range"),
        }
    }

    pub fn basis(&self, state: &PlanarState, steer_wheel: f64) -> BasisVector {
        build_basis(&build_xi(state, steer_wheel, &self.sigmoids))
    }

    fn fixed_scale(&self) -> f64 {
        if self.fixed_term_dt_scaling {
            self.dt
        } else {
            1.0
        }
    }

    /// Known-physics part of the next state for a given input.
    pub fn fixed_terms(&self, u: &ControlCommand) -> [f64; 3] {
        let s = self.fixed_scale();
        [
            s * self.fixed_gain_vx * u.total_torque,
            0.0,
            s * self.fixed_gain_yaw * u.yaw_moment,
        ]
    }

    /// Effective sensitivity of the next yaw rate to the yaw moment.
    pub fn yaw_moment_gain(&self) -> f64 {
        self.fixed_scale() * self.fixed_gain_yaw
    }

    /// Next state given a precomputed basis.
    pub fn step_with_basis(&self, basis: &BasisVector, u: &ControlCommand) -> Result<PlanarState, RhonnError> {
        let f = self.fixed_terms(u);
        let next = PlanarState::new(
            f[0] + basis.dot(&self.w_vx),
            f[1] + basis.dot(&self.w_vy),
            f[2] + basis.dot(&self.w_yaw),
        );
        if next.is_finite() {
            Ok(next)
        } else {
            Err(RhonnError::NonFinite)
        }
    }

    /// One-step prediction of the planar state.
    pub fn step(&self, state: &PlanarState, u: &ControlCommand) -> Result<PlanarState, RhonnError> {
        let basis = self.basis(state, u.steer_wheel);
        self.step_with_basis(&basis, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> RhonnModel {
        RhonnModel::new(&VehicleParams::default(), &RhonnConfig::default(), 0.05).unwrap()
    }

    #[test]
    fn sigmoid_values() {
        let unit = SigmoidParams::new(1.0, 1.0).unwrap();
        assert_eq!(sigmoid(0.0, unit), 0.0);
        let two = SigmoidParams::new(2.0, 1.0).unwrap();
        assert_relative_eq!(sigmoid(1e6, two), 2.0);
        let steep = SigmoidParams::new(1.0, 2.0).unwrap();
        assert_relative_eq!(sigmoid(0.5, steep), 0.761_594_155_955_764_9, epsilon = 1e-12);
    }

    #[test]
    fn sigmoid_params_reject_non_positive() {
        assert!(SigmoidParams::new(0.0, 1.0).is_err());
        assert!(SigmoidParams::new(1.0, -0.1).is_err());
    }

    #[test]
    fn xi_examples() {
        let sig = SigmoidSet::default();
        assert_eq!(build_xi(&PlanarState::default(), 0.0, &sig), [0.0; 4]);

        let unit = SigmoidParams { mu: 1.0, beta: 1.0 };
        let all_unit = SigmoidSet { vx: unit, vy: unit, yaw_rate: unit, steer: unit };
        assert_eq!(build_xi(&PlanarState::new(0.7, 0.0, 0.0), 0.0, &all_unit), [0.7f64.tanh(), 0.0, 0.0, 0.0]);

        let sig = SigmoidSet { vx: SigmoidParams { mu: 1.0, beta: 0.05 }, ..sig };
        let xi = build_xi(&PlanarState::new(18.06, 0.0, 0.0), 0.0, &sig);
        assert_relative_eq!(xi[0], 0.717_755_485_649, epsilon = 1e-10);
        assert_eq!(&xi[1..], &[0.0; 3]);
    }

    #[test]
    fn basis_examples() {
        assert!(build_basis(&[1.0; 4]).as_slice().iter().all(|&v| v == 1.0));
        let b = build_basis(&[0.3, 0.0, 0.0, 0.0]);
        assert_eq!(b.as_slice()[0], 0.3);
        assert!(b.as_slice()[1..].iter().all(|&v| v == 0.0));
        let b = build_basis(&[2.0, 3.0, 5.0, 7.0]);
        assert_eq!(b.as_slice()[4], 6.0);
        assert_eq!(b.as_slice()[9], 35.0);
        assert_eq!(b.as_slice()[10], 30.0);
        assert_eq!(b.as_slice()[14], 210.0);
    }

    #[test]
    fn index_sets_cover_every_subset_once() {
        let mut seen = std::collections::HashSet::new();
        for set in BASIS_INDEX_SETS {
            let mask: u8 = set.iter().map(|&i| 1u8 << i).sum();
            assert!(seen.insert(mask));
        }
        assert_eq!(seen.len(), 15);
        assert!(!seen.contains(&0));
    }

    #[test]
    fn step_null_model_and_fixed_yaw_term() {
        let mut m = model();
        m.fixed_term_dt_scaling = false;
        let x = PlanarState::new(18.0, 0.3, 0.1);
        assert_eq!(m.step(&x, &ControlCommand::default()).unwrap(), PlanarState::default());
        let next = m.step(&x, &ControlCommand::new(0.0, 500.0, 0.0)).unwrap();
        assert_relative_eq!(next.yaw_rate, 1.715 * 500.0 / (2.0 * 3658.0 * 0.358), epsilon = 1e-12);
        assert_relative_eq!(next.yaw_rate, 0.327_399_04, epsilon = 1e-8);

        m.fixed_term_dt_scaling = true;
        let next = m.step(&x, &ControlCommand::new(0.0, 500.0, 0.0)).unwrap();
        assert_relative_eq!(next.yaw_rate, 0.05 * 0.327_399_04, epsilon = 1e-9);
    }

    #[test]
    fn step_single_active_basis() {
        let mut m = model();
        m.w_vy[1] = 1.0;
        // S(vy) = tanh(0.2 vy) = 0.4
        let vy = 0.4f64.atanh() / 0.2;
        let next = m.step(&PlanarState::new(12.0, vy, -0.2), &ControlCommand::new(0.0, 0.0, 0.3)).unwrap();
        assert_relative_eq!(next.vy, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn step_flags_non_finite() {
        let mut m = model();
        m.w_vx[0] = f64::INFINITY;
        assert_eq!(
            m.step(&PlanarState::new(10.0, 0.0, 0.0), &ControlCommand::default()),
            Err(RhonnError::NonFinite)
        );
    }

    proptest! {
        #[test]
        fn xi_within_amplitude(vx in -1e3f64..1e3, vy in -50f64..50.0, r in -5f64..5.0, d in -10f64..10.0) {
            let sig = SigmoidSet::default();
            let xi = build_xi(&PlanarState::new(vx, vy, r), d, &sig);
            let mus = [sig.vx.mu, sig.vy.mu, sig.yaw_rate.mu, sig.steer.mu];
            for (x, mu) in xi.iter().zip(mus) {
                prop_assert!(x.abs() <= mu);
            }
        }

        #[test]
        fn sigmoid_is_odd(x in -100f64..100.0, mu in 0.1f64..5.0, beta in 0.01f64..5.0) {
            let p = SigmoidParams { mu, beta };
            prop_assert_eq!(sigmoid(-x, p), -sigmoid(x, p));
        }

        #[test]
        fn prediction_bounded_by_weight_norm(
            w in proptest::collection::vec(-100f64..100.0, 15),
            vx in 0f64..40.0, vy in -5f64..5.0, r in -1f64..1.0, d in -3f64..3.0,
        ) {
            let mut m = model();
            m.w_vy = Weights::from_column_slice(&w);
            let b = m.basis(&PlanarState::new(vx, vy, r), d);
            let bound = m.w_vy.lp_norm(1) * b.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let y = m.step(&PlanarState::new(vx, vy, r), &ControlCommand::new(0.0, 0.0, d)).unwrap().vy;
            prop_assert!(y.abs() <= bound + 1e-9);
        }
    }
}
