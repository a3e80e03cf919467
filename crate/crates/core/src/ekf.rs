//! EKF-based online learning of the RHONN weights.
//!
//! Every neuron owns a 15×15 covariance. Because the model is linear in its
//! weights the measurement Jacobian is the basis vector itself, so one update
//! is a rank-one Kalman correction of the weight vector.

use log::warn;
use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rhonn::{BasisVector, RhonnError, RhonnModel, Weights, BASIS_LEN};
use crate::{ControlCommand, PlanarState};

pub type Covariance = SMatrix<f64, BASIS_LEN, BASIS_LEN>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EkfError {
    #[error("innovation covariance {0} is not positive")]
    SingularInnovation(f64),
    #[error("invalid EKF parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] RhonnError),
}

/// Scalar initialisation of the per-neuron filters (all diagonal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EkfConfig {
    pub p0: f64,
    pub q: f64,
    pub r: f64,
    pub zeta: f64,
    /// Reset a neuron when any |w_j| exceeds this.
    pub max_weight: f64,
    /// Reset a neuron when trace(P) exceeds this.
    pub max_trace: f64,
}

impl Default for EkfConfig {
    fn default() -> Self {
        Self {
            p0: 10.0,
            q: 1e-4,
            r: 0.01,
            zeta: 1.0,
            max_weight: 1e6,
            max_trace: 1e9,
        }
    }
}

impl EkfConfig {
    pub fn validate(&self) -> Result<(), EkfError> {
        let ok = self.p0 > 0.0 && self.q >= 0.0 && self.r > 0.0 && self.zeta > 0.0;
        if ok && self.max_weight > 0.0 && self.max_trace > 0.0 {
            Ok(())
        } else {
            Err(EkfError::InvalidParameter(format!("{self:?}")))
        }
    }
}

/// ∂χ/∂W. The model is linear in the weights, so this is φ.
pub fn jacobian(basis: &BasisVector) -> Weights {
    *basis.entries()
}

/// Per-neuron learner state.
#[derive(Debug, Clone, PartialEq)]
pub struct EkfLearner {
    pub p: Covariance,
    pub q: Covariance,
    pub r: f64,
    pub zeta: f64,
    p0: Covariance,
}

impl EkfLearner {
    pub fn new(cfg: &EkfConfig) -> Result<Self, EkfError> {
        cfg.validate()?;
        let p0 = Covariance::identity() * cfg.p0;
        Ok(Self {
            p: p0,
            q: Covariance::identity() * cfg.q,
            r: cfg.r,
            zeta: cfg.zeta,
            p0,
        })
    }

    pub fn from_parts(p: Covariance, q: Covariance, r: f64, zeta: f64) -> Self {
        Self { p, q, r, zeta, p0: p }
    }

    pub fn initial_covariance(&self) -> &Covariance {
        &self.p0
    }

    /// Kalman gain K = P·H / (R + Hᵀ·P·H).
    pub fn gain(&self, h: &Weights) -> Result<Weights, EkfError> {
        let ph = self.p * h;
        let innovation = self.r + h.dot(&ph);
        if !(innovation > 0.0) || !innovation.is_finite() {
            return Err(EkfError::SingularInnovation(innovation));
        }
        Ok(ph / innovation)
    }

    /// Applies one learning step and returns the corrected weights.
    ///
    /// `W' = W + ζ·K·e`, `P' = P − K·Hᵀ·P + Q`, then `P' ← (P' + P'ᵀ)/2`.
    pub fn update(&mut self, w: &Weights, error: f64, h: &Weights) -> Result<Weights, EkfError> {
        let k = self.gain(h)?;
        let w_next = w + k * (self.zeta * error);
        let khp = k * (h.transpose() * self.p);
        let p = self.p - khp + self.q;
        self.p = (p + p.transpose()) * 0.5;
        Ok(w_next)
    }

    pub fn reset(&mut self) {
        self.p = self.p0;
    }
}

/// Which state feeds the regressor when producing the next prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegressorSource {
    /// The plant measurement at step k.
    #[default]
    Measured,
    /// The model's own previous output (fully recurrent).
    Model,
}

/// Online identification of the three-neuron vehicle model.
#[derive(Debug, Clone)]
pub struct Identifier {
    pub model: RhonnModel,
    learners: [EkfLearner; 3],
    cfg: EkfConfig,
    source: RegressorSource,
    prediction: PlanarState,
    last_basis: Option<BasisVector>,
    resets: u32,
}

impl Identifier {
    pub fn new(model: RhonnModel, cfg: &EkfConfig, source: RegressorSource) -> Result<Self, EkfError> {
        let learner = EkfLearner::new(cfg)?;
        Ok(Self {
            model,
            learners: [learner.clone(), learner.clone(), learner],
            cfg: *cfg,
            source,
            prediction: PlanarState::default(),
            last_basis: None,
            resets: 0,
        })
    }

    /// Current model output χ_k, i.e. the estimate of the present state.
    pub fn estimate(&self) -> PlanarState {
        self.prediction
    }

    pub fn learners(&self) -> &[EkfLearner; 3] {
        &self.learners
    }

    /// Number of divergence resets so far.
    pub fn resets(&self) -> u32 {
        self.resets
    }

    /// Corrects the weights with the error between the measurement and the
    /// prediction made one tick earlier. Returns the per-neuron errors.
    pub fn observe(&mut self, measured: &PlanarState) -> Result<[f64; 3], EkfError> {
        let errors = [
            measured.vx - self.prediction.vx,
            measured.vy - self.prediction.vy,
            measured.yaw_rate - self.prediction.yaw_rate,
        ];
        let Some(basis) = self.last_basis else {
            return Ok(errors);
        };
        let h = jacobian(&basis);
        for (i, e) in errors.iter().enumerate() {
            let w = *self.model.weights(i);
            let w_next = self.learners[i].update(&w, *e, &h)?;
            *self.model.weights_mut(i) = w_next;
            self.guard(i);
        }
        Ok(errors)
    }

    fn guard(&mut self, neuron: usize) {
        let w = self.model.weights(neuron);
        let blown = w.iter().any(|v| !(v.abs() <= self.cfg.max_weight));
        let trace = self.learners[neuron].p.trace();
        if blown || !(trace <= self.cfg.max_trace) {
            warn!("neuron {neuron} diverged (trace {trace:e}); resetting weights and covariance");
            *self.model.weights_mut(neuron) = Weights::zeros();
            self.learners[neuron].reset();
            self.resets += 1;
        }
    }

    /// Produces χ_{k+1} for the input actually applied at step k.
    pub fn advance(&mut self, measured: &PlanarState, u: &ControlCommand) -> Result<PlanarState, EkfError> {
        let regressor = match self.source {
            RegressorSource::Measured => *measured,
            RegressorSource::Model => self.prediction,
        };
        let basis = self.model.basis(&regressor, u.steer_wheel);
        let next = self.model.step_with_basis(&basis, u)?;
        self.last_basis = Some(basis);
        self.prediction = next;
        Ok(next)
    }

    /// Learning update followed by the next prediction.
    pub fn identify_step(&mut self, measured: &PlanarState, u: &ControlCommand) -> Result<&RhonnModel, EkfError> {
        self.observe(measured)?;
        self.advance(measured, u)?;
        Ok(&self.model)
    }
}
