//! Equal-split torque allocation.
//!
//! Left wheels receive `(T_t − ΔM)/4`, right wheels `(T_t + ΔM)/4`, so the
//! sum is the total torque and right-minus-left is the yaw moment. When a
//! wheel would exceed the motor cap the yaw moment is reduced first and
//! the total torque is kept.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocationError {
    #[error("total torque {total} N·m exceeds four motors at {cap} N·m")]
    TotalTorqueInfeasible { total: f64, cap: f64 },
}

/// Wheel torques, N·m: front-left, front-right, rear-left, rear-right.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TorqueVector(pub [f64; 4]);

impl TorqueVector {
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// T2 + T4 − T1 − T3.
    pub fn yaw_moment(&self) -> f64 {
        self.0[1] + self.0[3] - self.0[0] - self.0[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub torques: TorqueVector,
    /// Yaw moment actually realised.
    pub yaw_moment: f64,
    pub saturated: bool,
}

pub fn allocate(total: f64, yaw_moment: f64, cap: f64) -> Result<Allocation, AllocationError> {
    if !(total.abs() <= 4.0 * cap) {
        return Err(AllocationError::TotalTorqueInfeasible { total, cap });
    }
    let room = 4.0 * cap - total.abs();
    let dm = yaw_moment.clamp(-room, room);
    let left = (total - dm) / 4.0;
    let right = (total + dm) / 4.0;
    Ok(Allocation {
        torques: TorqueVector([left, right, left, right]),
        yaw_moment: dm,
        saturated: dm != yaw_moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let a = allocate(400.0, 100.0, 400.0).unwrap();
        assert_eq!(a.torques.0, [75.0, 125.0, 75.0, 125.0]);
        assert_eq!(a.torques.total(), 400.0);
        assert_eq!(a.torques.yaw_moment(), 100.0);
        assert_eq!(allocate(0.0, 0.0, 400.0).unwrap().torques.0, [0.0; 4]);
        assert_eq!(allocate(0.0, 800.0, 400.0).unwrap().torques.0, [-200.0, 200.0, -200.0, 200.0]);
    }

    #[test]
    fn saturation_keeps_total() {
        let a = allocate(1000.0, 1500.0, 400.0).unwrap();
        assert!(a.saturated);
        assert_eq!(a.torques.total(), 1000.0);
        assert_eq!(a.yaw_moment, 600.0);
        assert!(a.torques.0.iter().all(|t| t.abs() <= 400.0));
        assert!(allocate(1700.0, 0.0, 400.0).is_err());
    }

    proptest! {
        #[test]
        fn mirror_symmetry(t in -1600f64..1600.0, dm in -3000f64..3000.0) {
            let a = allocate(t, dm, 400.0).unwrap().torques.0;
            let b = allocate(t, -dm, 400.0).unwrap().torques.0;
            prop_assert_eq!([a[0], a[1], a[2], a[3]], [b[1], b[0], b[3], b[2]]);
        }
    }
}
