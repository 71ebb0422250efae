//! Virtual admittance of the mobile platform.
//!
//! The platform only accepts joint-space velocity commands at 50 Hz, so the
//! virtual torques produced by the whole-body controller are passed through
//! a first-order mapping `M_adm q̈_m + D_adm q̇_m = τ_vir` and the resulting
//! velocity is held until the next update.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base update period (50 Hz).
pub const BASE_PERIOD: f64 = 0.02;

/// Diagonal virtual inertia and damping of the platform (x, y, yaw).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseAdmittanceParams {
    pub m_adm: [f64; 3],
    pub d_adm: [f64; 3],
}

impl Default for BaseAdmittanceParams {
    fn default() -> Self {
        Self {
            m_adm: [60.0, 60.0, 14.0],
            d_adm: [120.0, 120.0, 28.0],
        }
    }
}

impl BaseAdmittanceParams {
    pub fn validate(&self) -> Result<()> {
        for (i, (&m, &d)) in self.m_adm.iter().zip(&self.d_adm).enumerate() {
            if !(m > 0.0 && m.is_finite()) || !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "base admittance entry {i} must be positive (m_adm = {m}, d_adm = {d})"
                )));
            }
        }
        Ok(())
    }

    pub fn inertia(&self) -> Vector3<f64> {
        Vector3::from(self.m_adm)
    }

    pub fn damping(&self) -> Vector3<f64> {
        Vector3::from(self.d_adm)
    }

    /// Longest time constant `M/D` over the three axes.
    pub fn max_time_constant(&self) -> f64 {
        (0..3)
            .map(|i| self.m_adm[i] / self.d_adm[i])
            .fold(0.0, f64::max)
    }
}

/// Velocity command sent to the platform's low-level controller.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseVelocityCommand {
    /// (m/s, m/s, rad/s)
    pub qd_m: Vector3<f64>,
    /// Simulation time the command was issued at (s).
    pub stamp: f64,
}

/// Advance the base admittance by one update period with semi-implicit Euler.
pub fn step(
    current: &BaseVelocityCommand,
    params: &BaseAdmittanceParams,
    tau_vir: &Vector3<f64>,
    dt: f64,
) -> Result<BaseVelocityCommand> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let qdd = (tau_vir - params.damping().component_mul(&current.qd_m))
        .component_div(&params.inertia());
    Ok(BaseVelocityCommand {
        qd_m: current.qd_m + qdd * dt,
        stamp: current.stamp + dt,
    })
}
