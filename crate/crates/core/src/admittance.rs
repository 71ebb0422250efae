//! End-effector admittance: human wrench in, reference motion out.
//!
//! `Λ_d ẍ_d + D_d ẋ_d = f_m`, integrated with semi-implicit Euler. The
//! rotational part of the reference is integrated on the unit quaternion.

use nalgebra::{Isometry3, Rotation3, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Frame, Result};

/// Diagonal inertia and damping of one admittance behavior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmittanceParams {
    pub lambda_d: [f64; 6],
    pub d_d: [f64; 6],
}

impl AdmittanceParams {
    /// Behavior with time constant `tau` (s), translational gain `lin_gain`
    /// (m/s per N) and rotational gain `rot_gain` (rad/s per N·m).
    pub fn from_time_constant(tau: f64, lin_gain: f64, rot_gain: f64) -> Self {
        let d = [
            1.0 / lin_gain,
            1.0 / lin_gain,
            1.0 / lin_gain,
            1.0 / rot_gain,
            1.0 / rot_gain,
            1.0 / rot_gain,
        ];
        Self {
            lambda_d: d.map(|v| v * tau),
            d_d: d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self
            .lambda_d
            .iter()
            .chain(&self.d_d)
            .all(|v| *v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "admittance inertia and damping must be positive".into(),
            ))
        }
    }

    /// Largest `Λ_ii / D_ii`.
    pub fn max_time_constant(&self) -> f64 {
        (0..6)
            .map(|i| self.lambda_d[i] / self.d_d[i])
            .fold(0.0, f64::max)
    }

    /// `‖D_d⁻¹‖` (spectral norm of a diagonal matrix).
    pub fn steady_state_gain(&self) -> f64 {
        self.d_d.iter().map(|d| 1.0 / d).fold(0.0, f64::max)
    }
}

/// The three selectable behaviors: low, medium and high admittance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmittancePresets {
    pub levels: [AdmittanceParams; 3],
}

impl Default for AdmittancePresets {
    fn default() -> Self {
        Self {
            levels: [
                AdmittanceParams::from_time_constant(0.5, 0.02, 0.2),
                AdmittanceParams::from_time_constant(0.5, 0.05, 0.5),
                AdmittanceParams::from_time_constant(0.5, 0.1, 1.0),
            ],
        }
    }
}

impl AdmittancePresets {
    pub fn validate(&self) -> Result<()> {
        for p in &self.levels {
            p.validate()?;
        }
        let gains = self.levels.map(|p| p.steady_state_gain());
        if !(gains[0] < gains[1] && gains[1] < gains[2]) {
            return Err(Error::InvalidParameter(format!(
                "admittance presets must increase in steady-state gain, got {gains:?}"
            )));
        }
        Ok(())
    }

    pub fn level(&self, level: u8) -> &AdmittanceParams {
        &self.levels[usize::from(level.min(2))]
    }
}

/// Desired end-effector pose and twist produced by the admittance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceState {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Linear then angular, world frame.
    pub twist: Vector6<f64>,
}

impl AdmittanceState {
    /// Stationary reference at `pose`.
    pub fn hold(pose: &Isometry3<f64>) -> Self {
        Self {
            position: pose.translation.vector,
            orientation: pose.rotation,
            twist: Vector6::zeros(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchReading {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
    pub frame: Frame,
}

impl WrenchReading {
    pub fn new(force: Vector3<f64>, torque: Vector3<f64>, frame: Frame) -> Self {
        Self {
            force,
            torque,
            frame,
        }
    }

    pub fn from_vector(w: &Vector6<f64>, frame: Frame) -> Self {
        Self::new(w.fixed_rows::<3>(0).into(), w.fixed_rows::<3>(3).into(), frame)
    }

    pub fn zero(frame: Frame) -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros(), frame)
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|v| v.is_finite())
    }
}

/// Pose of the sensor frame expressed in the end-effector frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOffset {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl FrameOffset {
    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let r = rotation.matrix();
        let ortho = (r.transpose() * r - nalgebra::Matrix3::identity()).amax();
        if ortho > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("sensor rotation is not proper orthonormal".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Express an end-effector wrench back in the sensor frame.
    pub fn to_sensor(&self, w: &WrenchReading) -> Result<WrenchReading> {
        expect_frame(w, Frame::EndEffector)?;
        let rt = self.rotation.transpose();
        Ok(WrenchReading::new(
            rt * w.force,
            rt * (w.torque - self.translation.cross(&w.force)),
            Frame::Sensor,
        ))
    }
}

fn expect_frame(w: &WrenchReading, expected: Frame) -> Result<()> {
    if w.frame == expected {
        Ok(())
    } else {
        Err(Error::WrongFrame {
            expected,
            got: w.frame,
        })
    }
}

/// Move a sensor reading to the end-effector frame.
pub fn transform_wrench(w: &WrenchReading, offset: &FrameOffset) -> Result<WrenchReading> {
    expect_frame(w, Frame::Sensor)?;
    let force = offset.rotation * w.force;
    let torque = offset.rotation * w.torque + offset.translation.cross(&force);
    Ok(WrenchReading::new(force, torque, Frame::EndEffector))
}

/// `f_m = f_h − f_a`, both in the end-effector frame.
pub fn measured_force(f_h: &WrenchReading, f_a: &WrenchReading) -> Result<WrenchReading> {
    expect_frame(f_h, Frame::EndEffector)?;
    expect_frame(f_a, Frame::EndEffector)?;
    Ok(WrenchReading::new(
        f_h.force - f_a.force,
        f_h.torque - f_a.torque,
        Frame::EndEffector,
    ))
}

/// One integration step of the admittance law.
pub fn step(
    state: &AdmittanceState,
    params: &AdmittanceParams,
    f_m: &WrenchReading,
    dt: f64,
) -> Result<AdmittanceState> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    expect_frame(f_m, Frame::EndEffector)?;
    let f = f_m.to_vector();
    let lambda = Vector6::from(params.lambda_d);
    let damping = Vector6::from(params.d_d);
    let acc = (f - damping.component_mul(&state.twist)).component_div(&lambda);
    let twist = state.twist + acc * dt;
    let position = state.position + twist.fixed_rows::<3>(0) * dt;
    let omega: Vector3<f64> = twist.fixed_rows::<3>(3).into();
    let rotated = UnitQuaternion::from_scaled_axis(omega * dt) * state.orientation;
    Ok(AdmittanceState {
        position,
        orientation: UnitQuaternion::new_normalize(rotated.into_inner()),
        twist,
    })
}
