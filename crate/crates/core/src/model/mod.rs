//! Kinematics and decoupled dynamics of the mobile manipulator.
//!
//! The generalized coordinates are `q = [x, y, yaw, q_1 … q_n]`: a planar
//! base parameterized as prismatic-prismatic-revolute followed by an
//! `n`-joint revolute serial arm. The base is not a physical rigid body in
//! this model; its inertia block is the virtual admittance inertia `M_adm`
//! and it carries no inertial coupling with the arm.

pub(crate) mod config;
mod dynamics;
mod kinematics;

pub use config::{ChainConfig, LinkConfig, TransformConfig};
pub use dynamics::{
    bias_forces, gravity_vector, inverse_dynamics, kinetic_energy, mass_matrix, potential_energy,
};
pub use kinematics::{forward_kinematics, frames, jacobian_ee, orientation_error, ChainFrames};

use nalgebra::{DVector, Isometry3, Matrix3, Unit, UnitQuaternion, Vector3, Vector6};

use crate::base::BaseAdmittanceParams;
use crate::error::{check_dim, Error, Result};

/// Number of base degrees of freedom (planar x, y, yaw).
pub const BASE_DOFS: usize = 3;

/// One revolute arm link.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    /// Fixed transform from the parent link frame to this joint's frame.
    pub origin: Isometry3<f64>,
    /// Joint rotation axis in this link's frame.
    pub axis: Unit<Vector3<f64>>,
    pub mass: f64,
    /// Center of mass in the link frame (m).
    pub com: Vector3<f64>,
    /// Rotational inertia about the center of mass, link frame (kg·m²).
    pub inertia: Matrix3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicChain {
    links: Vec<Link>,
    pub gravity: Vector3<f64>,
    /// Transform from the last link frame to the end-effector frame.
    pub ee_offset: Isometry3<f64>,
    /// Virtual base inertia/damping; fills the base block of the dynamics.
    pub base: BaseAdmittanceParams,
}

impl KinematicChain {
    pub fn new(
        links: Vec<Link>,
        gravity: Vector3<f64>,
        ee_offset: Isometry3<f64>,
        base: BaseAdmittanceParams,
    ) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::InvalidChain("arm needs at least one link".into()));
        }
        for (i, link) in links.iter().enumerate() {
            let idx = i + 1;
            if !(link.mass > 0.0 && link.mass.is_finite()) {
                return Err(Error::InvalidChain(format!(
                    "link {idx} mass must be > 0, got {}",
                    link.mass
                )));
            }
            if (link.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidChain(format!("link {idx} axis is not unit norm")));
            }
            let sym = (link.inertia - link.inertia.transpose()).amax();
            if sym > 1e-12 * link.inertia.amax().max(1.0) {
                return Err(Error::InvalidChain(format!("link {idx} inertia is not symmetric")));
            }
            if link.inertia.cholesky().is_none() {
                return Err(Error::InvalidChain(format!(
                    "link {idx} inertia is not positive definite"
                )));
            }
            if !link.com.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidChain(format!("link {idx} center of mass is not finite")));
            }
        }
        if !gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidChain("gravity is not finite".into()));
        }
        base.validate()?;
        Ok(Self {
            links,
            gravity,
            ee_offset,
            base,
        })
    }

    /// The bundled seven-joint arm on the planar base.
    pub fn default_arm() -> Self {
        ChainConfig::default_arm()
            .build()
            .expect("bundled chain is valid")
    }

    /// A two-link arm moving in the vertical x–z plane (both joints about y).
    pub fn planar_two_link(l1: f64, l2: f64, m1: f64, m2: f64) -> Self {
        ChainConfig::planar_two_link(l1, l2, m1, m2)
            .build()
            .expect("planar chain is valid")
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn arm_dofs(&self) -> usize {
        self.links.len()
    }

    /// Total `m + n`.
    pub fn dofs(&self) -> usize {
        BASE_DOFS + self.links.len()
    }

    pub fn with_gravity(mut self, gravity: Vector3<f64>) -> Self {
        self.gravity = gravity;
        self
    }

    /// Rigidly attach a point mass at the end-effector origin to the last link.
    pub fn with_payload(&self, mass: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "payload mass must be >= 0, got {mass}"
            )));
        }
        let mut out = self.clone();
        if mass == 0.0 {
            return Ok(out);
        }
        let last = out.links.last_mut().expect("non-empty");
        let point = self.ee_offset.translation.vector;
        let total = last.mass + mass;
        let com = (last.com * last.mass + point * mass) / total;
        let shift = |m: f64, d: Vector3<f64>| (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * m;
        last.inertia = last.inertia + shift(last.mass, last.com - com) + shift(mass, point - com);
        last.inertia = (last.inertia + last.inertia.transpose()) * 0.5;
        last.com = com;
        last.mass = total;
        Ok(out)
    }

    pub(crate) fn check_state(&self, state: &JointState) -> Result<()> {
        check_dim("q", self.dofs(), state.q.len())?;
        check_dim("qd", self.dofs(), state.qd.len())
    }
}

/// Generalized positions and velocities, base first.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
}

impl JointState {
    pub fn new(q: DVector<f64>, qd: DVector<f64>) -> Result<Self> {
        check_dim("qd", q.len(), qd.len())?;
        if !q.iter().chain(qd.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("joint state has non-finite entries".into()));
        }
        Ok(Self { q, qd })
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qd: DVector::zeros(n),
        }
    }

    pub fn zeros(dofs: usize) -> Self {
        Self::at_rest(DVector::zeros(dofs))
    }
}

/// End-effector pose and twist in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialState {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Linear (m/s) then angular (rad/s) velocity.
    pub twist: Vector6<f64>,
}

impl SpatialState {
    pub fn pose(&self) -> Isometry3<f64> {
        Isometry3::from_parts(self.position.into(), self.orientation)
    }
}
