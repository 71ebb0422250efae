use nalgebra::{DMatrix, DVector, Isometry3, Translation3, UnitQuaternion, Vector3, Vector6};

use super::{JointState, KinematicChain, SpatialState, BASE_DOFS};
use crate::error::{check_dim, Result};

/// World poses of every frame along the chain for one configuration.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    /// Platform frame: translation (x, y, 0) then rotation about z by yaw.
    pub base: Isometry3<f64>,
    /// Link frames after their joint rotation.
    pub links: Vec<Isometry3<f64>>,
    pub ee: Isometry3<f64>,
}

impl ChainFrames {
    /// World-frame joint axis of arm joint `i`.
    pub fn axis(&self, chain: &KinematicChain, i: usize) -> Vector3<f64> {
        self.links[i].rotation * chain.links()[i].axis.into_inner()
    }

    /// World-frame origin of arm joint `i`.
    pub fn origin(&self, i: usize) -> Vector3<f64> {
        self.links[i].translation.vector
    }
}

/// Frame poses for positions `q`; the caller guarantees `q.len() == chain.dofs()`.
pub fn frames(chain: &KinematicChain, q: &DVector<f64>) -> ChainFrames {
    let base = Isometry3::from_parts(
        Translation3::new(q[0], q[1], 0.0),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), q[2]),
    );
    let mut links = Vec::with_capacity(chain.arm_dofs());
    let mut current = base;
    for (i, link) in chain.links().iter().enumerate() {
        let joint = UnitQuaternion::from_axis_angle(&link.axis, q[BASE_DOFS + i]);
        current = current * link.origin * joint;
        links.push(current);
    }
    let ee = current * chain.ee_offset;
    ChainFrames { base, links, ee }
}

pub fn forward_kinematics(chain: &KinematicChain, state: &JointState) -> Result<SpatialState> {
    let jac = jacobian_ee(chain, state)?;
    let f = frames(chain, &state.q);
    let twist: Vector6<f64> = Vector6::from_iterator((&jac * &state.qd).iter().copied());
    Ok(SpatialState {
        position: f.ee.translation.vector,
        orientation: f.ee.rotation,
        twist,
    })
}

/// Geometric Jacobian of the end-effector origin, world frame, rows
/// `[v; ω]`. Base columns are prismatic x, prismatic y, revolute yaw.
pub fn jacobian_ee(chain: &KinematicChain, state: &JointState) -> Result<DMatrix<f64>> {
    chain.check_state(state)?;
    let f = frames(chain, &state.q);
    Ok(jacobian_from_frames(chain, &f))
}

pub(crate) fn jacobian_from_frames(chain: &KinematicChain, f: &ChainFrames) -> DMatrix<f64> {
    let n = chain.dofs();
    let p_ee = f.ee.translation.vector;
    let mut jac = DMatrix::zeros(6, n);
    jac[(0, 0)] = 1.0;
    jac[(1, 1)] = 1.0;
    let z = Vector3::z();
    let lin = z.cross(&(p_ee - f.base.translation.vector));
    jac.fixed_view_mut::<3, 1>(0, 2).copy_from(&lin);
    jac.fixed_view_mut::<3, 1>(3, 2).copy_from(&z);
    for i in 0..chain.arm_dofs() {
        let axis = f.axis(chain, i);
        let lin = axis.cross(&(p_ee - f.origin(i)));
        jac.fixed_view_mut::<3, 1>(0, BASE_DOFS + i).copy_from(&lin);
        jac.fixed_view_mut::<3, 1>(3, BASE_DOFS + i).copy_from(&axis);
    }
    jac
}

/// Orientation error `x ⊖ x_d` as twice the vector part of `q · q_d⁻¹`,
/// taking the short way round.
pub fn orientation_error(
    current: &UnitQuaternion<f64>,
    desired: &UnitQuaternion<f64>,
) -> Vector3<f64> {
    let err = current * desired.inverse();
    let v = err.imag() * 2.0;
    if err.w < 0.0 {
        -v
    } else {
        v
    }
}

pub(crate) fn check_len(what: &'static str, chain: &KinematicChain, v: &DVector<f64>) -> Result<()> {
    check_dim(what, chain.dofs(), v.len())
}
