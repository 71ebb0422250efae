//! Arm dynamics in the world frame with the platform held fixed.
//!
//! The mass matrix comes from composite-rigid-body accumulation; bias,
//! gravity and inverse dynamics from a recursive Newton–Euler sweep. The
//! two routes are independent and the tests check one against the other.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::kinematics::{check_len, frames, ChainFrames};
use super::{JointState, KinematicChain, BASE_DOFS};
use crate::error::Result;

/// Joint-space inertia `diag(M_adm, M_a(q_a))`.
pub fn mass_matrix(chain: &KinematicChain, state: &JointState) -> Result<DMatrix<f64>> {
    chain.check_state(state)?;
    let f = frames(chain, &state.q);
    let n = chain.dofs();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..BASE_DOFS {
        m[(i, i)] = chain.base.m_adm[i];
    }
    let arm = arm_mass_matrix(chain, &f);
    m.view_mut((BASE_DOFS, BASE_DOFS), (chain.arm_dofs(), chain.arm_dofs()))
        .copy_from(&arm);
    Ok(m)
}

/// `C(q, q̇) q̇`: `D_adm q̇_m` on the base rows, Coriolis/centrifugal on the arm rows.
pub fn bias_forces(chain: &KinematicChain, state: &JointState) -> Result<DVector<f64>> {
    chain.check_state(state)?;
    let f = frames(chain, &state.q);
    let n = chain.arm_dofs();
    let zero = vec![0.0; n];
    let arm = rnea(chain, &f, &state.qd.as_slice()[BASE_DOFS..], &zero, &Vector3::zeros());
    let mut out = DVector::zeros(chain.dofs());
    for i in 0..BASE_DOFS {
        out[i] = chain.base.d_adm[i] * state.qd[i];
    }
    out.rows_mut(BASE_DOFS, n).copy_from_slice(&arm);
    Ok(out)
}

/// Generalized gravity; the planar base rows are zero.
pub fn gravity_vector(chain: &KinematicChain, state: &JointState) -> Result<DVector<f64>> {
    chain.check_state(state)?;
    let f = frames(chain, &state.q);
    let n = chain.arm_dofs();
    let zero = vec![0.0; n];
    let arm = rnea(chain, &f, &zero, &zero, &chain.gravity);
    let mut out = DVector::zeros(chain.dofs());
    out.rows_mut(BASE_DOFS, n).copy_from_slice(&arm);
    Ok(out)
}

/// `M q̈ + C q̇ + g` evaluated by one Newton–Euler pass on the arm and the
/// virtual admittance on the base.
pub fn inverse_dynamics(
    chain: &KinematicChain,
    state: &JointState,
    qdd: &DVector<f64>,
) -> Result<DVector<f64>> {
    chain.check_state(state)?;
    check_len("qdd", chain, qdd)?;
    let f = frames(chain, &state.q);
    let n = chain.arm_dofs();
    let arm = rnea(
        chain,
        &f,
        &state.qd.as_slice()[BASE_DOFS..],
        &qdd.as_slice()[BASE_DOFS..],
        &chain.gravity,
    );
    let mut out = DVector::zeros(chain.dofs());
    for i in 0..BASE_DOFS {
        out[i] = chain.base.m_adm[i] * qdd[i] + chain.base.d_adm[i] * state.qd[i];
    }
    out.rows_mut(BASE_DOFS, n).copy_from_slice(&arm);
    Ok(out)
}

/// Gravitational potential energy of the arm, `-Σ mᵢ g·cᵢ`.
pub fn potential_energy(chain: &KinematicChain, q: &DVector<f64>) -> Result<f64> {
    check_len("q", chain, q)?;
    let f = frames(chain, q);
    Ok(chain
        .links()
        .iter()
        .zip(&f.links)
        .map(|(link, pose)| -link.mass * chain.gravity.dot(&(pose * nalgebra::Point3::from(link.com)).coords))
        .sum())
}

/// `½ q̇ᵀ M q̇`, including the virtual base inertia.
pub fn kinetic_energy(chain: &KinematicChain, state: &JointState) -> Result<f64> {
    let m = mass_matrix(chain, state)?;
    Ok(0.5 * state.qd.dot(&(&m * &state.qd)))
}

struct WorldLink {
    axis: Vector3<f64>,
    origin: Vector3<f64>,
    com: Vector3<f64>,
    inertia: Matrix3<f64>,
    mass: f64,
}

fn world_links(chain: &KinematicChain, f: &ChainFrames) -> Vec<WorldLink> {
    chain
        .links()
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let pose = &f.links[i];
            let rot = pose.rotation.to_rotation_matrix();
            WorldLink {
                axis: f.axis(chain, i),
                origin: f.origin(i),
                com: (pose * nalgebra::Point3::from(link.com)).coords,
                inertia: rot.matrix() * link.inertia * rot.matrix().transpose(),
                mass: link.mass,
            }
        })
        .collect()
}

fn arm_mass_matrix(chain: &KinematicChain, f: &ChainFrames) -> DMatrix<f64> {
    let links = world_links(chain, f);
    let n = links.len();
    let mut m = DMatrix::zeros(n, n);

    // composite body j..n: mass, center of mass, inertia about that center
    let mut mass = 0.0;
    let mut com = Vector3::zeros();
    let mut inertia = Matrix3::zeros();
    for j in (0..n).rev() {
        let l = &links[j];
        let new_mass = mass + l.mass;
        let new_com = (com * mass + l.com * l.mass) / new_mass;
        inertia = shift_inertia(&inertia, mass, &(com - new_com))
            + shift_inertia(&l.inertia, l.mass, &(l.com - new_com));
        mass = new_mass;
        com = new_com;

        let zj = l.axis;
        let force = zj.cross(&(com - l.origin)) * mass;
        let moment_com = inertia * zj;
        for i in 0..=j {
            let moment = moment_com + (com - links[i].origin).cross(&force);
            let v = links[i].axis.dot(&moment);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn shift_inertia(inertia: &Matrix3<f64>, mass: f64, d: &Vector3<f64>) -> Matrix3<f64> {
    inertia + (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * mass
}

/// Newton–Euler for the arm on a stationary mount under uniform `gravity`.
fn rnea(
    chain: &KinematicChain,
    f: &ChainFrames,
    qd: &[f64],
    qdd: &[f64],
    gravity: &Vector3<f64>,
) -> Vec<f64> {
    let links = world_links(chain, f);
    let n = links.len();

    let mut omega = Vector3::zeros();
    let mut alpha = Vector3::zeros();
    // acceleration of the previous joint origin; gravity enters as a lift
    let mut acc = -gravity;
    let mut prev_origin = f.base.translation.vector;

    let mut omegas = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    let mut com_accs = Vec::with_capacity(n);
    for (i, l) in links.iter().enumerate() {
        let r = l.origin - prev_origin;
        acc += alpha.cross(&r) + omega.cross(&omega.cross(&r));
        let spin = l.axis * qd[i];
        alpha += l.axis * qdd[i] + omega.cross(&spin);
        omega += spin;
        let rc = l.com - l.origin;
        com_accs.push(acc + alpha.cross(&rc) + omega.cross(&omega.cross(&rc)));
        omegas.push(omega);
        alphas.push(alpha);
        prev_origin = l.origin;
    }

    let mut tau = vec![0.0; n];
    let mut force = Vector3::zeros();
    let mut moment = Vector3::zeros();
    let mut next_origin = Vector3::zeros();
    for i in (0..n).rev() {
        let l = &links[i];
        let inertial = com_accs[i] * l.mass;
        let w = omegas[i];
        // force/moment carry the child's totals here (zero at the tip)
        moment = l.inertia * alphas[i]
            + w.cross(&(l.inertia * w))
            + (l.com - l.origin).cross(&inertial)
            + moment
            + (next_origin - l.origin).cross(&force);
        force += inertial;
        next_origin = l.origin;
        tau[i] = l.axis.dot(&moment);
    }
    tau
}
