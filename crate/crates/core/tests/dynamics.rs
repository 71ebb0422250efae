mod common;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3, Vector4, Vector6};
use proptest::prelude::*;
use wbctl_core::model::{
    bias_forces, forward_kinematics, frames, gravity_vector, inverse_dynamics, jacobian_ee,
    kinetic_energy, mass_matrix, potential_energy, JointState, KinematicChain, BASE_DOFS,
};

/// Rodrigues rotation as a plain 3×3 array product, independent of the
/// quaternion composition used by the model.
fn rodrigues(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let k = axis.normalize();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

fn homogeneous(r: &Matrix3<f64>, p: &Vector3<f64>) -> Matrix4<f64> {
    let mut t = Matrix4::identity();
    t.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    t.fixed_view_mut::<3, 1>(0, 3).copy_from(p);
    t
}

/// End-effector transform as a product of 4×4 homogeneous matrices.
fn ee_transform_oracle(chain: &KinematicChain, q: &DVector<f64>) -> Matrix4<f64> {
    let mut t = homogeneous(&rodrigues(&Vector3::z(), q[2]), &Vector3::new(q[0], q[1], 0.0));
    for (i, link) in chain.links().iter().enumerate() {
        let origin = link.origin.to_homogeneous();
        let joint = homogeneous(&rodrigues(&link.axis, q[BASE_DOFS + i]), &Vector3::zeros());
        t = t * origin * joint;
    }
    t * chain.ee_offset.to_homogeneous()
}

#[test]
fn forward_kinematics_matches_transform_product() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(11);
    for _ in 0..100 {
        let q = common::random_q(&chain, &mut rng);
        let oracle = ee_transform_oracle(&chain, &q);
        let model = frames(&chain, &q).ee.to_homogeneous();
        assert!((oracle - model).amax() < 1e-12, "{}", (oracle - model).amax());
    }
}

#[test]
fn end_effector_point_is_transform_of_origin() {
    let chain = KinematicChain::default_arm();
    let q = DVector::from_fn(chain.dofs(), |i, _| 0.1 * i as f64);
    let t = ee_transform_oracle(&chain, &q);
    let p = t * Vector4::new(0.0, 0.0, 0.0, 1.0);
    let x = forward_kinematics(&chain, &JointState::at_rest(q)).unwrap();
    assert!((x.position - p.xyz()).norm() < 1e-12);
}

fn fd_jacobian(chain: &KinematicChain, q: &DVector<f64>) -> DMatrix<f64> {
    let h = 1e-6;
    let mut j = DMatrix::zeros(6, chain.dofs());
    for k in 0..chain.dofs() {
        let mut qp = q.clone();
        let mut qm = q.clone();
        qp[k] += h;
        qm[k] -= h;
        let fp = frames(chain, &qp).ee;
        let fm = frames(chain, &qm).ee;
        let dp = (fp.translation.vector - fm.translation.vector) / (2.0 * h);
        let dr = (fp.rotation * fm.rotation.inverse()).scaled_axis() / (2.0 * h);
        j.column_mut(k)
            .copy_from(&Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z));
    }
    j
}

#[test]
fn jacobian_matches_central_differences() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(12);
    for _ in 0..100 {
        let s = common::random_state(&chain, &mut rng);
        let j = jacobian_ee(&chain, &s).unwrap();
        let err = (j - fd_jacobian(&chain, &s.q)).amax();
        assert!(err < 1e-6, "{err}");
    }
}

#[test]
fn twist_is_time_derivative_of_pose() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(13);
    let s = common::random_state(&chain, &mut rng);
    let dt = 1e-7;
    let x0 = forward_kinematics(&chain, &s).unwrap();
    let q1 = &s.q + &s.qd * dt;
    let x1 = forward_kinematics(&chain, &JointState::at_rest(q1)).unwrap();
    let v = (x1.position - x0.position) / dt;
    assert!((v - x0.twist.fixed_rows::<3>(0)).norm() < 1e-5);
}

/// Columns of M from inverse dynamics with unit accelerations at rest.
#[test]
fn mass_matrix_columns_match_inverse_dynamics() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(14);
    for _ in 0..100 {
        let q = common::random_q(&chain, &mut rng);
        let still = JointState::at_rest(q);
        let m = mass_matrix(&chain, &still).unwrap();
        let g = inverse_dynamics(&chain, &still, &DVector::zeros(chain.dofs())).unwrap();
        for k in 0..chain.dofs() {
            let mut e = DVector::zeros(chain.dofs());
            e[k] = 1.0;
            let col = inverse_dynamics(&chain, &still, &e).unwrap() - &g;
            assert!((col - m.column(k)).amax() < 1e-9);
        }
    }
}

#[test]
fn inverse_dynamics_decomposes() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(15);
    for _ in 0..50 {
        let s = common::random_state(&chain, &mut rng);
        let qdd = DVector::from_fn(chain.dofs(), |i, _| (i as f64 * 0.7).sin());
        let full = inverse_dynamics(&chain, &s, &qdd).unwrap();
        let parts = mass_matrix(&chain, &s).unwrap() * &qdd
            + bias_forces(&chain, &s).unwrap()
            + gravity_vector(&chain, &s).unwrap();
        assert!((full - parts).amax() < 1e-9);
    }
}

#[test]
fn gravity_is_potential_gradient() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(16);
    let h = 1e-6;
    for _ in 0..100 {
        let q = common::random_q(&chain, &mut rng);
        let g = gravity_vector(&chain, &JointState::at_rest(q.clone())).unwrap();
        for k in 0..chain.dofs() {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[k] += h;
            qm[k] -= h;
            let grad = (potential_energy(&chain, &qp).unwrap() - potential_energy(&chain, &qm).unwrap()) / (2.0 * h);
            assert!((grad - g[k]).abs() < 1e-6, "joint {k}: {grad} vs {}", g[k]);
        }
        for i in 0..BASE_DOFS {
            assert_eq!(g[i], 0.0);
        }
    }
}

/// `½ q̇ᵀ M q̇` against the sum of link energies `½ m v_c² + ½ ωᵀ I ω`, with
/// link velocities taken by finite differences of the link poses.
#[test]
fn kinetic_energy_matches_link_sum() {
    let chain = KinematicChain::default_arm();
    let mut rng = common::rng(17);
    let h = 1e-6;
    for _ in 0..30 {
        let mut s = common::random_state(&chain, &mut rng);
        for i in 0..BASE_DOFS {
            s.qd[i] = 0.0;
        }
        let fp = frames(&chain, &(&s.q + &s.qd * h));
        let fm = frames(&chain, &(&s.q - &s.qd * h));
        let f0 = frames(&chain, &s.q);
        let mut oracle = 0.0;
        for (i, link) in chain.links().iter().enumerate() {
            let c = |f: &wbctl_core::model::ChainFrames| f.links[i] * nalgebra::Point3::from(link.com);
            let v = (c(&fp) - c(&fm)) / (2.0 * h);
            let w = (fp.links[i].rotation * fm.links[i].rotation.inverse()).scaled_axis() / (2.0 * h);
            let r = f0.links[i].rotation.to_rotation_matrix();
            let i_world = r.matrix() * link.inertia * r.matrix().transpose();
            oracle += 0.5 * link.mass * v.norm_squared() + 0.5 * w.dot(&(i_world * w));
        }
        let model = kinetic_energy(&chain, &s).unwrap();
        assert!((model - oracle).abs() < 1e-6 * model.max(1.0), "{model} vs {oracle}");
    }
}

/// Closed-form two-link planar arm (joints about y, gravity along −z).
struct TwoLink {
    l1: f64,
    m1: f64,
    m2: f64,
    lc1: f64,
    lc2: f64,
    i1: f64,
    i2: f64,
}

impl TwoLink {
    fn new(l1: f64, l2: f64, m1: f64, m2: f64) -> Self {
        Self {
            l1,
            m1,
            m2,
            lc1: l1 / 2.0,
            lc2: l2 / 2.0,
            i1: m1 * l1 * l1 / 12.0,
            i2: m2 * l2 * l2 / 12.0,
        }
    }

    fn mass(&self, q2: f64) -> [[f64; 2]; 2] {
        let c2 = q2.cos();
        let m11 = self.i1 + self.i2 + self.m1 * self.lc1.powi(2)
            + self.m2 * (self.l1.powi(2) + self.lc2.powi(2) + 2.0 * self.l1 * self.lc2 * c2);
        let m12 = self.i2 + self.m2 * (self.lc2.powi(2) + self.l1 * self.lc2 * c2);
        let m22 = self.i2 + self.m2 * self.lc2.powi(2);
        [[m11, m12], [m12, m22]]
    }

    fn coriolis(&self, q2: f64, qd1: f64, qd2: f64) -> [f64; 2] {
        let h = self.m2 * self.l1 * self.lc2 * q2.sin();
        [-h * (2.0 * qd1 * qd2 + qd2 * qd2), h * qd1 * qd1]
    }

    /// Positive rotation about +y lowers a link lying along +x.
    fn gravity(&self, q1: f64, q2: f64, g: f64) -> [f64; 2] {
        let c1 = q1.cos();
        let c12 = (q1 + q2).cos();
        [
            -g * (self.m1 * self.lc1 * c1 + self.m2 * (self.l1 * c1 + self.lc2 * c12)),
            -g * self.m2 * self.lc2 * c12,
        ]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_link_matches_lagrangian(
        q1 in -3.0..3.0f64, q2 in -3.0..3.0f64,
        qd1 in -2.0..2.0f64, qd2 in -2.0..2.0f64,
        yaw in -3.0..3.0f64,
        l1 in 0.2..1.0f64, l2 in 0.2..1.0f64, m1 in 0.5..5.0f64, m2 in 0.5..5.0f64,
    ) {
        let chain = KinematicChain::planar_two_link(l1, l2, m1, m2);
        let oracle = TwoLink::new(l1, l2, m1, m2);
        let q = DVector::from_vec(vec![0.3, -0.2, yaw, q1, q2]);
        let qd = DVector::from_vec(vec![0.0, 0.0, 0.0, qd1, qd2]);
        let s = JointState::new(q, qd).unwrap();

        let m = mass_matrix(&chain, &s).unwrap();
        let mo = oracle.mass(q2);
        // the yaw-rotated plane leaves the in-plane dynamics unchanged
        for r in 0..2 {
            for c in 0..2 {
                prop_assert!((m[(3 + r, 3 + c)] - mo[r][c]).abs() < 1e-9);
            }
        }
        let b = bias_forces(&chain, &s).unwrap();
        let bo = oracle.coriolis(q2, qd1, qd2);
        prop_assert!((b[3] - bo[0]).abs() < 1e-9 && (b[4] - bo[1]).abs() < 1e-9);
        let g = gravity_vector(&chain, &s).unwrap();
        let go = oracle.gravity(q1, q2, 9.81);
        prop_assert!((g[3] - go[0]).abs() < 1e-9 && (g[4] - go[1]).abs() < 1e-9);
    }

    #[test]
    fn mass_matrix_is_symmetric_positive_definite(
        q in prop::collection::vec(-3.2..3.2f64, 10),
    ) {
        let chain = KinematicChain::default_arm();
        let s = JointState::at_rest(DVector::from_vec(q));
        let m = mass_matrix(&chain, &s).unwrap();
        prop_assert!((&m - m.transpose()).amax() <= 1e-12 * m.amax());
        prop_assert!(m.clone().cholesky().is_some());
        // block-diagonal: the base carries no inertial coupling
        prop_assert!(m.view((0, BASE_DOFS), (BASE_DOFS, 7)).amax() == 0.0);
    }

    #[test]
    fn coriolis_matrix_passivity(
        q in prop::collection::vec(-3.2..3.2f64, 10),
        qd in prop::collection::vec(-1.0..1.0f64, 10),
    ) {
        // d/dt(½ q̇ᵀMq̇) = q̇ᵀ(τ − g) when M q̈ = τ − C q̇ − g, i.e.
        // ½ q̇ᵀ Ṁ q̇ = q̇ᵀ C q̇ on the arm
        let chain = KinematicChain::default_arm();
        let mut qd = DVector::from_vec(qd);
        for i in 0..BASE_DOFS {
            qd[i] = 0.0;
        }
        let q = DVector::from_vec(q);
        let s = JointState::new(q.clone(), qd.clone()).unwrap();
        let h = 1e-6;
        let mp = mass_matrix(&chain, &JointState::at_rest(&q + &qd * h)).unwrap();
        let mm = mass_matrix(&chain, &JointState::at_rest(&q - &qd * h)).unwrap();
        let m_dot = (mp - mm) / (2.0 * h);
        let lhs = 0.5 * qd.dot(&(m_dot * &qd));
        let rhs = qd.dot(&bias_forces(&chain, &s).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-6, "{} vs {}", lhs, rhs);
    }
}

#[test]
fn payload_adds_point_mass_gravity_at_end_effector() {
    let chain = KinematicChain::default_arm();
    let loaded = chain.with_payload(1.5).unwrap();
    let mut rng = common::rng(18);
    for _ in 0..20 {
        let s = JointState::at_rest(common::random_q(&chain, &mut rng));
        let dg = gravity_vector(&loaded, &s).unwrap() - gravity_vector(&chain, &s).unwrap();
        let j = jacobian_ee(&chain, &s).unwrap();
        let weight = Vector3::new(0.0, 0.0, -9.81) * 1.5;
        let expected = j.rows(0, 3).transpose() * DVector::from_column_slice((-weight).as_slice());
        assert!((dg - expected).amax() < 1e-9);
        assert!(mass_matrix(&loaded, &s).unwrap().cholesky().is_some());
    }
}
