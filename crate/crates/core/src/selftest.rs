//! Runtime invariant suite over a chain: model consistency, controller
//! identities and the board protocol.

use nalgebra::{DMatrix, DVector, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controller::{task_inertias, weight_matrix, weighted_solution, PriorityWeights};
use crate::error::Result;
use crate::hmi::{self, InterfaceState};
use crate::model::{
    bias_forces, frames, gravity_vector, inverse_dynamics, jacobian_ee, mass_matrix,
    potential_energy, ChainConfig, JointState, KinematicChain, BASE_DOFS,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst value observed, or the reason for failure.
    pub detail: String,
}

impl CheckResult {
    fn measured(name: &str, worst: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} (tolerance {tol:.0e})"),
        }
    }

    fn failed(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: false,
            detail,
        }
    }
}

/// A random configuration and velocity. Arm joints in `[−π, π]`, base in a
/// 2 m square, velocities in `[−1, 1]`.
pub fn random_state(chain: &KinematicChain, rng: &mut impl Rng) -> JointState {
    let n = chain.dofs();
    let pi = std::f64::consts::PI;
    let q = DVector::from_fn(n, |i, _| match i {
        0 | 1 => rng.random_range(-1.0..1.0),
        _ => rng.random_range(-pi..pi),
    });
    let qd = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    JointState { q, qd }
}

/// A random state whose task Jacobian has smallest singular value above
/// `min_sv`.
pub fn random_regular_state(chain: &KinematicChain, rng: &mut impl Rng, min_sv: f64) -> Result<JointState> {
    loop {
        let s = random_state(chain, rng);
        let j = jacobian_ee(chain, &s)?;
        let sv = j.svd(false, false).singular_values.min();
        if sv > min_sv {
            return Ok(s);
        }
    }
}

fn run_check(name: &str, tol: f64, f: impl FnOnce() -> Result<f64>) -> CheckResult {
    match f() {
        Ok(worst) if worst.is_finite() => CheckResult::measured(name, worst, tol),
        Ok(worst) => CheckResult::failed(name, format!("non-finite value {worst}")),
        Err(e) => CheckResult::failed(name, e.to_string()),
    }
}

/// Run every check on the chain described by `config` with `samples`
/// random states each.
pub fn run_suite(config: &ChainConfig, samples: usize, seed: u64) -> Vec<CheckResult> {
    let chain = match config.build() {
        Ok(c) => c,
        Err(e) => return vec![CheckResult::failed("chain is valid", e.to_string())],
    };
    let mut out = vec![CheckResult {
        name: "chain is valid".into(),
        passed: true,
        detail: format!("{} arm joints", chain.arm_dofs()),
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<JointState> = (0..samples).map(|_| random_state(&chain, &mut rng)).collect();

    out.push(run_check("mass matrix symmetric positive definite", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in &states {
            let m = mass_matrix(&chain, s)?;
            worst = worst.max((&m - m.transpose()).amax() / m.amax());
            if m.clone().cholesky().is_none() {
                return Ok(f64::INFINITY);
            }
        }
        Ok(worst)
    }));

    out.push(run_check("mass matrix matches inverse dynamics", 1e-9, || {
        let mut worst: f64 = 0.0;
        for s in &states {
            let m = mass_matrix(&chain, s)?;
            let still = JointState::at_rest(s.q.clone());
            let g = inverse_dynamics(&chain, &still, &DVector::zeros(chain.dofs()))?;
            for k in 0..chain.dofs() {
                let mut e = DVector::zeros(chain.dofs());
                e[k] = 1.0;
                let col = inverse_dynamics(&chain, &still, &e)? - &g;
                worst = worst.max((col - m.column(k)).amax() / m.amax());
            }
        }
        Ok(worst)
    }));

    out.push(run_check("Jacobian matches finite differences", 1e-6, || {
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for s in &states {
            let j = jacobian_ee(&chain, s)?;
            let f0 = frames(&chain, &s.q).ee;
            for k in 0..chain.dofs() {
                let mut q = s.q.clone();
                q[k] += h;
                let f1 = frames(&chain, &q).ee;
                let dp = (f1.translation.vector - f0.translation.vector) / h;
                let dr = (f1.rotation * f0.rotation.inverse()).scaled_axis() / h;
                let col = Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z);
                worst = worst.max((col - j.column(k)).amax());
            }
        }
        Ok(worst)
    }));

    out.push(run_check("gravity is the potential-energy gradient", 1e-6, || {
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for s in &states {
            let g = gravity_vector(&chain, s)?;
            for k in 0..chain.dofs() {
                let mut qp = s.q.clone();
                let mut qm = s.q.clone();
                qp[k] += h;
                qm[k] -= h;
                let grad = (potential_energy(&chain, &qp)? - potential_energy(&chain, &qm)?) / (2.0 * h);
                worst = worst.max((grad - g[k]).abs() / g.amax().max(1.0));
            }
        }
        Ok(worst)
    }));

    out.push(run_check("bias forces vanish at rest", 1e-12, || {
        let mut worst: f64 = 0.0;
        for s in &states {
            let c = bias_forces(&chain, &JointState::at_rest(s.q.clone()))?;
            worst = worst.max(c.amax());
        }
        Ok(worst)
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let regular: Result<Vec<JointState>> = (0..samples)
        .map(|_| random_regular_state(&chain, &mut rng, 1e-2))
        .collect();
    let weights = [
        PriorityWeights::manipulation(),
        PriorityWeights::locomotion(),
        PriorityWeights::uniform(1.0),
    ];
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
    let mut samples_ft = || {
        let f = Vector6::from_fn(|_, _| rng2.random_range(-50.0..50.0));
        let t0 = DVector::from_fn(chain.dofs(), |_, _| rng2.random_range(-10.0..10.0));
        (f, t0)
    };
    let cases: Vec<(Vector6<f64>, DVector<f64>)> = (0..samples).map(|_| samples_ft()).collect();

    let projector = |s: &JointState| -> Result<DMatrix<f64>> {
        // J̄ᵀ = Λ J M⁻¹
        let m = mass_matrix(&chain, s)?;
        let j = jacobian_ee(&chain, s)?;
        let w = weight_matrix(&PriorityWeights::uniform(1.0), &m)?;
        let lambda = task_inertias(&j, &m, &w)?.lambda;
        let m_inv = m.clone().cholesky().expect("checked PD").inverse();
        let lambda = DMatrix::from_fn(6, 6, |r, c| lambda[(r, c)]);
        Ok(lambda * j * m_inv)
    };

    out.push(run_check("task torque realizes the Cartesian force", 1e-9, || {
        let regular = regular.as_ref().map_err(clone_err)?;
        let mut worst: f64 = 0.0;
        for (s, (f, t0)) in regular.iter().zip(&cases) {
            let p = projector(s)?;
            for w in &weights {
                let out = weighted_solution(&chain, s, f, t0, w)?;
                let realized = &p * &out.tau_task;
                let err = (realized - DVector::from_column_slice(f.as_slice())).norm() / f.norm();
                worst = worst.max(err);
            }
        }
        Ok(worst)
    }));

    out.push(run_check("null-space torque is dynamically decoupled", 1e-9, || {
        let regular = regular.as_ref().map_err(clone_err)?;
        let mut worst: f64 = 0.0;
        for (s, (f, t0)) in regular.iter().zip(&cases) {
            let p = projector(s)?;
            for w in &weights {
                let out = weighted_solution(&chain, s, f, t0, w)?;
                worst = worst.max((&p * &out.tau_null).norm());
            }
        }
        Ok(worst)
    }));

    out.push(run_check("priority weights shift motion between base and arm", 0.0, || {
        let regular = regular.as_ref().map_err(clone_err)?;
        let mut violations = 0usize;
        for (s, (f, _)) in regular.iter().zip(&cases) {
            let zero = DVector::zeros(chain.dofs());
            let m = mass_matrix(&chain, s)?;
            let split = |w: &PriorityWeights| -> Result<(f64, f64)> {
                let tau = weighted_solution(&chain, s, f, &zero, w)?.tau;
                let qdd = m.clone().cholesky().expect("checked PD").solve(&tau);
                Ok(block_inertia_norms(&m, &qdd))
            };
            let (base_m, arm_m) = split(&PriorityWeights::manipulation())?;
            let (base_l, arm_l) = split(&PriorityWeights::locomotion())?;
            if !(base_m < base_l && arm_m > arm_l) {
                violations += 1;
            }
        }
        Ok(violations as f64)
    }));

    out.push(run_check("board messages round-trip", 0.0, || {
        let mut bad = 0usize;
        for s in InterfaceState::enumerate() {
            let msg = hmi::encode(&s, 0.0);
            let framed = hmi::frame(&msg);
            let back = hmi::decode_values(&hmi::unframe(&framed)?)?;
            if back != s {
                bad += 1;
            }
        }
        Ok(bad as f64)
    }));

    out
}

/// `(‖q̈_m‖_{M_adm}, ‖q̈_a‖_{M_a})`: the metrics the weighted solution trades
/// off against each other. The plain Euclidean norm of the arm block is not
/// monotone in the weights.
pub fn block_inertia_norms(m: &DMatrix<f64>, qdd: &DVector<f64>) -> (f64, f64) {
    let n = m.nrows() - BASE_DOFS;
    let b = qdd.rows(0, BASE_DOFS);
    let a = qdd.rows(BASE_DOFS, n);
    let mb = m.view((0, 0), (BASE_DOFS, BASE_DOFS));
    let ma = m.view((BASE_DOFS, BASE_DOFS), (n, n));
    (b.dot(&(mb * b)).sqrt(), a.dot(&(ma * a)).sqrt())
}

fn clone_err(e: &crate::error::Error) -> crate::error::Error {
    crate::error::Error::InvalidParameter(e.to_string())
}
