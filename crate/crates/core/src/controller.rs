//! Weighted whole-body Cartesian impedance controller.
//!
//! The commanded torque is
//!
//! ```text
//! τ = W⁻¹M⁻¹JᵀΛ_W Λ⁻¹ F + (I − W⁻¹M⁻¹JᵀΛ_W J M⁻¹) τ₀
//! ```
//!
//! with `W = Hᵀ M⁻¹ H`, `H = diag(η_B I_m, η_A I_n)`, `Λ = (J M⁻¹ Jᵀ)⁻¹` and
//! the weighted task inertia
//!
//! ```text
//! Λ_W = (J M⁻¹ W⁻¹ M⁻¹ Jᵀ)⁻¹
//! ```
//!
//! For a square invertible `J` this is `J⁻ᵀ M W M J⁻¹`. For the redundant
//! case it is the only choice for which the task component satisfies
//! `J̄ᵀ τ = F` with `J̄ = M⁻¹ Jᵀ Λ`:
//!
//! ```text
//! J̄ᵀ τ_task = Λ J M⁻¹ W⁻¹ M⁻¹ Jᵀ Λ_W Λ⁻¹ F = Λ Λ_W⁻¹ Λ_W Λ⁻¹ F = F
//! ```
//!
//! and the same product kills the projected posture torque:
//! `Λ J M⁻¹ (I − W⁻¹M⁻¹JᵀΛ_W J M⁻¹) τ₀ = Λ (J M⁻¹ − Λ_W⁻¹ Λ_W J M⁻¹) τ₀ = 0`.

use nalgebra::{DMatrix, DVector, Matrix6, SymmetricEigen, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::admittance::AdmittanceState;
use crate::error::{check_dim, Error, Result};
use crate::model::{
    bias_forces, forward_kinematics, gravity_vector, jacobian_ee, mass_matrix, orientation_error,
    JointState, KinematicChain, SpatialState, BASE_DOFS,
};

/// Below this smallest singular value of `J` the task is rejected outright.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Below this smallest eigenvalue of a task-space inverse inertia the
/// inversion is Tikhonov-damped.
pub const DAMPING_THRESHOLD: f64 = 1e-8;
pub const DAMPING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorityMode {
    /// Arm moves more than the base (`η_B > η_A`).
    Manipulation,
    /// Base moves more than the arm (`η_B < η_A`).
    Locomotion,
}

impl PriorityMode {
    pub fn toggled(self) -> Self {
        match self {
            Self::Manipulation => Self::Locomotion,
            Self::Locomotion => Self::Manipulation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityWeights {
    pub eta_b: f64,
    pub eta_a: f64,
    pub mode: PriorityMode,
}

impl PriorityWeights {
    pub fn new(eta_b: f64, eta_a: f64, mode: PriorityMode) -> Result<Self> {
        if !(eta_b > 0.0 && eta_a > 0.0 && eta_b.is_finite() && eta_a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "priority weights must be positive, got eta_b = {eta_b}, eta_a = {eta_a}"
            )));
        }
        let consistent = match mode {
            PriorityMode::Manipulation => eta_b > eta_a,
            PriorityMode::Locomotion => eta_b < eta_a,
        };
        if !consistent {
            return Err(Error::InvalidParameter(format!(
                "{mode:?} mode requires {} but eta_b = {eta_b}, eta_a = {eta_a}",
                match mode {
                    PriorityMode::Manipulation => "eta_b > eta_a",
                    PriorityMode::Locomotion => "eta_b < eta_a",
                }
            )));
        }
        Ok(Self { eta_b, eta_a, mode })
    }

    /// Weights with no mode constraint, e.g. `H = I`.
    pub fn uniform(eta: f64) -> Self {
        Self {
            eta_b: eta,
            eta_a: eta,
            mode: PriorityMode::Manipulation,
        }
    }

    pub fn manipulation() -> Self {
        Self::new(5.0, 1.0, PriorityMode::Manipulation).expect("valid")
    }

    pub fn locomotion() -> Self {
        Self::new(1.0, 3.0, PriorityMode::Locomotion).expect("valid")
    }

    fn h_diag(&self, dofs: usize) -> DVector<f64> {
        DVector::from_fn(dofs, |i, _| if i < BASE_DOFS { self.eta_b } else { self.eta_a })
    }
}

/// `(η_B, η_A)` for each mode, as loaded from a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorityPresets {
    pub manipulation: EtaPair,
    pub locomotion: EtaPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaPair {
    pub eta_b: f64,
    pub eta_a: f64,
}

impl Default for PriorityPresets {
    fn default() -> Self {
        Self {
            manipulation: EtaPair {
                eta_b: 5.0,
                eta_a: 1.0,
            },
            locomotion: EtaPair {
                eta_b: 1.0,
                eta_a: 3.0,
            },
        }
    }
}

impl PriorityPresets {
    pub fn weights(&self, mode: PriorityMode) -> Result<PriorityWeights> {
        let pair = match mode {
            PriorityMode::Manipulation => self.manipulation,
            PriorityMode::Locomotion => self.locomotion,
        };
        PriorityWeights::new(pair.eta_b, pair.eta_a, mode)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights(PriorityMode::Manipulation)?;
        self.weights(PriorityMode::Locomotion).map(|_| ())
    }
}

pub const DEFAULT_K_CART: [f64; 6] = [500.0, 500.0, 500.0, 50.0, 50.0, 50.0];

/// Cartesian and null-space impedance parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceGains {
    pub k_cart: Vector6<f64>,
    pub d_cart: Vector6<f64>,
    pub k_joint: DVector<f64>,
    pub d_joint: DVector<f64>,
    /// Posture reference for the null-space task.
    pub q_0: DVector<f64>,
}

impl ImpedanceGains {
    /// Defaults: 500 N/m and 50 N·m/rad, damping `2√(k Λ_ii)` from the
    /// Cartesian inertia at the posture, posture stiffness 10 and damping 2
    /// on the arm joints only.
    pub fn default_for(chain: &KinematicChain, q_0: &DVector<f64>) -> Result<Self> {
        check_dim("q_0", chain.dofs(), q_0.len())?;
        let k_cart = Vector6::from(DEFAULT_K_CART);
        let state = JointState::at_rest(q_0.clone());
        let m = mass_matrix(chain, &state)?;
        let j = jacobian_ee(chain, &state)?;
        let w = weight_matrix(&PriorityWeights::uniform(1.0), &m)?;
        let inertias = task_inertias(&j, &m, &w)?;
        let d_cart = Vector6::from_fn(|i, _| 2.0 * (k_cart[i] * inertias.lambda[(i, i)]).sqrt());
        Ok(Self::default_with_damping(chain.dofs(), q_0.clone(), d_cart))
    }

    /// Default stiffnesses with the given Cartesian damping; needs no model
    /// evaluation, so it also works at singular postures.
    pub fn default_with_damping(dofs: usize, q_0: DVector<f64>, d_cart: Vector6<f64>) -> Self {
        let arm_only = |v: f64| DVector::from_fn(dofs, |i, _| if i < BASE_DOFS { 0.0 } else { v });
        Self {
            k_cart: Vector6::from(DEFAULT_K_CART),
            d_cart,
            k_joint: arm_only(10.0),
            d_joint: arm_only(2.0),
            q_0,
        }
    }

    pub fn zeroed(dofs: usize, q_0: DVector<f64>) -> Self {
        Self {
            k_cart: Vector6::zeros(),
            d_cart: Vector6::zeros(),
            k_joint: DVector::zeros(dofs),
            d_joint: DVector::zeros(dofs),
            q_0,
        }
    }

    pub fn validate(&self, dofs: usize) -> Result<()> {
        check_dim("k_joint", dofs, self.k_joint.len())?;
        check_dim("d_joint", dofs, self.d_joint.len())?;
        check_dim("q_0", dofs, self.q_0.len())?;
        let all = self
            .k_cart
            .iter()
            .chain(self.d_cart.iter())
            .chain(self.k_joint.iter())
            .chain(self.d_joint.iter());
        for v in all {
            if !(*v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("impedance gain {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Which model terms the controller adds on top of the impedance torque.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Compensation {
    pub gravity: bool,
    pub coriolis: bool,
}

impl Default for Compensation {
    fn default() -> Self {
        Self {
            gravity: true,
            coriolis: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    /// `[τ_m^vir; τ_a]`, compensation included on the arm rows.
    pub tau: DVector<f64>,
    /// The `F`-dependent part of the weighted solution.
    pub tau_task: DVector<f64>,
    /// The projected posture torque.
    pub tau_null: DVector<f64>,
    /// The Cartesian force `F` being tracked.
    pub f_cartesian: Vector6<f64>,
    /// Set when a task-space inversion was Tikhonov-damped.
    pub damped: bool,
}

impl ControlOutput {
    pub fn base_torque(&self) -> Vector3<f64> {
        Vector3::new(self.tau[0], self.tau[1], self.tau[2])
    }

    pub fn arm_torque(&self) -> DVector<f64> {
        self.tau.rows(BASE_DOFS, self.tau.len() - BASE_DOFS).into_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskInertias {
    /// `(J M⁻¹ Jᵀ)⁻¹`
    pub lambda: Matrix6<f64>,
    /// `(J M⁻¹ W⁻¹ M⁻¹ Jᵀ)⁻¹`
    pub lambda_w: Matrix6<f64>,
    /// Smallest singular value of `J`.
    pub jacobian_min_singular_value: f64,
    pub damped: bool,
}

/// `W = Hᵀ M⁻¹ H`.
pub fn weight_matrix(weights: &PriorityWeights, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m_inv = spd_inverse(m, "mass matrix")?;
    let h = weights.h_diag(m.nrows());
    let w = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| h[r] * m_inv[(r, c)] * h[c]);
    Ok(symmetrize(w))
}

pub fn task_inertias(j: &DMatrix<f64>, m: &DMatrix<f64>, w: &DMatrix<f64>) -> Result<TaskInertias> {
    check_dim("jacobian rows", 6, j.nrows())?;
    check_dim("mass matrix", j.ncols(), m.nrows())?;
    check_dim("weight matrix", j.ncols(), w.nrows())?;
    let m_inv = spd_inverse(m, "mass matrix")?;
    let w_inv = spd_inverse(w, "weight matrix")?;
    task_inertias_inner(j, &m_inv, &w_inv).map(|(t, _)| t)
}

/// Returns the inertias and the (possibly damped) `Λ⁻¹` used by the torque law.
fn task_inertias_inner(
    j: &DMatrix<f64>,
    m_inv: &DMatrix<f64>,
    w_inv: &DMatrix<f64>,
) -> Result<(TaskInertias, Matrix6<f64>)> {
    let sv = j.clone().svd(false, false).singular_values;
    let jac_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if jac_min < RANK_TOLERANCE {
        return Err(Error::Singular {
            min_singular_value: jac_min,
        });
    }
    let jm = j * m_inv;
    let a = to_matrix6(&symmetrize(&jm * j.transpose()));
    let a_w = to_matrix6(&symmetrize(&jm * w_inv * jm.transpose()));

    let (lambda_inv, damped_a) = damp_if_needed(a);
    let (lambda_w_inv, damped_w) = damp_if_needed(a_w);
    let lambda = spd_inverse6(&lambda_inv)?;
    let lambda_w = spd_inverse6(&lambda_w_inv)?;
    Ok((
        TaskInertias {
            lambda,
            lambda_w,
            jacobian_min_singular_value: jac_min,
            damped: damped_a || damped_w,
        },
        lambda_inv,
    ))
}

fn damp_if_needed(a: Matrix6<f64>) -> (Matrix6<f64>, bool) {
    let min_eig = SymmetricEigen::new(a)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < DAMPING_THRESHOLD {
        (a + Matrix6::identity() * DAMPING, true)
    } else {
        (a, false)
    }
}

/// `F = −D ẋ − K (x − x_d)`. The damping acts on the absolute twist.
pub fn cartesian_impedance_force(
    x: &SpatialState,
    x_d: &AdmittanceState,
    gains: &ImpedanceGains,
) -> Vector6<f64> {
    let mut err = Vector6::zeros();
    err.fixed_rows_mut::<3>(0).copy_from(&(x.position - x_d.position));
    err.fixed_rows_mut::<3>(3)
        .copy_from(&orientation_error(&x.orientation, &x_d.orientation));
    -gains.d_cart.component_mul(&x.twist) - gains.k_cart.component_mul(&err)
}

/// `τ₀ = −D₀ q̇ − K₀ (q − q₀)`.
pub fn nullspace_torque(state: &JointState, gains: &ImpedanceGains) -> DVector<f64> {
    -gains.d_joint.component_mul(&state.qd) - gains.k_joint.component_mul(&(&state.q - &gains.q_0))
}

pub fn compute_torques(
    chain: &KinematicChain,
    state: &JointState,
    x_d: &AdmittanceState,
    gains: &ImpedanceGains,
    weights: &PriorityWeights,
) -> Result<ControlOutput> {
    compute_torques_with(chain, state, x_d, gains, weights, Compensation::default())
}

pub fn compute_torques_with(
    chain: &KinematicChain,
    state: &JointState,
    x_d: &AdmittanceState,
    gains: &ImpedanceGains,
    weights: &PriorityWeights,
    compensation: Compensation,
) -> Result<ControlOutput> {
    chain.check_state(state)?;
    gains.validate(chain.dofs())?;
    let x = forward_kinematics(chain, state)?;
    let f = cartesian_impedance_force(&x, x_d, gains);
    let tau_0 = nullspace_torque(state, gains);
    let mut out = weighted_solution(chain, state, &f, &tau_0, weights)?;

    let n = chain.arm_dofs();
    if compensation.gravity {
        let g = gravity_vector(chain, state)?;
        let mut arm = out.tau.rows_mut(BASE_DOFS, n);
        arm += g.rows(BASE_DOFS, n);
    }
    if compensation.coriolis {
        let c = bias_forces(chain, state)?;
        let mut arm = out.tau.rows_mut(BASE_DOFS, n);
        arm += c.rows(BASE_DOFS, n);
    }
    Ok(out)
}

/// The weighted torque solution for a given `F` and `τ₀`, without any
/// model compensation.
pub fn weighted_solution(
    chain: &KinematicChain,
    state: &JointState,
    f: &Vector6<f64>,
    tau_0: &DVector<f64>,
    weights: &PriorityWeights,
) -> Result<ControlOutput> {
    check_dim("tau_0", chain.dofs(), tau_0.len())?;
    let m = mass_matrix(chain, state)?;
    let j = jacobian_ee(chain, state)?;
    let m_inv = spd_inverse(&m, "mass matrix")?;
    // W⁻¹ = H⁻¹ M H⁻¹ for diagonal H
    let h = weights.h_diag(chain.dofs());
    let w_inv = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] / (h[r] * h[c]));
    let (inertias, lambda_inv) = task_inertias_inner(&j, &m_inv, &w_inv)?;

    let jm = &j * &m_inv;
    // W⁻¹ M⁻¹ Jᵀ Λ_W
    let p = &w_inv * jm.transpose() * from_matrix6(&inertias.lambda_w);
    let f_task = from_matrix6(&lambda_inv) * DVector::from_column_slice(f.as_slice());
    let tau_task = &p * f_task;
    let tau_null = tau_0 - &p * (&jm * tau_0);
    Ok(ControlOutput {
        tau: &tau_task + &tau_null,
        tau_task,
        tau_null,
        f_cartesian: *f,
        damped: inertias.damped,
    })
}

fn spd_inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| symmetrize(c.inverse()))
        .ok_or(Error::NotPositiveDefinite(what))
}

fn spd_inverse6(m: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    m.cholesky()
        .map(|c| {
            let inv = c.inverse();
            (inv + inv.transpose()) * 0.5
        })
        .ok_or(Error::NotPositiveDefinite("task-space inverse inertia"))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn to_matrix6(m: &DMatrix<f64>) -> Matrix6<f64> {
    Matrix6::from_fn(|r, c| m[(r, c)])
}

fn from_matrix6(m: &Matrix6<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(6, 6, |r, c| m[(r, c)])
}
