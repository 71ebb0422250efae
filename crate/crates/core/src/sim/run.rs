use nalgebra::{DVector, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::admittance::{self, AdmittanceState, WrenchReading};
use crate::base::{self, BaseVelocityCommand, BASE_PERIOD};
use crate::controller::{compute_torques_with, ImpedanceGains, PriorityMode, PriorityWeights};
use crate::error::{Error, Frame, Result};
use crate::hmi::{self, InterfaceState, MessageQueue, DEBOUNCE_WINDOW, LOOP_RATE_HZ};
use crate::model::{
    bias_forces, forward_kinematics, gravity_vector, jacobian_ee, mass_matrix, JointState,
    KinematicChain, BASE_DOFS,
};

/// Controller / arm integration step (1 kHz).
pub const CONTROL_PERIOD: f64 = 0.001;
/// Controller ticks per base update.
const BASE_DIVIDER: usize = 20;
/// Controller ticks per interface-board tick.
const HMI_DIVIDER: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub ee_position: Vector3<f64>,
    pub ee_orientation: UnitQuaternion<f64>,
    pub ee_twist: Vector6<f64>,
    pub tau: DVector<f64>,
    /// Wrench fed to the admittance.
    pub f_m: Vector6<f64>,
    /// Cartesian impedance force.
    pub f_cartesian: Vector6<f64>,
    pub x_d: Vector3<f64>,
    pub interface: InterfaceState,
    /// Velocity command currently held by the base.
    pub base_command: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Button { id: u8 },
    AdmittanceOn,
    AdmittanceOff,
    LevelChanged { level: u8 },
    GripperClosed,
    GripperOpened,
    ModeChanged { mode: PriorityMode },
    Singularity { min_singular_value: f64 },
    NumericalFailure { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub records: Vec<SimRecord>,
    pub events: Vec<SimEvent>,
    /// Set when the run stopped early; describes why.
    pub truncated: Option<String>,
    /// Generalized coordinate count of the simulated chain.
    pub dofs: usize,
}

impl SimTrace {
    pub fn button_sequence(&self) -> Vec<u8> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Button { id } => Some(id),
                _ => None,
            })
            .collect()
    }

    pub fn last(&self) -> Option<&SimRecord> {
        self.records.last()
    }
}

/// Initial configuration after applying the seeded jitter.
pub fn initial_state(scenario: &Scenario) -> Result<JointState> {
    let mut q = DVector::from_column_slice(&scenario.q_init);
    if scenario.initial_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        for v in q.iter_mut() {
            *v += rng.random_range(-scenario.initial_jitter..=scenario.initial_jitter);
        }
    }
    let qd = match &scenario.qd_init {
        Some(v) => DVector::from_column_slice(v),
        None => DVector::zeros(q.len()),
    };
    JointState::new(q, qd)
}

struct Loop<'a> {
    scenario: &'a Scenario,
    bare: KinematicChain,
    chain: KinematicChain,
    gains: ImpedanceGains,
    weights: PriorityWeights,
    interface: InterfaceState,
    state: JointState,
    x_d: AdmittanceState,
    base_cmd: BaseVelocityCommand,
    events: Vec<SimEvent>,
}

impl Loop<'_> {
    fn apply_interface(&mut self, t: f64, next: InterfaceState) -> Result<()> {
        let prev = self.interface;
        if next.admittance_active != prev.admittance_active {
            // (re)anchor the reference at the current pose either way
            let x = forward_kinematics(&self.chain, &self.state)?;
            self.x_d = AdmittanceState::hold(&x.pose());
            let kind = if next.admittance_active {
                EventKind::AdmittanceOn
            } else {
                EventKind::AdmittanceOff
            };
            self.events.push(SimEvent { t, kind });
        }
        if next.admittance_level != prev.admittance_level {
            self.events.push(SimEvent {
                t,
                kind: EventKind::LevelChanged {
                    level: next.admittance_level,
                },
            });
        }
        if next.gripper_closed != prev.gripper_closed {
            self.chain = if next.gripper_closed {
                self.bare.with_payload(self.scenario.payload_mass)?
            } else {
                self.bare.clone()
            };
            let kind = if next.gripper_closed {
                EventKind::GripperClosed
            } else {
                EventKind::GripperOpened
            };
            self.events.push(SimEvent { t, kind });
        }
        if next.priority_mode != prev.priority_mode {
            self.weights = self.scenario.priority.weights(next.priority_mode)?;
            self.events.push(SimEvent {
                t,
                kind: EventKind::ModeChanged {
                    mode: next.priority_mode,
                },
            });
        }
        self.interface = next;
        Ok(())
    }

    /// Semi-implicit Euler on the arm; the base integrates its held command.
    fn integrate(&mut self, tau: &DVector<f64>, f_h: &Vector6<f64>, dt: f64) -> Result<()> {
        let n = self.chain.arm_dofs();
        let m = mass_matrix(&self.chain, &self.state)?;
        let c = bias_forces(&self.chain, &self.state)?;
        let g = gravity_vector(&self.chain, &self.state)?;
        let j = jacobian_ee(&self.chain, &self.state)?;
        let external = j.transpose() * DVector::from_column_slice(f_h.as_slice());
        let rhs = tau.rows(BASE_DOFS, n) + external.rows(BASE_DOFS, n)
            - c.rows(BASE_DOFS, n)
            - g.rows(BASE_DOFS, n);
        let m_a = m.view((BASE_DOFS, BASE_DOFS), (n, n)).into_owned();
        let qdd = m_a
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("arm mass matrix"))?
            .solve(&rhs);
        for i in 0..n {
            self.state.qd[BASE_DOFS + i] += qdd[i] * dt;
        }
        self.state.q += &self.state.qd * dt;
        if !self.state.q.iter().chain(self.state.qd.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("simulation state diverged".into()));
        }
        Ok(())
    }
}

/// Run the closed loop for the scenario's duration at 1 kHz.
///
/// Per tick: board messages (every 5 ms), human wrench, EE admittance,
/// whole-body controller, base admittance (every 20 ms, held in between),
/// then one integration step of the plant. A singular task Jacobian or a
/// numerical failure ends the trace early with a terminal event.
pub fn run(scenario: &Scenario) -> Result<SimTrace> {
    scenario.validate()?;
    let bare = scenario.chain.build()?;
    let state = initial_state(scenario)?;
    let gains = scenario
        .gains
        .resolve(&bare, &DVector::from_column_slice(&scenario.q_init))?;
    let interface = scenario.interface;
    let chain = if interface.gripper_closed {
        bare.with_payload(scenario.payload_mass)?
    } else {
        bare.clone()
    };
    let x0 = forward_kinematics(&chain, &state)?;
    let base_cmd = BaseVelocityCommand {
        qd_m: Vector3::new(state.qd[0], state.qd[1], state.qd[2]),
        stamp: 0.0,
    };

    let presses = hmi::debounce(&scenario.buttons, DEBOUNCE_WINDOW);
    let messages = hmi::poll_loop(interface, &presses, LOOP_RATE_HZ)?;
    let mut queue = MessageQueue::with_capacity(messages.len().max(1));
    let mut pending_ids = std::collections::VecDeque::new();
    for (msg, press) in messages.into_iter().zip(&presses) {
        queue
            .push(msg)
            .map_err(|_| Error::InvalidParameter("button queue overflow".into()))?;
        pending_ids.push_back(press.id);
    }

    let mut lp = Loop {
        scenario,
        weights: scenario.initial_weights()?,
        bare,
        chain,
        gains,
        interface,
        state,
        x_d: AdmittanceState::hold(&x0.pose()),
        base_cmd,
        events: Vec::new(),
    };

    let steps = (scenario.duration / CONTROL_PERIOD).round() as usize;
    let mut records = Vec::with_capacity(steps + 1);
    let mut f_prev = Vector6::zeros();
    let mut truncated = None;

    for k in 0..=steps {
        let t = k as f64 * CONTROL_PERIOD;
        if k % HMI_DIVIDER == 0 {
            for msg in queue.drain_until(t) {
                let next = hmi::decode(&msg)?;
                let id = pending_ids.pop_front().expect("one id per message");
                lp.events.push(SimEvent {
                    t,
                    kind: EventKind::Button { id },
                });
                lp.apply_interface(t, next)?;
            }
        }

        let f_h = scenario.wrench_at(t);
        let f_m = if scenario.subtract_controller_force {
            let a = WrenchReading::from_vector(&f_prev, Frame::EndEffector);
            let h = WrenchReading::from_vector(&f_h, Frame::EndEffector);
            admittance::measured_force(&h, &a)?.to_vector()
        } else {
            f_h
        };
        if lp.interface.admittance_active {
            let params = scenario.admittance.level(lp.interface.admittance_level);
            let reading = WrenchReading::from_vector(&f_m, Frame::EndEffector);
            lp.x_d = admittance::step(&lp.x_d, params, &reading, CONTROL_PERIOD)?;
        }

        let out = match compute_torques_with(
            &lp.chain,
            &lp.state,
            &lp.x_d,
            &lp.gains,
            &lp.weights,
            scenario.compensation,
        ) {
            Ok(out) => out,
            Err(e) => {
                let kind = match &e {
                    Error::Singular { min_singular_value } => EventKind::Singularity {
                        min_singular_value: *min_singular_value,
                    },
                    _ if e.is_numerical() => EventKind::NumericalFailure {
                        message: e.to_string(),
                    },
                    _ => return Err(e),
                };
                log::warn!("simulation stopped at t = {t}: {e}");
                lp.events.push(SimEvent { t, kind });
                truncated = Some(e.to_string());
                break;
            }
        };
        f_prev = out.f_cartesian;

        if k % BASE_DIVIDER == 0 {
            lp.base_cmd = base::step(&lp.base_cmd, &lp.chain.base, &out.base_torque(), BASE_PERIOD)?;
            lp.base_cmd.stamp = t;
        }
        for i in 0..BASE_DOFS {
            lp.state.qd[i] = lp.base_cmd.qd_m[i];
        }

        let x = forward_kinematics(&lp.chain, &lp.state)?;
        records.push(SimRecord {
            t,
            q: lp.state.q.clone(),
            qd: lp.state.qd.clone(),
            ee_position: x.position,
            ee_orientation: x.orientation,
            ee_twist: x.twist,
            tau: out.tau.clone(),
            f_m,
            f_cartesian: out.f_cartesian,
            x_d: lp.x_d.position,
            interface: lp.interface,
            base_command: lp.base_cmd.qd_m,
        });

        if k == steps {
            break;
        }
        if let Err(e) = lp.integrate(&out.tau, &f_h, CONTROL_PERIOD) {
            log::warn!("simulation stopped at t = {t}: {e}");
            lp.events.push(SimEvent {
                t,
                kind: EventKind::NumericalFailure {
                    message: e.to_string(),
                },
            });
            truncated = Some(e.to_string());
            break;
        }
    }

    Ok(SimTrace {
        records,
        events: lp.events,
        truncated,
        dofs: lp.chain.dofs(),
    })
}
