//! Generators for the two-phase carry-and-paint task.

use nalgebra::Vector3;

use super::scenario::{default_posture, Scenario, WrenchSample};
use super::run::initial_state;
use crate::controller::PriorityMode;
use crate::error::Result;
use crate::hmi::{InterfaceState, PressEvent};
use crate::model::forward_kinematics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Tool mass picked up by the gripper (kg).
    pub payload_mass: f64,
    /// Guiding force during transport (N, along +x).
    pub push_force: f64,
    /// Time the guiding force is held (s).
    pub push_duration: f64,
    /// EE speed along the wall paths (m/s).
    pub path_speed: f64,
    /// Length of each horizontal wall path (m).
    pub path_length: f64,
    /// Vertical spacing between the two wall paths (m).
    pub path_spacing: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            payload_mass: 1.5,
            push_force: 15.0,
            push_duration: 3.0,
            path_speed: 0.1,
            path_length: 0.3,
            path_spacing: 0.15,
        }
    }
}

const RAMP: f64 = 0.2;
const SETTLE: f64 = 1.5;

fn press(t: f64, id: u8) -> PressEvent {
    PressEvent { t, id }
}

fn sample(t: f64, f: Vector3<f64>) -> WrenchSample {
    WrenchSample {
        t,
        w: [f.x, f.y, f.z, 0.0, 0.0, 0.0],
    }
}

/// Activate the admittance, close the gripper on the tool, switch to
/// locomotion, then guide the robot forward by pushing on the handle.
pub fn scripted_phase1(opts: &PhaseOptions) -> Scenario {
    let mut s = Scenario::hold(&default_posture(), 0.0);
    s.name = "phase1".into();
    s.payload_mass = opts.payload_mass;
    s.interface = InterfaceState::default();
    s.buttons = vec![press(0.5, 1), press(1.0, 3), press(1.5, 4)];
    let push = Vector3::new(opts.push_force, 0.0, 0.0);
    let t0 = 2.0;
    let t1 = t0 + RAMP + opts.push_duration;
    s.wrench = vec![
        sample(t0, Vector3::zeros()),
        sample(t0 + RAMP, push),
        sample(t1, push),
        sample(t1 + RAMP, Vector3::zeros()),
    ];
    s.duration = t1 + RAMP + 2.5;
    s
}

/// Start where phase 1 ends (admittance on, tool held, locomotion), switch
/// to manipulation and paint two horizontal wall paths, each back and forth.
pub fn scripted_phase2(opts: &PhaseOptions) -> Result<Scenario> {
    let mut s = Scenario::hold(&default_posture(), 0.0);
    s.name = "phase2".into();
    s.payload_mass = opts.payload_mass;
    s.interface = InterfaceState {
        admittance_active: true,
        admittance_level: 0,
        gripper_closed: true,
        priority_mode: PriorityMode::Locomotion,
    };
    s.buttons = vec![press(0.5, 4)];

    let chain = s.chain.build()?.with_payload(s.payload_mass)?;
    let p0 = forward_kinematics(&chain, &initial_state(&s)?)?.position;
    let along = Vector3::new(0.0, opts.path_length, 0.0);
    let down = Vector3::new(0.0, 0.0, -opts.path_spacing);
    let a0 = p0;
    let a1 = p0 + along;
    let b0 = p0 + down;
    let b1 = b0 + along;
    let waypoints = [a0, a1, a0, b0, b1, b0];

    // Force proportional to the intended velocity through the admittance
    // damping, so the reference covers exactly each segment.
    let damping = s.admittance.level(s.interface.admittance_level).d_d[0];
    let mut t = 1.0;
    s.path_start = t;
    for pair in waypoints.windows(2) {
        s.wrench.push(sample(t, Vector3::zeros()));
        let delta = pair[1] - pair[0];
        let length = delta.norm();
        let f = delta / length * opts.path_speed * damping;
        let cruise = length / opts.path_speed - RAMP;
        s.wrench.push(sample(t + RAMP, f));
        s.wrench.push(sample(t + RAMP + cruise, f));
        s.wrench.push(sample(t + 2.0 * RAMP + cruise, Vector3::zeros()));
        t += 2.0 * RAMP + cruise + SETTLE;
    }
    s.path = waypoints.iter().map(|p| [p.x, p.y, p.z]).collect();
    s.duration = t;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase1_button_sequence() {
        let s = scripted_phase1(&PhaseOptions::default());
        let ids: Vec<u8> = s.buttons.iter().map(|b| b.id).collect();
        assert_eq!(ids, [1, 3, 4]);
        s.validate().unwrap();
        // guidance starts only once the mode switch is through
        assert!(s.wrench[0].t > s.buttons[2].t);
    }

    #[test]
    fn phase2_paths_are_traversed_back_and_forth() {
        let s = scripted_phase2(&PhaseOptions::default()).unwrap();
        s.validate().unwrap();
        let p: Vec<Vector3<f64>> = s.path.iter().map(|p| Vector3::from(*p)).collect();
        assert_eq!(p.len(), 6);
        // first path: out and back
        assert_eq!(p[0], p[2]);
        assert!((p[1] - p[0]).norm() > 0.1);
        // second path: out and back, offset from the first
        assert_eq!(p[3], p[5]);
        assert!((p[4] - p[3]).norm() > 0.1);
        assert!((p[3] - p[0]).norm() > 0.1);
    }

    #[test]
    fn phase2_profile_integrates_to_segment_lengths() {
        let opts = PhaseOptions::default();
        let s = scripted_phase2(&opts).unwrap();
        let d = s.admittance.level(0).d_d[0];
        // ∫ f / D dt over the profile is the first-to-last waypoint displacement
        let mut disp = Vector3::zeros();
        for pair in s.wrench.windows(2) {
            let dt = pair[1].t - pair[0].t;
            let fa = Vector3::new(pair[0].w[0], pair[0].w[1], pair[0].w[2]);
            let fb = Vector3::new(pair[1].w[0], pair[1].w[1], pair[1].w[2]);
            disp += (fa + fb) * 0.5 * dt / d;
        }
        let expected = Vector3::from(s.path[5]) - Vector3::from(s.path[0]);
        assert!((disp - expected).norm() < 1e-9);
    }
}
