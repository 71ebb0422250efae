//! Trace CSV and run summary.
//!
//! CSV columns, in order:
//!
//! ```text
//! t,
//! q0..q{n-1}, qd0..qd{n-1},                 (base x, y, yaw first)
//! ee_x, ee_y, ee_z, ee_qw, ee_qx, ee_qy, ee_qz,
//! ee_vx, ee_vy, ee_vz, ee_wx, ee_wy, ee_wz,
//! tau0..tau{n-1},
//! fm_fx, fm_fy, fm_fz, fm_mx, fm_my, fm_mz,
//! F_fx, F_fy, F_fz, F_mx, F_my, F_mz,
//! xd_x, xd_y, xd_z,
//! adm_active, adm_level, gripper_closed, mode,   (mode: 0 manipulation, 1 locomotion)
//! base_cmd_x, base_cmd_y, base_cmd_yaw
//! ```

use std::io::Write;

use nalgebra::Vector3;
use serde::Serialize;

use super::run::{SimEvent, SimTrace};
use super::scenario::Scenario;
use crate::controller::{EtaPair, PriorityMode};
use crate::error::{Error, Result};
use crate::hmi;

pub fn trace_columns(dofs: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    let indexed = |prefix: &'static str| (0..dofs).map(move |i| format!("{prefix}{i}"));
    cols.extend(indexed("q"));
    cols.extend(indexed("qd"));
    let fixed = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    cols.extend(fixed(&["ee_x", "ee_y", "ee_z", "ee_qw", "ee_qx", "ee_qy", "ee_qz"]));
    cols.extend(fixed(&["ee_vx", "ee_vy", "ee_vz", "ee_wx", "ee_wy", "ee_wz"]));
    cols.extend(indexed("tau"));
    cols.extend(fixed(&["fm_fx", "fm_fy", "fm_fz", "fm_mx", "fm_my", "fm_mz"]));
    cols.extend(fixed(&["F_fx", "F_fy", "F_fz", "F_mx", "F_my", "F_mz"]));
    cols.extend(fixed(&["xd_x", "xd_y", "xd_z"]));
    cols.extend(fixed(&["adm_active", "adm_level", "gripper_closed", "mode"]));
    cols.extend(fixed(&["base_cmd_x", "base_cmd_y", "base_cmd_yaw"]));
    cols
}

pub fn write_trace_csv<W: Write>(trace: &SimTrace, out: W) -> Result<()> {
    write_trace_csv_columns(trace, &[], out)
}

/// Write only `columns`, in the given order; an empty list selects all.
pub fn write_trace_csv_columns<W: Write>(trace: &SimTrace, columns: &[String], out: W) -> Result<()> {
    let all = trace_columns(trace.dofs);
    let picked: Vec<usize> = if columns.is_empty() {
        (0..all.len()).collect()
    } else {
        columns
            .iter()
            .map(|c| {
                all.iter().position(|a| a == c).ok_or_else(|| {
                    Error::Config(format!("unknown trace column `{c}` (available: {})", all.join(", ")))
                })
            })
            .collect::<Result<_>>()?
    };
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Config(format!("writing trace: {e}"));
    w.write_record(picked.iter().map(|&i| &all[i])).map_err(csv_err)?;
    let mut row: Vec<f64> = Vec::with_capacity(all.len());
    for r in &trace.records {
        row.clear();
        row.push(r.t);
        row.extend(r.q.iter());
        row.extend(r.qd.iter());
        row.extend(r.ee_position.iter());
        let q = r.ee_orientation.quaternion();
        row.extend([q.w, q.i, q.j, q.k]);
        row.extend(r.ee_twist.iter());
        row.extend(r.tau.iter());
        row.extend(r.f_m.iter());
        row.extend(r.f_cartesian.iter());
        row.extend(r.x_d.iter());
        row.extend(hmi::encode(&r.interface, r.t).values.map(f64::from));
        row.extend(r.base_command.iter());
        w.write_record(picked.iter().map(|&i| row[i].to_string()))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Distance from `p` to the polyline through `path`.
pub fn distance_to_path(p: &Vector3<f64>, path: &[[f64; 3]]) -> f64 {
    match path {
        [] => f64::NAN,
        [only] => (p - Vector3::from(*only)).norm(),
        _ => path
            .windows(2)
            .map(|seg| {
                let a = Vector3::from(seg[0]);
                let b = Vector3::from(seg[1]);
                let ab = b - a;
                let s = if ab.norm_squared() > 0.0 {
                    ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (p - (a + ab * s)).norm()
            })
            .fold(f64::INFINITY, f64::min),
    }
}

/// RMS distance of the EE to the scenario path from `path_start` on.
pub fn path_rms_error(scenario: &Scenario, trace: &SimTrace) -> Option<f64> {
    if scenario.path.is_empty() {
        return None;
    }
    let d: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| r.t >= scenario.path_start)
        .map(|r| distance_to_path(&r.ee_position, &scenario.path))
        .collect();
    if d.is_empty() {
        return None;
    }
    Some((d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct FinalPose {
    pub t: f64,
    pub position: [f64; 3],
    /// `[w, x, y, z]`
    pub orientation: [f64; 4],
    pub base: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveConfig {
    pub mode: PriorityMode,
    pub eta_b: f64,
    pub eta_a: f64,
    pub manipulation: EtaPair,
    pub locomotion: EtaPair,
    pub admittance_level: u8,
    pub payload_mass: f64,
    pub k_cart: [f64; 6],
    pub d_cart: [f64; 6],
    pub gravity_compensation: bool,
    pub coriolis_compensation: bool,
    pub subtract_controller_force: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub duration: f64,
    pub samples: usize,
    pub truncated: Option<String>,
    pub final_pose: Option<FinalPose>,
    pub path_rms_error: Option<f64>,
    pub button_sequence: Vec<u8>,
    pub events: Vec<SimEvent>,
    pub effective_config: EffectiveConfig,
}

pub fn summarize(scenario: &Scenario, trace: &SimTrace) -> Result<Summary> {
    let chain = scenario.chain.build()?;
    let gains = scenario
        .gains
        .resolve(&chain, &nalgebra::DVector::from_column_slice(&scenario.q_init))?;
    let weights = scenario.initial_weights()?;
    let final_pose = trace.last().map(|r| {
        let q = r.ee_orientation.quaternion();
        FinalPose {
            t: r.t,
            position: [r.ee_position.x, r.ee_position.y, r.ee_position.z],
            orientation: [q.w, q.i, q.j, q.k],
            base: [r.q[0], r.q[1], r.q[2]],
        }
    });
    Ok(Summary {
        name: scenario.name.clone(),
        duration: scenario.duration,
        samples: trace.records.len(),
        truncated: trace.truncated.clone(),
        final_pose,
        path_rms_error: path_rms_error(scenario, trace),
        button_sequence: trace.button_sequence(),
        events: trace.events.clone(),
        effective_config: EffectiveConfig {
            mode: weights.mode,
            eta_b: weights.eta_b,
            eta_a: weights.eta_a,
            manipulation: scenario.priority.manipulation,
            locomotion: scenario.priority.locomotion,
            admittance_level: scenario.interface.admittance_level,
            payload_mass: scenario.payload_mass,
            k_cart: gains.k_cart.into(),
            d_cart: gains.d_cart.into(),
            gravity_compensation: scenario.compensation.gravity,
            coriolis_compensation: scenario.compensation.coriolis,
            subtract_controller_force: scenario.subtract_controller_force,
            seed: scenario.seed,
        },
    })
}
