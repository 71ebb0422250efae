#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wbctl_core::model::{jacobian_ee, JointState, KinematicChain};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_q(chain: &KinematicChain, rng: &mut impl Rng) -> DVector<f64> {
    let pi = std::f64::consts::PI;
    DVector::from_fn(chain.dofs(), |i, _| match i {
        0 | 1 => rng.random_range(-2.0..2.0),
        _ => rng.random_range(-pi..pi),
    })
}

pub fn random_state(chain: &KinematicChain, rng: &mut impl Rng) -> JointState {
    let q = random_q(chain, rng);
    let qd = DVector::from_fn(chain.dofs(), |_, _| rng.random_range(-1.5..1.5));
    JointState { q, qd }
}

/// Random state whose task Jacobian keeps its smallest singular value
/// above `min_sv`.
pub fn full_rank_state(chain: &KinematicChain, rng: &mut impl Rng, min_sv: f64) -> JointState {
    loop {
        let s = random_state(chain, rng);
        let sv = jacobian_ee(chain, &s).unwrap().svd(false, false).singular_values.min();
        if sv > min_sv {
            return s;
        }
    }
}

/// One subject's row of the muscle-activation table: means and maxima with
/// and without assistance, and the printed reductions.
#[derive(Debug, Clone, Copy)]
pub struct MuscleRow {
    pub mean_with: f64,
    pub max_with: f64,
    pub mean_without: f64,
    pub max_without: f64,
    pub delta_mean: f64,
    pub delta_max: f64,
}

const fn row(v: [f64; 6]) -> MuscleRow {
    MuscleRow {
        mean_with: v[0],
        max_with: v[1],
        mean_without: v[2],
        max_without: v[3],
        delta_mean: v[4],
        delta_max: v[5],
    }
}

/// Anterior deltoid, subjects S1–S6, as printed.
pub const DELTOID: [MuscleRow; 6] = [
    row([7.17, 30.42, 20.37, 35.92, 64.80, 15.31]),
    row([19.68, 42.83, 31.84, 57.34, 38.19, 25.30]),
    row([29.89, 62.87, 37.87, 96.38, 21.07, 34.77]),
    row([33.48, 65.46, 67.5, 100.0, 50.40, 34.54]),
    row([12.96, 33.57, 26.3, 55.82, 50.72, 39.86]),
    row([18.63, 38.98, 44.41, 100.0, 58.05, 61.02]),
];

/// Biceps, subjects S1–S6, as printed.
pub const BICEPS: [MuscleRow; 6] = [
    row([7.48, 22.59, 19.72, 26.60, 62.07, 15.07]),
    row([10.78, 21.10, 23.62, 48.44, 54.36, 35.80]),
    row([9.53, 24.78, 17.60, 66.39, 45.85, 62.67]),
    row([3.75, 21.20, 10.62, 30.00, 64.67, 29.33]),
    row([2.48, 9.67, 22.98, 45.89, 89.21, 78.93]),
    row([3.10, 16.10, 15.04, 40.36, 79.39, 60.11]),
];

/// Printed across-subject `mean (std)` of ΔAD mean, ΔAD max, ΔBC mean, ΔBC max.
pub const DELTA_SUMMARY: [(f64, f64); 4] = [(47.21, 15.58), (35.13, 15.38), (65.93, 15.98), (46.99, 24.06)];
