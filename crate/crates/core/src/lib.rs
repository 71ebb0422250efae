//! Whole-body impedance control of a mobile manipulator guided through an
//! admittance interface.
//!
//! * [`model`]: kinematics and rigid-body dynamics of a planar base carrying a
//!   serial arm.
//! * [`controller`]: priority-weighted whole-body Cartesian impedance torques.
//! * [`admittance`] and [`base`]: the end-effector and platform admittances.
//! * [`hmi`]: the four-button interface board and its wire protocol.
//! * [`sim`]: a deterministic multi-rate closed-loop simulator.
//! * [`analysis`]: cross-correlation, EMG envelopes and reduction statistics.

pub mod admittance;
pub mod analysis;
pub mod base;
pub mod controller;
pub mod error;
pub mod hmi;
pub mod model;
pub mod selftest;
pub mod sim;

pub use analysis::{CorrelationResult, SignalSeries};
pub use controller::{PriorityMode, PriorityWeights};
pub use error::{Error, Frame, Result};
pub use hmi::InterfaceState;
pub use model::{JointState, KinematicChain, SpatialState};
pub use sim::{Scenario, SimTrace};
