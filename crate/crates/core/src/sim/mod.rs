//! Deterministic multi-rate closed-loop simulation of the whole system.

mod bundled;
mod output;
mod phases;
mod run;
mod scenario;

pub use bundled::{bundled_scenario, BUNDLED_NAMES, PHASE1_TOML, PHASE2_TOML};
pub use output::{
    distance_to_path, path_rms_error, summarize, trace_columns, write_trace_csv,
    write_trace_csv_columns, EffectiveConfig, FinalPose, Summary,
};
pub use phases::{scripted_phase1, scripted_phase2, PhaseOptions};
pub use run::{initial_state, run, EventKind, SimEvent, SimRecord, SimTrace, CONTROL_PERIOD};
pub use scenario::{default_posture, GainsConfig, Scenario, WrenchSample};
