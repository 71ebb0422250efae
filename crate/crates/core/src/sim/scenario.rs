use std::path::Path;

use nalgebra::{DVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::admittance::AdmittancePresets;
use crate::controller::{Compensation, ImpedanceGains, PriorityPresets, PriorityWeights};
use crate::error::{Error, Result};
use crate::hmi::{self, InterfaceState, PressEvent};
use crate::model::config::toml_error;
use crate::model::{ChainConfig, KinematicChain, BASE_DOFS};

/// One sample of the human wrench profile (world frame, applied at the EE).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrenchSample {
    pub t: f64,
    /// `[fx, fy, fz, mx, my, mz]`
    pub w: [f64; 6],
}

/// Impedance gains as written in a scenario; omitted entries take defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainsConfig {
    pub k_cart: Option<[f64; 6]>,
    /// Defaults to critical damping `2√(k Λ_ii)` at the posture.
    pub d_cart: Option<[f64; 6]>,
    pub k_joint: Option<Vec<f64>>,
    pub d_joint: Option<Vec<f64>>,
    /// Posture reference; defaults to the initial configuration.
    pub q_0: Option<Vec<f64>>,
}

impl GainsConfig {
    /// All gains zero.
    pub fn zero(dofs: usize) -> Self {
        Self {
            k_cart: Some([0.0; 6]),
            d_cart: Some([0.0; 6]),
            k_joint: Some(vec![0.0; dofs]),
            d_joint: Some(vec![0.0; dofs]),
            q_0: None,
        }
    }

    pub fn resolve(&self, chain: &KinematicChain, q_init: &DVector<f64>) -> Result<ImpedanceGains> {
        let vector = |what: &str, v: &[f64]| {
            if v.len() != chain.dofs() {
                return Err(Error::Config(format!(
                    "gains.{what} has {} entries, chain has {} joints",
                    v.len(),
                    chain.dofs()
                )));
            }
            Ok(DVector::from_column_slice(v))
        };
        let q_0 = match &self.q_0 {
            Some(v) => vector("q_0", v)?,
            None => q_init.clone(),
        };
        // the default damping needs the task inertia, so only compute it
        // when no damping is given
        let mut gains = match self.d_cart {
            Some(d) => ImpedanceGains::default_with_damping(chain.dofs(), q_0.clone(), Vector6::from(d)),
            None => ImpedanceGains::default_for(chain, &q_0)?,
        };
        if let Some(k) = self.k_cart {
            if self.d_cart.is_none() {
                // keep critical damping consistent with the overridden stiffness
                gains.d_cart = Vector6::from_fn(|i, _| gains.d_cart[i] * (k[i] / gains.k_cart[i]).sqrt());
            }
            gains.k_cart = Vector6::from(k);
        }
        if let Some(v) = &self.k_joint {
            gains.k_joint = vector("k_joint", v)?;
        }
        if let Some(v) = &self.d_joint {
            gains.d_joint = vector("d_joint", v)?;
        }
        gains.validate(chain.dofs())?;
        Ok(gains)
    }
}

/// A complete simulation setup, as loaded from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    /// Simulated time (s).
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    /// Uniform perturbation (rad or m) added to every joint of `q_init`,
    /// drawn from `seed`.
    #[serde(default)]
    pub initial_jitter: f64,
    #[serde(default)]
    pub chain: ChainConfig,
    pub q_init: Vec<f64>,
    #[serde(default)]
    pub qd_init: Option<Vec<f64>>,
    #[serde(default)]
    pub gains: GainsConfig,
    #[serde(default)]
    pub compensation: Compensation,
    #[serde(default)]
    pub priority: PriorityPresets,
    #[serde(default)]
    pub admittance: AdmittancePresets,
    #[serde(default)]
    pub interface: InterfaceState,
    /// Attached to the last link while the gripper is closed.
    #[serde(default)]
    pub payload_mass: f64,
    /// Feed `f_m = f_h − F` to the admittance instead of `f_m = f_h`.
    #[serde(default)]
    pub subtract_controller_force: bool,
    #[serde(default)]
    pub buttons: Vec<PressEvent>,
    /// Press script (`<time_s> <button_id>` lines) appended to `buttons`
    /// by [`Scenario::load`], relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub button_script: Option<String>,
    #[serde(default)]
    pub wrench: Vec<WrenchSample>,
    /// Target EE path (m); scored from `path_start` on.
    #[serde(default)]
    pub path: Vec<[f64; 3]>,
    #[serde(default)]
    pub path_start: f64,
}

impl Scenario {
    /// A scenario holding `q_init` for `duration` seconds with defaults
    /// everywhere else.
    pub fn hold(q_init: &DVector<f64>, duration: f64) -> Self {
        Self {
            name: "hold".into(),
            duration,
            seed: 0,
            initial_jitter: 0.0,
            chain: ChainConfig::default_arm(),
            q_init: q_init.iter().copied().collect(),
            qd_init: None,
            gains: GainsConfig::default(),
            compensation: Compensation::default(),
            priority: PriorityPresets::default(),
            admittance: AdmittancePresets::default(),
            interface: InterfaceState::default(),
            payload_mass: 0.0,
            subtract_controller_force: false,
            buttons: Vec::new(),
            button_script: None,
            wrench: Vec::new(),
            path: Vec::new(),
            path_start: 0.0,
        }
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(origin, text, &e))
    }

    /// Load a scenario file. A top-level `button_script = "<file>"` entry is
    /// resolved relative to the scenario and appended to `buttons`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let origin = path.display().to_string();
        let mut scenario = Self::from_toml_str(&text, &origin)?;
        if let Some(rel) = scenario.button_script.take() {
            let dir = path.parent().unwrap_or(Path::new("."));
            scenario.buttons.extend(hmi::load_press_script(&dir.join(rel))?);
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Config(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.payload_mass >= 0.0 && self.payload_mass.is_finite()) {
            return Err(Error::Config(format!(
                "payload_mass must be >= 0, got {}",
                self.payload_mass
            )));
        }
        if !(self.initial_jitter >= 0.0 && self.initial_jitter.is_finite()) {
            return Err(Error::Config("initial_jitter must be >= 0".into()));
        }
        let chain = self.chain.build()?;
        let n = chain.dofs();
        if self.q_init.len() != n {
            return Err(Error::Config(format!(
                "q_init has {} entries, chain has {n} joints",
                self.q_init.len()
            )));
        }
        if let Some(qd) = &self.qd_init {
            if qd.len() != n {
                return Err(Error::Config(format!(
                    "qd_init has {} entries, chain has {n} joints",
                    qd.len()
                )));
            }
        }
        self.gains
            .resolve(&chain, &DVector::from_column_slice(&self.q_init))?;
        self.priority.validate()?;
        self.admittance.validate()?;
        self.interface.validate()?;
        for pair in self.wrench.windows(2) {
            if pair[1].t < pair[0].t {
                return Err(Error::Config(format!(
                    "wrench profile times must be sorted ({} after {})",
                    pair[1].t, pair[0].t
                )));
            }
        }
        if self.wrench.iter().any(|s| !s.t.is_finite() || s.w.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config("wrench profile has non-finite entries".into()));
        }
        for pair in self.buttons.windows(2) {
            if pair[1].t < pair[0].t {
                return Err(Error::Config("button presses must be sorted by time".into()));
            }
        }
        if let Some(e) = self.buttons.iter().find(|e| !(1..=4).contains(&e.id)) {
            return Err(Error::InvalidButton(e.id));
        }
        Ok(())
    }

    /// Human wrench at `t`: linear between samples, held outside the profile,
    /// zero for an empty profile.
    pub fn wrench_at(&self, t: f64) -> Vector6<f64> {
        let Some(first) = self.wrench.first() else {
            return Vector6::zeros();
        };
        let last = self.wrench.last().expect("non-empty");
        if t <= first.t {
            return Vector6::from(first.w);
        }
        if t >= last.t {
            return Vector6::from(last.w);
        }
        let k = self.wrench.partition_point(|s| s.t <= t);
        let (a, b) = (&self.wrench[k - 1], &self.wrench[k]);
        let s = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 1.0 };
        Vector6::from(a.w) * (1.0 - s) + Vector6::from(b.w) * s
    }

    /// Priority weights for the configured initial mode.
    pub fn initial_weights(&self) -> Result<PriorityWeights> {
        self.priority.weights(self.interface.priority_mode)
    }

    /// Apply a `key=value` override. Keys are dotted paths into the scenario
    /// (`gains.k_cart.0`, `interface.admittance_level`); `eta_b` and `eta_a`
    /// address the preset of the initial priority mode. Values are TOML
    /// literals; anything that does not parse as one is taken as a string.
    pub fn apply_override(&self, assignment: &str) -> Result<Self> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let mode = match self.interface.priority_mode {
            crate::controller::PriorityMode::Manipulation => "manipulation",
            crate::controller::PriorityMode::Locomotion => "locomotion",
        };
        let path: Vec<String> = match key {
            "eta_b" | "eta_a" => vec!["priority".into(), mode.into(), key.into()],
            _ => key.split('.').map(str::to_string).collect(),
        };
        if path.iter().any(String::is_empty) {
            return Err(Error::Config(format!("override key `{key}` is malformed")));
        }
        let value = parse_literal(raw);
        let mut root = toml::Value::try_from(self)
            .map_err(|e| Error::Config(format!("cannot serialize scenario: {e}")))?;
        set_path(&mut root, &path, value).map_err(|msg| Error::Config(format!("override `{key}`: {msg}")))?;
        let out: Scenario = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("override `{key}`: {}", e.message())))?;
        out.validate()?;
        Ok(out)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_path(node: &mut toml::Value, path: &[String], value: toml::Value) -> Result<(), String> {
    let (head, rest) = path.split_first().expect("non-empty path");
    match node {
        toml::Value::Table(table) => {
            if rest.is_empty() {
                if let (Some(old), toml::Value::Integer(i)) = (table.get(head), &value) {
                    // `k=5` for a float field
                    if old.is_float() {
                        table.insert(head.clone(), toml::Value::Float(*i as f64));
                        return Ok(());
                    }
                }
                table.insert(head.clone(), value);
                return Ok(());
            }
            let child = table
                .entry(head.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            set_path(child, rest, value)
        }
        toml::Value::Array(items) => {
            let idx: usize = head
                .parse()
                .map_err(|_| format!("`{head}` is not an array index"))?;
            let len = items.len();
            let slot = items
                .get_mut(idx)
                .ok_or_else(|| format!("index {idx} out of range (length {len})"))?;
            if rest.is_empty() {
                *slot = match (&*slot, value) {
                    (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                    (_, v) => v,
                };
                Ok(())
            } else {
                set_path(slot, rest, value)
            }
        }
        _ => Err(format!("`{head}` addresses into a scalar")),
    }
}

/// Fixed posture of the default arm used by the bundled scenarios: tool
/// about 0.83 m ahead of the platform center at 1 m height, pointing forward.
pub fn default_posture() -> DVector<f64> {
    let mut q = DVector::zeros(BASE_DOFS + 7);
    let arm = [0.0, -0.1, 0.0, 2.1, 0.0, 2.7, 0.785];
    q.rows_mut(BASE_DOFS, 7).copy_from_slice(&arm);
    q
}
