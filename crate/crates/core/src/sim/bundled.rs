//! Scenario files shipped with the crate.

use super::scenario::Scenario;
use crate::error::{Error, Result};

pub const PHASE1_TOML: &str = include_str!("../../scenarios/phase1.toml");
pub const PHASE2_TOML: &str = include_str!("../../scenarios/phase2.toml");

pub const BUNDLED_NAMES: [&str; 2] = ["phase1", "phase2"];

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let text = match name {
        "phase1" => PHASE1_TOML,
        "phase2" => PHASE2_TOML,
        other => {
            return Err(Error::Config(format!(
                "no bundled scenario `{other}` (available: {})",
                BUNDLED_NAMES.join(", ")
            )))
        }
    };
    let s = Scenario::from_toml_str(text, &format!("<bundled {name}>"))?;
    s.validate()?;
    Ok(s)
}
