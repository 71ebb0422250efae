use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{KinematicChain, Link};
use crate::base::BaseAdmittanceParams;
use crate::error::{Error, Result};

/// Rigid transform as translation (m) plus roll-pitch-yaw (rad, fixed-axis XYZ).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub translation: [f64; 3],
    pub rpy: [f64; 3],
}

impl TransformConfig {
    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            translation: [x, y, z],
            rpy: [0.0; 3],
        }
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        let [r, p, y] = self.rpy;
        Isometry3::from_parts(
            Translation3::from(Vector3::from(self.translation)),
            UnitQuaternion::from_euler_angles(r, p, y),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    #[serde(default)]
    pub origin: TransformConfig,
    pub axis: [f64; 3],
    pub mass: f64,
    #[serde(default)]
    pub com: [f64; 3],
    /// `[ixx, iyy, izz, ixy, ixz, iyz]` about the center of mass.
    pub inertia: [f64; 6],
}

impl LinkConfig {
    fn build(&self, index: usize) -> Result<Link> {
        let axis = Vector3::from(self.axis);
        if axis.iter().any(|a| !a.is_finite()) || axis.norm() < 1e-12 {
            return Err(Error::InvalidChain(format!("link {index} has a degenerate axis")));
        }
        let [ixx, iyy, izz, ixy, ixz, iyz] = self.inertia;
        Ok(Link {
            origin: self.origin.to_isometry(),
            axis: Unit::new_normalize(axis),
            mass: self.mass,
            com: Vector3::from(self.com),
            inertia: Matrix3::new(ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz),
        })
    }
}

/// File representation of a [`KinematicChain`] (TOML, SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default)]
    pub base: BaseAdmittanceParams,
    #[serde(default)]
    pub ee_offset: TransformConfig,
    pub links: Vec<LinkConfig>,
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self::default_arm()
    }
}

impl ChainConfig {
    pub fn build(&self) -> Result<KinematicChain> {
        let links = self
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| l.build(i + 1))
            .collect::<Result<Vec<_>>>()?;
        KinematicChain::new(
            links,
            Vector3::from(self.gravity),
            self.ee_offset.to_isometry(),
            self.base,
        )
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(origin, text, &e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Seven revolute joints with alternating vertical/horizontal axes, mounted
    /// 0.35 m above and 0.2 m ahead of the platform center.
    pub fn default_arm() -> Self {
        let link = |origin: TransformConfig, axis: [f64; 3], mass: f64, com: [f64; 3], diag: [f64; 3]| {
            LinkConfig {
                origin,
                axis,
                mass,
                com,
                inertia: [diag[0], diag[1], diag[2], 0.0, 0.0, 0.0],
            }
        };
        const Z: [f64; 3] = [0.0, 0.0, 1.0];
        const Y: [f64; 3] = [0.0, 1.0, 0.0];
        Self {
            gravity: default_gravity(),
            base: BaseAdmittanceParams::default(),
            ee_offset: TransformConfig::translation(0.0, 0.0, 0.2),
            links: vec![
                link(TransformConfig::translation(0.2, 0.0, 0.683), Z, 4.0, [0.0, 0.0, -0.05], [0.04, 0.04, 0.02]),
                link(TransformConfig::default(), Y, 3.5, [0.0, -0.02, 0.15], [0.04, 0.04, 0.02]),
                link(TransformConfig::translation(0.0, 0.0, 0.316), Z, 3.0, [0.03, 0.0, 0.04], [0.03, 0.03, 0.02]),
                link(TransformConfig::translation(0.0825, 0.0, 0.0), Y, 2.5, [-0.04, 0.0, 0.15], [0.03, 0.03, 0.015]),
                link(TransformConfig::translation(-0.0825, 0.0, 0.384), Z, 2.0, [0.0, 0.03, -0.1], [0.025, 0.025, 0.015]),
                link(TransformConfig::default(), Y, 1.5, [0.04, 0.0, 0.0], [0.012, 0.012, 0.012]),
                link(
                    TransformConfig {
                        translation: [0.088, 0.0, 0.0],
                        rpy: [PI, 0.0, 0.0],
                    },
                    Z,
                    0.8,
                    [0.0, 0.0, 0.04],
                    [0.01, 0.01, 0.01],
                ),
            ],
        }
    }

    /// Two links along +x, rotating about y; centers of mass at mid-length.
    pub fn planar_two_link(l1: f64, l2: f64, m1: f64, m2: f64) -> Self {
        let rod = |m: f64, l: f64| {
            let i = m * l * l / 12.0;
            [1e-3 * m, i, i, 0.0, 0.0, 0.0]
        };
        Self {
            gravity: default_gravity(),
            base: BaseAdmittanceParams::default(),
            ee_offset: TransformConfig::translation(l2, 0.0, 0.0),
            links: vec![
                LinkConfig {
                    origin: TransformConfig::translation(0.0, 0.0, 0.5),
                    axis: [0.0, 1.0, 0.0],
                    mass: m1,
                    com: [l1 / 2.0, 0.0, 0.0],
                    inertia: rod(m1, l1),
                },
                LinkConfig {
                    origin: TransformConfig::translation(l1, 0.0, 0.0),
                    axis: [0.0, 1.0, 0.0],
                    mass: m2,
                    com: [l2 / 2.0, 0.0, 0.0],
                    inertia: rod(m2, l2),
                },
            ],
        }
    }
}

/// Convert a TOML deserialization error into a [`Error::Parse`] with a line number.
pub(crate) fn toml_error(origin: &str, text: &str, err: &toml::de::Error) -> Error {
    let line = err
        .span()
        .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::Parse {
        path: origin.to_string(),
        line,
        msg: err.message().to_string(),
    }
}
