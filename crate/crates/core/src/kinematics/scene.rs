//! Scene files: a world plus the arm that operates in it.
//!
//! ```json
//! {
//!   "name": "table",
//!   "obstacles": [
//!     { "type": "sphere", "center": [0.6, 0.0, 0.1], "radius": 0.1 },
//!     { "type": "box", "min": [0.3, -0.8, -0.05], "max": [1.2, 0.8, 0.0] }
//!   ],
//!   "arm": {
//!     "axes":    [[0, 0, 1], ...],
//!     "offsets": [[0, 0, 0.25], ...],
//!     "radii":   [0.06, ...],
//!     "limits":  [[-2.6, 2.6], ...]
//!   }
//! }
//! ```
//!
//! Unknown fields anywhere in the document are rejected.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::arm::{ArmSpec, Joint};
use super::collision::World;
use super::geometry::Primitive;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleDef {
    Sphere { center: [f64; 3], radius: f64 },
    Box { min: [f64; 3], max: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmDef {
    pub axes: Vec<[f64; 3]>,
    pub offsets: Vec<[f64; 3]>,
    pub radii: Vec<f64>,
    pub limits: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub name: String,
    pub obstacles: Vec<ObstacleDef>,
    pub arm: ArmDef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub world: World,
    pub arm: ArmSpec,
}

pub const BUILTIN_SCENES: [&str; 3] = ["shelf", "table", "clutter"];

const SHELF_JSON: &str = include_str!("../../scenes/shelf.json");
const TABLE_JSON: &str = include_str!("../../scenes/table.json");
const CLUTTER_JSON: &str = include_str!("../../scenes/clutter.json");

impl ArmDef {
    pub fn to_arm(&self) -> Result<ArmSpec> {
        let n = self.axes.len();
        if self.offsets.len() != n || self.radii.len() != n || self.limits.len() != n {
            return Err(Error::InvalidArm(format!(
                "arm arrays disagree: {} axes, {} offsets, {} radii, {} limits",
                n,
                self.offsets.len(),
                self.radii.len(),
                self.limits.len()
            )));
        }
        let joints = (0..n)
            .map(|i| Joint {
                axis: Vector3::from(self.axes[i]),
                offset: Vector3::from(self.offsets[i]),
                radius: self.radii[i],
            })
            .collect();
        ArmSpec::new(
            joints,
            self.limits.iter().map(|l| l[0]).collect(),
            self.limits.iter().map(|l| l[1]).collect(),
        )
    }

    pub fn from_arm(arm: &ArmSpec) -> Self {
        Self {
            axes: arm.joints().iter().map(|j| j.axis.into()).collect(),
            offsets: arm.joints().iter().map(|j| j.offset.into()).collect(),
            radii: arm.joints().iter().map(|j| j.radius).collect(),
            limits: arm.lower().iter().zip(arm.upper()).map(|(l, u)| [*l, *u]).collect(),
        }
    }
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_scene(self) -> Result<Scene> {
        let obstacles = self
            .obstacles
            .iter()
            .map(|o| match *o {
                ObstacleDef::Sphere { center, radius } => Primitive::Sphere {
                    center: center.into(),
                    radius,
                },
                ObstacleDef::Box { min, max } => Primitive::AxisAlignedBox {
                    min: min.into(),
                    max: max.into(),
                },
            })
            .collect();
        Ok(Scene {
            world: World::new(self.name, obstacles)?,
            arm: self.arm.to_arm()?,
        })
    }

    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            name: scene.world.name().to_string(),
            obstacles: scene
                .world
                .obstacles()
                .iter()
                .map(|p| match *p {
                    Primitive::Sphere { center, radius } => ObstacleDef::Sphere {
                        center: center.into(),
                        radius,
                    },
                    Primitive::AxisAlignedBox { min, max } => ObstacleDef::Box {
                        min: min.into(),
                        max: max.into(),
                    },
                })
                .collect(),
            arm: ArmDef::from_arm(&scene.arm),
        }
    }
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Self> {
        SceneFile::parse(text)?.into_scene()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let text = match name {
            "shelf" => SHELF_JSON,
            "table" => TABLE_JSON,
            "clutter" => CLUTTER_JSON,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown scene `{other}` (built-in: shelf, table, clutter)"
                )))
            }
        };
        Self::from_json(text)
    }

    /// A built-in scene name, or else a path to a scene file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if BUILTIN_SCENES.contains(&name_or_path) {
            Self::builtin(name_or_path)
        } else {
            Self::from_path(name_or_path)
        }
    }

    pub fn name(&self) -> &str {
        self.world.name()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneFile::from_scene(self)).expect("scene serializes")
    }
}
