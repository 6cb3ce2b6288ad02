//! Synthetic serial arm, primitive obstacles and the ground-truth collision
//! checker.

mod arm;
mod collision;
pub mod geometry;
mod scene;

pub(crate) use arm::forward_kinematics_unchecked;
pub use arm::{
    axis_rotation, end_effector, forward_kinematics, ArmPose, ArmSpec, Capsule, Joint, JointVector, LinkFrame,
};
pub use collision::{
    collision_check, links_in_contact, self_collides, CollisionOutcome, CollisionReport, CollisionState, World,
};
pub use geometry::Primitive;
pub use scene::{ArmDef, ObstacleDef, Scene, SceneFile, BUILTIN_SCENES};
