use nalgebra::Vector3;

use super::arm::{forward_kinematics, ArmPose, ArmSpec};
use super::geometry::{penetration_interval, segment_primitive_distance, segment_segment_distance, Primitive};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    name: String,
    obstacles: Vec<Primitive>,
}

impl World {
    pub fn new(name: impl Into<String>, obstacles: Vec<Primitive>) -> Result<Self> {
        for (i, o) in obstacles.iter().enumerate() {
            match o {
                Primitive::Sphere { center, radius } => {
                    if !(*radius > 0.0) || !center.iter().all(|v| v.is_finite()) {
                        return Err(Error::InvalidWorld(format!("obstacle {i}: bad sphere")));
                    }
                }
                Primitive::AxisAlignedBox { min, max } => {
                    if !(0..3).all(|k| min[k] < max[k] && min[k].is_finite() && max[k].is_finite()) {
                        return Err(Error::InvalidWorld(format!("obstacle {i}: box min must be below max")));
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            obstacles,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            obstacles: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn obstacles(&self) -> &[Primitive] {
        &self.obstacles
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollisionState {
    Free,
    Obs,
    SelfCollision,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionReport {
    /// 1-based index of the shoulder-most link touching the environment.
    pub first_link_index: usize,
    pub centroid: Vector3<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionOutcome {
    pub state: CollisionState,
    pub report: Option<CollisionReport>,
}

impl CollisionOutcome {
    pub const FREE: Self = Self {
        state: CollisionState::Free,
        report: None,
    };
    pub const SELF: Self = Self {
        state: CollisionState::SelfCollision,
        report: None,
    };
}

/// Whether two non-adjacent links overlap. Links sharing a joint are exempt.
pub fn self_collides(pose: &ArmPose) -> bool {
    let caps = &pose.capsules;
    for i in 0..caps.len() {
        for j in i + 2..caps.len() {
            let d = segment_segment_distance(&caps[i].start, &caps[i].end, &caps[j].start, &caps[j].end);
            if d < caps[i].radius + caps[j].radius {
                return true;
            }
        }
    }
    false
}

/// 1-based indices of links that overlap any obstacle.
pub fn links_in_contact(world: &World, pose: &ArmPose) -> Vec<usize> {
    pose.capsules
        .iter()
        .enumerate()
        .filter(|(_, cap)| {
            world
                .obstacles
                .iter()
                .any(|o| segment_primitive_distance(&cap.start, &cap.end, o).0 < cap.radius)
        })
        .map(|(i, _)| i + 1)
        .collect()
}

/// Midpoint of the union of per-obstacle penetration intervals along the
/// link axis, weighted by interval length.
fn penetration_centroid(world: &World, pose: &ArmPose, link: usize) -> Vector3<f64> {
    let cap = pose.link_capsule(link);
    let mut spans: Vec<(f64, f64)> = world
        .obstacles
        .iter()
        .filter_map(|o| penetration_interval(&cap.start, &cap.end, o, cap.radius))
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let total: f64 = merged.iter().map(|(lo, hi)| hi - lo).sum();
    let t = if total > 0.0 {
        merged.iter().map(|(lo, hi)| (hi - lo) * 0.5 * (lo + hi)).sum::<f64>() / total
    } else if merged.is_empty() {
        // Contact found by the distance test but no interval survived
        // rounding: fall back to the closest point.
        world
            .obstacles
            .iter()
            .map(|o| segment_primitive_distance(&cap.start, &cap.end, o))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, t)| t)
            .unwrap_or(0.5)
    } else {
        merged.iter().map(|(lo, hi)| 0.5 * (lo + hi)).sum::<f64>() / merged.len() as f64
    };
    cap.point_at(t)
}

pub fn collision_check(world: &World, arm: &ArmSpec, q: &[f64]) -> Result<CollisionOutcome> {
    let pose = forward_kinematics(arm, q)?;
    Ok(classify_pose(world, &pose))
}

pub(crate) fn classify_pose(world: &World, pose: &ArmPose) -> CollisionOutcome {
    if self_collides(pose) {
        return CollisionOutcome::SELF;
    }
    for (i, cap) in pose.capsules.iter().enumerate() {
        let touching = world
            .obstacles
            .iter()
            .any(|o| segment_primitive_distance(&cap.start, &cap.end, o).0 < cap.radius);
        if touching {
            let link = i + 1;
            return CollisionOutcome {
                state: CollisionState::Obs,
                report: Some(CollisionReport {
                    first_link_index: link,
                    centroid: penetration_centroid(world, pose, link),
                }),
            };
        }
    }
    CollisionOutcome::FREE
}
