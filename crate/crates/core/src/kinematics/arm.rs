//! Serial-arm description and forward kinematics.
//!
//! Joint `j` connects link `j` to link `j + 1`; link 0 is the fixed base and
//! carries no geometry. Link `l` (1-based) is a capsule from the origin of
//! joint `l - 1` to the origin of joint `l` (or the end effector for the last
//! link), so it is moved by joints `0..l` only.

use std::ops::{Deref, DerefMut};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// A configuration: one angle (radians) per joint.
#[derive(Clone, Debug, PartialEq)]
pub struct JointVector(Vec<f64>);

impl JointVector {
    pub fn new(q: Vec<f64>) -> Self {
        Self(q)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for JointVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for JointVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for JointVector {
    fn from(q: Vec<f64>) -> Self {
        Self(q)
    }
}

impl<const N: usize> From<[f64; N]> for JointVector {
    fn from(q: [f64; N]) -> Self {
        Self(q.to_vec())
    }
}

/// One revolute joint together with the link it drives.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    /// Rotation axis in the parent frame, unit length.
    pub axis: Vector3<f64>,
    /// Translation from this joint's origin to the next joint origin, expressed
    /// in the frame after this joint's rotation.
    pub offset: Vector3<f64>,
    /// Capsule radius of the driven link, meters.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArmSpec {
    joints: Vec<Joint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

const AXIS_TOLERANCE: f64 = 1e-12;

impl ArmSpec {
    pub fn new(joints: Vec<Joint>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::InvalidArm("arm needs at least one joint".into()));
        }
        if lower.len() != joints.len() || upper.len() != joints.len() {
            return Err(Error::InvalidArm(format!(
                "{} joints but {} lower / {} upper limits",
                joints.len(),
                lower.len(),
                upper.len()
            )));
        }
        for (i, j) in joints.iter().enumerate() {
            if !j.axis.iter().chain(j.offset.iter()).all(|v| v.is_finite()) {
                return Err(Error::InvalidArm(format!("joint {i}: non-finite geometry")));
            }
            if (j.axis.norm() - 1.0).abs() > AXIS_TOLERANCE {
                return Err(Error::InvalidArm(format!(
                    "joint {i}: axis norm {} is not 1",
                    j.axis.norm()
                )));
            }
            if !(j.radius > 0.0 && j.radius.is_finite()) {
                return Err(Error::InvalidArm(format!(
                    "joint {i}: radius {} must be positive",
                    j.radius
                )));
            }
            if !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidArm(format!(
                    "joint {i}: limits [{}, {}] are not an interval",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { joints, lower, upper })
    }

    /// The seven-joint arm used by the shipped scenes: a shoulder column, a
    /// long upper arm and forearm, and a short three-joint wrist.
    pub fn synthetic_7dof() -> Self {
        let z = Vector3::z();
        let y = Vector3::y();
        let joint = |axis: Vector3<f64>, offset: [f64; 3], radius: f64| Joint {
            axis,
            offset: Vector3::from(offset),
            radius,
        };
        Self::new(
            vec![
                joint(z, [0.0, 0.0, 0.25], 0.06),
                joint(y, [0.0, 0.0, 0.16], 0.05),
                joint(z, [0.0, 0.0, 0.45], 0.05),
                joint(y, [0.0, 0.0, 0.30], 0.045),
                joint(z, [0.0, 0.0, 0.10], 0.035),
                joint(y, [0.0, 0.0, 0.07], 0.03),
                joint(z, [0.04, 0.0, 0.10], 0.025),
            ],
            vec![-2.6, -2.0, -2.8, -0.9, -2.8, -1.6, -2.9],
            vec![2.6, 2.0, 2.8, 2.6, 2.8, 1.6, 2.9],
        )
        .expect("built-in arm is valid")
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn ranges(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.joints.iter().map(|j| j.offset.norm()).sum()
    }

    pub fn check_dim(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                actual: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("configuration is not finite".into()));
        }
        Ok(())
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.dof()
            && q.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// Rotation about a unit axis, written as `I + sin K + (1 - cos) K^2` so that
/// cardinal axes leave their own component exactly unchanged.
pub fn axis_rotation(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    let k = axis.cross_matrix();
    Matrix3::identity() + k * s + (k * k) * (1.0 - c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capsule {
    pub start: Vector3<f64>,
    pub end: Vector3<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn point_at(&self, t: f64) -> Vector3<f64> {
        self.start + (self.end - self.start) * t
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

/// World pose of a link frame: the rotation accumulated up to and including
/// the link's driving joint, anchored at that joint's origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkFrame {
    pub rotation: Matrix3<f64>,
    pub origin: Vector3<f64>,
}

impl LinkFrame {
    pub fn to_local(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (world - self.origin)
    }

    pub fn to_world(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * local + self.origin
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArmPose {
    /// `frames[l - 1]` and `capsules[l - 1]` belong to link `l`.
    pub frames: Vec<LinkFrame>,
    pub capsules: Vec<Capsule>,
    pub end_effector: Vector3<f64>,
}

impl ArmPose {
    pub fn link_capsule(&self, link: usize) -> &Capsule {
        &self.capsules[link - 1]
    }

    pub fn link_frame(&self, link: usize) -> &LinkFrame {
        &self.frames[link - 1]
    }
}

pub fn forward_kinematics(arm: &ArmSpec, q: &[f64]) -> Result<ArmPose> {
    arm.check_dim(q)?;
    Ok(forward_kinematics_unchecked(arm, q))
}

pub(crate) fn forward_kinematics_unchecked(arm: &ArmSpec, q: &[f64]) -> ArmPose {
    let n = arm.dof();
    let mut frames = Vec::with_capacity(n);
    let mut capsules = Vec::with_capacity(n);
    let mut rotation = Matrix3::identity();
    let mut origin = Vector3::zeros();
    for (joint, &angle) in arm.joints.iter().zip(q) {
        rotation *= axis_rotation(&joint.axis, angle);
        let next = origin + rotation * joint.offset;
        frames.push(LinkFrame { rotation, origin });
        capsules.push(Capsule {
            start: origin,
            end: next,
            radius: joint.radius,
        });
        origin = next;
    }
    ArmPose {
        frames,
        capsules,
        end_effector: origin,
    }
}

/// End-effector position only.
pub fn end_effector(arm: &ArmSpec, q: &[f64]) -> Result<Vector3<f64>> {
    forward_kinematics(arm, q).map(|p| p.end_effector)
}
