use crate::error::{Error, Result};
use crate::kinematics::{collision_check, ArmSpec, CollisionReport, CollisionState, JointVector, World};

use super::sobol::SobolGenerator;

/// Collision class of a stored sample. `Free` scores `-1`, `Obs` scores `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleClass {
    Free,
    Obs,
}

impl SampleClass {
    pub fn sign(self) -> f64 {
        match self {
            SampleClass::Free => -1.0,
            SampleClass::Obs => 1.0,
        }
    }

    pub fn from_state(state: CollisionState) -> Option<Self> {
        match state {
            CollisionState::Free => Some(SampleClass::Free),
            CollisionState::Obs => Some(SampleClass::Obs),
            CollisionState::SelfCollision => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SampleClass::Free => "free",
            SampleClass::Obs => "obs",
        }
    }
}

/// Map a point of the unit cube onto the joint-limit box.
pub fn transform_to_cspace(unit: &[f64], arm: &ArmSpec) -> Result<JointVector> {
    if unit.len() != arm.dof() {
        return Err(Error::DimensionMismatch {
            expected: arm.dof(),
            actual: unit.len(),
        });
    }
    if let Some(bad) = unit.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidInput(format!(
            "unit-cube coordinate {bad} outside [0, 1]"
        )));
    }
    Ok(unit
        .iter()
        .zip(arm.lower().iter().zip(arm.upper()))
        .map(|(s, (l, u))| l + (u - l) * s)
        .collect::<Vec<_>>()
        .into())
}

/// Balanced set of collision-free and in-collision configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub free: Vec<JointVector>,
    pub obs: Vec<JointVector>,
    /// Parallel to `obs`.
    pub reports: Vec<CollisionReport>,
    /// Collision checks spent generating the set.
    pub checks: u64,
    /// Samples discarded for self-collision.
    pub self_collisions: u64,
}

/// Checks allowed per requested sample before generation gives up.
pub const BUDGET_PER_SAMPLE: u64 = 1000;

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.free.len() + self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dof(&self) -> usize {
        self.free.first().or(self.obs.first()).map(|q| q.len()).unwrap_or(0)
    }

    /// All samples in model order: free samples first, then obs samples.
    pub fn samples(&self) -> impl Iterator<Item = (&JointVector, SampleClass)> {
        self.free
            .iter()
            .map(|q| (q, SampleClass::Free))
            .chain(self.obs.iter().map(|q| (q, SampleClass::Obs)))
    }

    /// Report for sample `i` in model order, if it is an obs sample.
    pub fn report(&self, i: usize) -> Option<&CollisionReport> {
        i.checked_sub(self.free.len()).and_then(|j| self.reports.get(j))
    }
}

/// Walk the Sobol sequence from index 1, keeping the first `n / 2`
/// configurations of each class and discarding self-collisions.
pub fn generate_training_set(world: &World, arm: &ArmSpec, n: usize) -> Result<TrainingSet> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "training size must be even and at least 2, got {n}"
        )));
    }
    let half = n / 2;
    let budget = BUDGET_PER_SAMPLE * n as u64;
    let mut sobol = SobolGenerator::new(arm.dof())?;
    let mut set = TrainingSet {
        free: Vec::with_capacity(half),
        obs: Vec::with_capacity(half),
        reports: Vec::with_capacity(half),
        checks: 0,
        self_collisions: 0,
    };
    while set.obs.len() < half || set.free.len() < half {
        if set.checks >= budget {
            return Err(Error::BudgetExceeded {
                checks: set.checks,
                free: set.free.len(),
                obs: set.obs.len(),
                wanted: half,
            });
        }
        let q = transform_to_cspace(&sobol.next_point()?, arm)?;
        let outcome = collision_check(world, arm, &q)?;
        set.checks += 1;
        match outcome.state {
            CollisionState::Free => {
                if set.free.len() < half {
                    set.free.push(q);
                }
            }
            CollisionState::Obs => {
                if set.obs.len() < half {
                    set.obs.push(q);
                    set.reports.push(outcome.report.expect("obs outcome carries a report"));
                }
            }
            CollisionState::SelfCollision => set.self_collisions += 1,
        }
    }
    Ok(set)
}
