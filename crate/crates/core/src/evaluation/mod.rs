//! Ground-truth query sets, accuracy / average-error metrics and parameter
//! sweeps.

mod sweep;

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::BeliefModel;
use crate::kinematics::{collision_check, ArmSpec, CollisionState, JointVector, World};
use crate::sampling::{SampleClass, TrainingSet};

pub use sweep::{
    run_sweep, write_sweep_csv, CellFailure, SweepConfig, SweepResult, SweepRow, MEAN_SCENE, SWEEP_HEADER,
};

/// Draws allowed per requested query before generation gives up.
pub const REDRAWS_PER_QUERY: usize = 1000;

/// Uniformly drawn configurations with their oracle state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuerySet {
    pub scene: String,
    pub queries: Vec<JointVector>,
    pub truth: Vec<SampleClass>,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JointVector, SampleClass)> {
        self.queries.iter().zip(self.truth.iter().copied())
    }
}

/// `m` configurations drawn uniformly from the joint box with a seeded
/// ChaCha8 stream. Self-colliding draws and exact repeats of `exclude`
/// samples are redrawn.
pub fn generate_query_set(
    world: &World,
    arm: &ArmSpec,
    m: usize,
    seed: u64,
    exclude: Option<&TrainingSet>,
) -> Result<QuerySet> {
    if m == 0 {
        return Err(Error::InvalidInput("query count must be at least 1".into()));
    }
    let key = |q: &[f64]| q.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    let excluded: HashSet<Vec<u64>> = exclude
        .map(|s| s.samples().map(|(q, _)| key(q)).collect())
        .unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    let budget = REDRAWS_PER_QUERY * m;
    let mut draws = 0;
    while queries.len() < m {
        if draws >= budget {
            return Err(Error::InvalidInput(format!(
                "query generation drew {draws} configurations but kept only {}",
                queries.len()
            )));
        }
        draws += 1;
        let q: Vec<f64> = arm
            .lower()
            .iter()
            .zip(arm.upper())
            .map(|(&l, &u)| rng.gen_range(l..=u))
            .collect();
        if excluded.contains(&key(&q)) {
            continue;
        }
        let state = collision_check(world, arm, &q)?.state;
        if let Some(class) = SampleClass::from_state(state) {
            queries.push(q.into());
            truth.push(class);
        } else {
            debug_assert_eq!(state, CollisionState::SelfCollision);
        }
    }
    Ok(QuerySet {
        scene: world.name().to_string(),
        queries,
        truth,
    })
}

/// Counts for one ground-truth class.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassScore {
    pub total: usize,
    pub correct: usize,
    pub error_sum: f64,
}

impl ClassScore {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    pub fn avg_error(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.error_sum / self.total as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub avg_error: f64,
    pub free: ClassScore,
    pub obs: ClassScore,
    /// Mean wall time per belief query, in microseconds.
    pub query_us: f64,
}

/// Whether a belief predicts `truth`. A belief of exactly zero never does.
pub fn is_correct(belief: f64, truth: SampleClass) -> bool {
    match truth {
        SampleClass::Free => belief < 0.0,
        SampleClass::Obs => belief > 0.0,
    }
}

/// Metrics for precomputed beliefs.
pub fn score_beliefs(beliefs: &[f64], truth: &[SampleClass]) -> Result<EvalResult> {
    if beliefs.is_empty() {
        return Err(Error::InvalidInput("empty query set".into()));
    }
    if beliefs.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: beliefs.len(),
        });
    }
    let mut free = ClassScore::default();
    let mut obs = ClassScore::default();
    for (&b, &t) in beliefs.iter().zip(truth) {
        let s = match t {
            SampleClass::Free => &mut free,
            SampleClass::Obs => &mut obs,
        };
        s.total += 1;
        s.correct += usize::from(is_correct(b, t));
        s.error_sum += (t.sign() - b).abs();
    }
    let total = beliefs.len();
    let correct = free.correct + obs.correct;
    Ok(EvalResult {
        total,
        correct,
        accuracy: correct as f64 / total as f64,
        avg_error: (free.error_sum + obs.error_sum) / total as f64,
        free,
        obs,
        query_us: 0.0,
    })
}

/// Evaluate `model` on every query, in order.
pub fn evaluate<M: BeliefModel + ?Sized>(model: &M, queries: &QuerySet) -> Result<EvalResult> {
    let start = Instant::now();
    let beliefs: Vec<f64> = queries.queries.iter().map(|q| model.belief(q)).collect();
    let elapsed = start.elapsed();
    if let Some(b) = beliefs.iter().find(|b| !(-1.0..=1.0).contains(*b)) {
        return Err(Error::InvalidInput(format!(
            "model produced belief {b} outside [-1, 1]"
        )));
    }
    let mut result = score_beliefs(&beliefs, &queries.truth)?;
    result.query_us = elapsed.as_secs_f64() * 1e6 / queries.len().max(1) as f64;
    Ok(result)
}
