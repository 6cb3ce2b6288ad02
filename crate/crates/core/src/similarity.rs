//! Similarity measures between configurations and per-sample joint
//! importance weights.
//!
//! All four measures are square roots of a quadratic form in `d = q - q'`,
//! where `q` is the training sample and `q'` the query:
//!
//! | measure              | `sim(q, q')^2`     |
//! |----------------------|--------------------|
//! | Euclidean            | `d' d`             |
//! | Weighted Euclidean   | `d' W_q d`         |
//! | Mahalanobis          | `d' S^-1 d`        |
//! | Weighted Mahalanobis | `d' W_q S^-1 d`    |
//!
//! `W_q` is the diagonal matrix of the training sample's importance weights
//! and `S` the pooled covariance of the training set. `W_q S^-1` is not
//! symmetric, so the last form can go negative; it is clamped to zero and
//! the clamp is counted.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics_unchecked, ArmSpec, CollisionReport};
use crate::sampling::{SampleClass, TrainingSet};

/// Joint perturbation used to measure importance, radians.
pub const PERTURBATION: f64 = 0.01;

/// Unit vector of per-joint importance for one training sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceWeights {
    omega: Vec<f64>,
}

impl ImportanceWeights {
    pub fn from_displacements(s: Vec<f64>) -> Result<Self> {
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateWeights(format!(
                "displacement vector {s:?} has zero norm"
            )));
        }
        Ok(Self {
            omega: s.into_iter().map(|v| v / norm).collect(),
        })
    }

    pub fn unit(dof: usize, axis: usize) -> Self {
        let mut omega = vec![0.0; dof];
        omega[axis] = 1.0;
        Self { omega }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.omega
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.omega
    }

    /// The diagonal matrix `W_q`.
    pub fn matrix(&self) -> WeightMatrix {
        WeightMatrix {
            diagonal: self.omega.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    pub diagonal: Vec<f64>,
}

impl WeightMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.diagonal))
    }
}

/// Importance of each joint for a collision-free sample: how far the end
/// effector moves when that joint alone turns by [`PERTURBATION`].
pub fn importance_weights_free(arm: &ArmSpec, q: &[f64]) -> Result<ImportanceWeights> {
    arm.check_dim(q)?;
    let base = forward_kinematics_unchecked(arm, q).end_effector;
    let mut moved = q.to_vec();
    let s = (0..arm.dof())
        .map(|j| {
            moved[j] = q[j] + PERTURBATION;
            let v = forward_kinematics_unchecked(arm, &moved).end_effector;
            moved[j] = q[j];
            (v - base).norm()
        })
        .collect();
    ImportanceWeights::from_displacements(s)
}

/// Importance of each joint for an in-collision sample: displacement of the
/// collision centroid, rigidly attached to the first colliding link `l`,
/// under each joint `j < l`. Joints at or beyond `l` get zero weight.
pub fn importance_weights_obs(arm: &ArmSpec, q: &[f64], report: &CollisionReport) -> Result<ImportanceWeights> {
    arm.check_dim(q)?;
    let link = report.first_link_index;
    if link == 0 || link > arm.dof() {
        return Err(Error::DegenerateWeights(format!(
            "link index {link} outside 1..={}",
            arm.dof()
        )));
    }
    if link == 1 {
        return Ok(ImportanceWeights::unit(arm.dof(), 0));
    }
    let pose = forward_kinematics_unchecked(arm, q);
    let frame = pose.link_frame(link);
    let local = frame.to_local(&report.centroid);
    let base: Vector3<f64> = frame.to_world(&local);
    let mut moved = q.to_vec();
    let mut s = vec![0.0; arm.dof()];
    for (j, sj) in s.iter_mut().enumerate().take(link) {
        moved[j] = q[j] + PERTURBATION;
        let p = forward_kinematics_unchecked(arm, &moved);
        moved[j] = q[j];
        *sj = (p.link_frame(link).to_world(&local) - base).norm();
    }
    ImportanceWeights::from_displacements(s).map_err(|_| {
        Error::DegenerateWeights(format!(
            "collision centroid {:?} on link {link} lies on every upstream joint axis",
            report.centroid.as_slice()
        ))
    })
}

/// Importance weights for every sample of `set`, in model order.
pub fn importance_weights_for_set(arm: &ArmSpec, set: &TrainingSet) -> Result<Vec<ImportanceWeights>> {
    set.samples()
        .enumerate()
        .map(|(i, (q, class))| match class {
            SampleClass::Free => importance_weights_free(arm, q),
            SampleClass::Obs => importance_weights_obs(arm, q, set.report(i).expect("obs report")),
        })
        .collect()
}

/// Pooled sample covariance with a scale-relative ridge.
#[derive(Clone, Debug)]
pub struct Covariance {
    sigma: DMatrix<f64>,
    inverse: DMatrix<f64>,
    /// Inverse of the Cholesky factor; `|whiten * d|^2 = d' S^-1 d`.
    whiten: DMatrix<f64>,
    ridge: f64,
}

/// Relative ridge added to the covariance diagonal.
pub const RIDGE_SCALE: f64 = 1e-8;

impl Covariance {
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let n = points.len();
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        if dim == 0 || n <= dim {
            return Err(Error::Covariance(format!(
                "need more samples than dimensions, got {n} samples of dimension {dim}"
            )));
        }
        let mut mean = vec![0.0; dim];
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut sigma = DMatrix::zeros(dim, dim);
        for p in points {
            let p = p.as_ref();
            for a in 0..dim {
                let da = p[a] - mean[a];
                for b in a..dim {
                    sigma[(a, b)] += da * (p[b] - mean[b]);
                }
            }
        }
        for a in 0..dim {
            for b in a..dim {
                let v = sigma[(a, b)] / (n - 1) as f64;
                sigma[(a, b)] = v;
                sigma[(b, a)] = v;
            }
        }
        Self::from_matrix(sigma)
    }

    pub fn from_matrix(mut sigma: DMatrix<f64>) -> Result<Self> {
        let dim = sigma.nrows();
        if dim == 0 || sigma.ncols() != dim {
            return Err(Error::Covariance("matrix must be square and non-empty".into()));
        }
        let trace = sigma.trace();
        let ridge = if trace > 0.0 {
            RIDGE_SCALE * trace / dim as f64
        } else {
            RIDGE_SCALE
        };
        for i in 0..dim {
            sigma[(i, i)] += ridge;
        }
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Covariance("covariance is not positive definite".into()))?;
        let inverse = chol.inverse();
        let whiten = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::Covariance("singular Cholesky factor".into()))?;
        if !inverse.iter().all(|v| v.is_finite()) {
            return Err(Error::Covariance("inverse is not finite".into()));
        }
        Ok(Self {
            sigma,
            inverse,
            whiten,
            ridge,
        })
    }

    pub fn from_training_set(set: &TrainingSet) -> Result<Self> {
        let points: Vec<&[f64]> = set.samples().map(|(q, _)| q.as_slice()).collect();
        Self::from_points(&points)
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Regularized covariance.
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Mean of the per-joint variances (diagonal of the covariance).
    pub fn mean_variance(&self) -> f64 {
        self.sigma.trace() / self.dim() as f64
    }

    pub fn whiten(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..=i).map(|k| self.whiten[(i, k)] * x[k]).sum())
            .collect()
    }

    /// Covariance of a coordinate subset (`dims` in order).
    pub fn restricted(&self, dims: &[usize]) -> Result<Self> {
        let m = DMatrix::from_fn(dims.len(), dims.len(), |a, b| {
            self.sigma[(dims[a], dims[b])] - if a == b { self.ridge } else { 0.0 }
        });
        Self::from_matrix(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Euclidean,
    WeightedEuclidean,
    Mahalanobis,
    WeightedMahalanobis,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [
        MeasureKind::Euclidean,
        MeasureKind::WeightedEuclidean,
        MeasureKind::Mahalanobis,
        MeasureKind::WeightedMahalanobis,
    ];

    pub fn is_weighted(self) -> bool {
        matches!(self, MeasureKind::WeightedEuclidean | MeasureKind::WeightedMahalanobis)
    }

    pub fn needs_covariance(self) -> bool {
        matches!(self, MeasureKind::Mahalanobis | MeasureKind::WeightedMahalanobis)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Euclidean => "euclidean",
            MeasureKind::WeightedEuclidean => "weighted-euclidean",
            MeasureKind::Mahalanobis => "mahalanobis",
            MeasureKind::WeightedMahalanobis => "weighted-mahalanobis",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown measure `{s}`")))
    }
}

/// A measure bound to its context (the covariance, when it needs one).
#[derive(Debug)]
pub struct SimilarityMeasure {
    kind: MeasureKind,
    covariance: Option<Arc<Covariance>>,
    clamp_events: AtomicU64,
}

impl Clone for SimilarityMeasure {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind,
            covariance: self.covariance.clone(),
            clamp_events: AtomicU64::new(self.clamp_events()),
        }
    }
}

impl SimilarityMeasure {
    pub fn new(kind: MeasureKind, covariance: Option<Arc<Covariance>>) -> Result<Self> {
        if kind.needs_covariance() && covariance.is_none() {
            return Err(Error::Covariance(format!("{kind} needs a covariance matrix")));
        }
        Ok(Self {
            kind,
            covariance: if kind.needs_covariance() { covariance } else { None },
            clamp_events: AtomicU64::new(0),
        })
    }

    pub fn euclidean() -> Self {
        Self::new(MeasureKind::Euclidean, None).expect("no context needed")
    }

    pub fn weighted_euclidean() -> Self {
        Self::new(MeasureKind::WeightedEuclidean, None).expect("no context needed")
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn covariance(&self) -> Option<&Arc<Covariance>> {
        self.covariance.as_ref()
    }

    /// Number of weighted-Mahalanobis evaluations whose quadratic form was
    /// negative and clamped to zero.
    pub fn clamp_events(&self) -> u64 {
        self.clamp_events.load(Ordering::Relaxed)
    }

    /// `sim(q, q')` where `q` is the training sample owning `weights`.
    ///
    /// `weights` must be supplied for weighted measures and is ignored
    /// otherwise.
    pub fn sim(&self, train: &[f64], query: &[f64], weights: Option<&[f64]>) -> f64 {
        self.sim_squared(train, query, weights).sqrt()
    }

    pub fn sim_squared(&self, train: &[f64], query: &[f64], weights: Option<&[f64]>) -> f64 {
        debug_assert_eq!(train.len(), query.len());
        match self.kind {
            MeasureKind::Euclidean => train.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(),
            MeasureKind::WeightedEuclidean => {
                let w = weights.expect("weighted measure needs importance weights");
                train
                    .iter()
                    .zip(query)
                    .zip(w)
                    .map(|((a, b), w)| w * (a - b) * (a - b))
                    .sum()
            }
            MeasureKind::Mahalanobis => {
                let inv = self.covariance.as_ref().expect("validated").inverse();
                quadratic_form(inv, train, query, None).max(0.0)
            }
            MeasureKind::WeightedMahalanobis => {
                let w = weights.expect("weighted measure needs importance weights");
                let inv = self.covariance.as_ref().expect("validated").inverse();
                let v = quadratic_form(inv, train, query, Some(w));
                if v < 0.0 {
                    self.clamp_events.fetch_add(1, Ordering::Relaxed);
                    0.0
                } else {
                    v
                }
            }
        }
    }
}

/// `d' diag(w) M d` with `d = a - b`, without allocating.
fn quadratic_form(m: &DMatrix<f64>, a: &[f64], b: &[f64], w: Option<&[f64]>) -> f64 {
    let dim = a.len();
    let mut total = 0.0;
    for i in 0..dim {
        let di = a[i] - b[i];
        if di == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for k in 0..dim {
            row += m[(i, k)] * (a[k] - b[k]);
        }
        total += di * w.map_or(1.0, |w| w[i]) * row;
    }
    total
}
