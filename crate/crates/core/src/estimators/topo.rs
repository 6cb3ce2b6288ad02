//! Topological estimator.
//!
//! Configurations are projected onto the shoulder/elbow joints (the first
//! four) and tessellated. A query is located in that tessellation; the five
//! vertices of its simplex vote twice, once with similarities in the 4D
//! projection and once in the 3D projection onto the wrist joints, and the
//! two beliefs are blended `rho : 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::belief_weighted_average;
use super::delaunay::Tessellation;
use super::neighbors::{measure_for, TrainingData};
use crate::error::{Error, Result};
use crate::similarity::{MeasureKind, SimilarityMeasure};

pub const DEFAULT_RHO: f64 = 100.0;
pub const PRIMARY_DIMS: [usize; 4] = [0, 1, 2, 3];
pub const SECONDARY_DIMS: [usize; 3] = [4, 5, 6];
/// Jitter applied to tessellation input, relative to each axis' range.
pub const JITTER_SCALE: f64 = 1e-9;

#[derive(Debug)]
pub struct TopoModel {
    rho: f64,
    tess: Tessellation,
    primary: TrainingData,
    secondary: TrainingData,
    measure4: SimilarityMeasure,
    measure3: SimilarityMeasure,
}

/// Deterministic per-point jitter in `[-1, 1)`, seeded by sample index.
fn jitter(index: usize, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(index as u64);
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

impl TopoModel {
    pub fn build(data: TrainingData, kind: MeasureKind, rho: f64) -> Result<Self> {
        if data.dim() != 7 {
            return Err(Error::DimensionMismatch {
                expected: 7,
                actual: data.dim(),
            });
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "rho must be finite and non-negative, got {rho}"
            )));
        }
        let primary = data.project(&PRIMARY_DIMS);
        let secondary = data.project(&SECONDARY_DIMS);
        let measure4 = measure_for(&primary, kind)?;
        let measure3 = measure_for(&secondary, kind)?;
        let d = PRIMARY_DIMS.len();
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        for p in primary.points() {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let jittered: Vec<Vec<f64>> = primary
            .points()
            .enumerate()
            .map(|(i, p)| {
                let u = jitter(i, d);
                (0..d).map(|k| p[k] + JITTER_SCALE * (hi[k] - lo[k]) * u[k]).collect()
            })
            .collect();
        let tess = Tessellation::new(d, &jittered)?;
        Ok(Self {
            rho,
            tess,
            primary,
            secondary,
            measure4,
            measure3,
        })
    }

    pub fn dof(&self) -> usize {
        7
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tessellation(&self) -> &Tessellation {
        &self.tess
    }

    /// Sample indices of the simplex containing the query's 4D projection.
    pub fn containing_samples(&self, q: &[f64]) -> Option<Vec<usize>> {
        assert_eq!(q.len(), 7, "query dimension");
        let p: Vec<f64> = PRIMARY_DIMS.iter().map(|&k| q[k]).collect();
        self.tess.locate(&p).map(|id| self.tess.simplex(id).to_vec())
    }

    fn vote(data: &TrainingData, measure: &SimilarityMeasure, samples: &[usize], q: &[f64]) -> f64 {
        let sims: Vec<f64> = samples
            .iter()
            .map(|&i| measure.sim(data.point(i), q, data.weight_row(i)))
            .collect();
        if let Some(hit) = sims.iter().position(|&s| s == 0.0) {
            return data.class(samples[hit]).sign();
        }
        belief_weighted_average(samples.iter().zip(&sims).map(|(&i, s)| (1.0 / s, data.class(i)))).unwrap_or(0.0)
    }

    /// `(bel1, bel2)` for a query inside the hull.
    pub fn partial_beliefs(&self, q: &[f64]) -> Option<(f64, f64)> {
        let samples = self.containing_samples(q)?;
        let q4: Vec<f64> = PRIMARY_DIMS.iter().map(|&k| q[k]).collect();
        let q3: Vec<f64> = SECONDARY_DIMS.iter().map(|&k| q[k]).collect();
        Some((
            Self::vote(&self.primary, &self.measure4, &samples, &q4),
            Self::vote(&self.secondary, &self.measure3, &samples, &q3),
        ))
    }

    pub fn belief(&self, q: &[f64]) -> f64 {
        match self.partial_beliefs(q) {
            None => 0.0,
            Some((b1, b2)) => combine(b1, b2, self.rho),
        }
    }
}

/// `(rho * bel1 + bel2) / (rho + 1)`.
pub fn combine(bel1: f64, bel2: f64, rho: f64) -> f64 {
    ((rho * bel1 + bel2) / (rho + 1.0)).clamp(-1.0, 1.0)
}
