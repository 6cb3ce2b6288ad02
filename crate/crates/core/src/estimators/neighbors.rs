use std::sync::Arc;

use super::kdtree::{KdTree, Neighbor, PruneBound, SearchStats};
use super::{belief_weighted_average, epanechnikov_weight, gaussian_weight, Kernel, Strategy};
use crate::error::{Error, Result};
use crate::sampling::{SampleClass, TrainingSet};
use crate::similarity::{Covariance, MeasureKind, SimilarityMeasure};

/// Flattened training samples in model order with optional per-sample
/// importance weights.
#[derive(Clone, Debug)]
pub struct TrainingData {
    dim: usize,
    points: Vec<f64>,
    classes: Vec<SampleClass>,
    weights: Option<Vec<f64>>,
}

impl TrainingData {
    pub fn new(set: &TrainingSet, weights: Option<&[Vec<f64>]>) -> Result<Self> {
        let dim = set.dof();
        if set.is_empty() {
            return Err(Error::InvalidInput("empty training set".into()));
        }
        let mut points = Vec::with_capacity(set.len() * dim);
        let mut classes = Vec::with_capacity(set.len());
        for (q, c) in set.samples() {
            if q.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: q.len(),
                });
            }
            points.extend_from_slice(q);
            classes.push(c);
        }
        let weights = match weights {
            None => None,
            Some(w) => {
                if w.len() != set.len() || w.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidInput(
                        "importance weights do not match the training set".into(),
                    ));
                }
                Some(w.iter().flatten().copied().collect())
            }
        };
        Ok(Self {
            dim,
            points,
            classes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn class(&self, i: usize) -> SampleClass {
        self.classes[i]
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight_row(&self, i: usize) -> Option<&[f64]> {
        self.weights.as_ref().map(|w| &w[i * self.dim..(i + 1) * self.dim])
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Keep only the coordinates in `dims` (points and weights).
    pub fn project(&self, dims: &[usize]) -> Self {
        let pick = |flat: &[f64]| -> Vec<f64> {
            flat.chunks_exact(self.dim)
                .flat_map(|row| dims.iter().map(move |&k| row[k]))
                .collect()
        };
        Self {
            dim: dims.len(),
            points: pick(&self.points),
            classes: self.classes.clone(),
            weights: self.weights.as_deref().map(pick),
        }
    }
}

/// Node-visit budget for approximate search: generous for small `eps`,
/// unlimited at `eps = 0`.
pub fn ann_node_budget(n: usize, k: usize, eps: f64) -> usize {
    if eps <= 0.0 {
        return usize::MAX;
    }
    let depth = (n.max(2) as f64).log2();
    ((k as f64 + depth) * 6.0 / eps).ceil() as usize
}

/// Build the similarity measure for `data`, estimating the covariance from
/// the data when the measure needs one.
pub(crate) fn measure_for(data: &TrainingData, kind: MeasureKind) -> Result<SimilarityMeasure> {
    let cov = if kind.needs_covariance() {
        let pts: Vec<&[f64]> = data.points().collect();
        Some(Arc::new(Covariance::from_points(&pts)?))
    } else {
        None
    };
    SimilarityMeasure::new(kind, cov)
}

/// k-NN, approximate k-NN and fixed-radius kernel models over a kd-tree.
#[derive(Debug)]
pub struct NeighborModel {
    strategy: Strategy,
    measure: SimilarityMeasure,
    data: TrainingData,
    tree: KdTree,
    /// Gaussian bandwidth: mean per-joint variance of the training set.
    sigma2: f64,
    ann_budget: usize,
}

impl NeighborModel {
    pub fn build(data: TrainingData, strategy: Strategy, kind: MeasureKind) -> Result<Self> {
        if let Strategy::Topological { .. } = strategy {
            return Err(Error::InvalidInput(
                "topological strategy is not a neighbor model".into(),
            ));
        }
        if let Strategy::ExactKnn { k } | Strategy::ApproxKnn { k, .. } = strategy {
            if k > data.len() {
                return Err(Error::InvalidInput(format!(
                    "k = {k} exceeds {} training samples",
                    data.len()
                )));
            }
        }
        let measure = measure_for(&data, kind)?;
        let sigma2 = match measure.covariance() {
            Some(c) => c.mean_variance(),
            None => {
                let pts: Vec<&[f64]> = data.points().collect();
                if pts.len() > 1 {
                    Covariance::from_points(&pts).map(|c| c.mean_variance()).unwrap_or(1.0)
                } else {
                    1.0
                }
            }
        };
        let (coords, bound) = match kind {
            MeasureKind::Euclidean => (data.points.clone(), PruneBound::Euclidean),
            MeasureKind::WeightedEuclidean => (data.points.clone(), PruneBound::Weighted),
            MeasureKind::Mahalanobis => {
                let cov = measure.covariance().expect("mahalanobis has a covariance");
                (
                    data.points().flat_map(|p| cov.whiten(p)).collect(),
                    PruneBound::Euclidean,
                )
            }
            MeasureKind::WeightedMahalanobis => (data.points.clone(), PruneBound::None),
        };
        let tree = KdTree::build(data.dim, &coords, data.weights(), bound);
        let ann_budget = match strategy {
            Strategy::ApproxKnn { k, eps } => ann_node_budget(data.len(), k, eps),
            _ => usize::MAX,
        };
        Ok(Self {
            strategy,
            measure,
            data,
            tree,
            sigma2,
            ann_budget,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn measure(&self) -> &SimilarityMeasure {
        &self.measure
    }

    pub fn data(&self) -> &TrainingData {
        &self.data
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `sim` between training sample `i` and `q`.
    pub fn sim_to(&self, i: usize, q: &[f64]) -> f64 {
        self.measure.sim(self.data.point(i), q, self.data.weight_row(i))
    }

    fn search_coords(&self, q: &[f64]) -> Vec<f64> {
        match self.measure.kind() {
            MeasureKind::Mahalanobis => self.measure.covariance().expect("validated").whiten(q),
            _ => q.to_vec(),
        }
    }

    fn check(&self, q: &[f64]) {
        assert_eq!(q.len(), self.data.dim, "query dimension");
    }

    /// Exact `k` nearest samples, sorted by `(sim, index)`.
    pub fn query_knn_k(&self, q: &[f64], k: usize) -> (Vec<Neighbor>, SearchStats) {
        self.check(q);
        self.tree.knn(&self.search_coords(q), k, |i| self.sim_to(i, q))
    }

    pub fn query_knn(&self, q: &[f64]) -> Vec<Neighbor> {
        let k = match self.strategy {
            Strategy::ExactKnn { k } | Strategy::ApproxKnn { k, .. } => k,
            _ => super::DEFAULT_K,
        };
        self.query_knn_k(q, k).0
    }

    /// Approximate search with explicit `eps` and node budget.
    pub fn query_ann_with(&self, q: &[f64], k: usize, eps: f64, max_nodes: usize) -> (Vec<Neighbor>, SearchStats) {
        self.check(q);
        self.tree
            .ann(&self.search_coords(q), k, eps, max_nodes, |i| self.sim_to(i, q))
    }

    /// Approximate search with the model's `k`, `eps` and budget.
    pub fn query_ann(&self, q: &[f64]) -> (Vec<Neighbor>, SearchStats) {
        let (k, eps) = match self.strategy {
            Strategy::ApproxKnn { k, eps } => (k, eps),
            Strategy::ExactKnn { k } => (k, 0.0),
            _ => (super::DEFAULT_K, super::DEFAULT_EPS),
        };
        let budget = if eps > 0.0 {
            ann_node_budget(self.data.len(), k, eps).min(self.ann_budget)
        } else {
            usize::MAX
        };
        self.query_ann_with(q, k, eps, budget)
    }

    /// All samples with `sim < r`, sorted by index.
    pub fn query_radius_r(&self, q: &[f64], r: f64) -> (Vec<Neighbor>, SearchStats) {
        self.check(q);
        self.tree.within(&self.search_coords(q), r, |i| self.sim_to(i, q))
    }

    pub fn query_radius(&self, q: &[f64]) -> Vec<Neighbor> {
        let r = match self.strategy {
            Strategy::FixedRadius { r, .. } => r,
            _ => super::DEFAULT_RADIUS,
        };
        self.query_radius_r(q, r).0
    }

    /// Inverse-similarity belief over a k-NN list; a neighbor at `sim = 0`
    /// decides the belief on its own.
    pub fn inverse_distance_belief(&self, neighbors: &[Neighbor]) -> f64 {
        if let Some(hit) = neighbors.iter().find(|n| n.sim == 0.0) {
            return self.data.class(hit.index).sign();
        }
        belief_weighted_average(neighbors.iter().map(|n| (1.0 / n.sim, self.data.class(n.index)))).unwrap_or(0.0)
    }

    pub fn kernel_belief(&self, neighbors: &[Neighbor], r: f64, kernel: Kernel) -> f64 {
        let w = |n: &Neighbor| match kernel {
            Kernel::Gaussian => gaussian_weight(n.sim, self.sigma2),
            Kernel::Epanechnikov => epanechnikov_weight(n.sim, r),
        };
        belief_weighted_average(neighbors.iter().map(|n| (w(n), self.data.class(n.index)))).unwrap_or(0.0)
    }

    pub fn belief(&self, q: &[f64]) -> f64 {
        match self.strategy {
            Strategy::ExactKnn { .. } => self.inverse_distance_belief(&self.query_knn(q)),
            Strategy::ApproxKnn { .. } => self.inverse_distance_belief(&self.query_ann(q).0),
            Strategy::FixedRadius { r, kernel } => self.kernel_belief(&self.query_radius(q), r, kernel),
            Strategy::Topological { .. } => unreachable!("rejected at build"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::ModelSpec;
    use crate::kinematics::{CollisionReport, JointVector};
    use nalgebra::Vector3;

    fn set_from(free: Vec<Vec<f64>>, obs: Vec<Vec<f64>>) -> TrainingSet {
        let reports = obs
            .iter()
            .map(|_| CollisionReport {
                first_link_index: 1,
                centroid: Vector3::zeros(),
            })
            .collect();
        TrainingSet {
            free: free.into_iter().map(JointVector::from).collect(),
            obs: obs.into_iter().map(JointVector::from).collect(),
            reports,
            checks: 0,
            self_collisions: 0,
        }
    }

    fn model(set: &TrainingSet, text: &str) -> NeighborModel {
        let spec: ModelSpec = text.parse().unwrap();
        match spec.build_with_weights(set, None).unwrap() {
            crate::estimators::Model::Neighbor(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn inverse_distance_hand_value() {
        let set = set_from(vec![vec![1.0, 0.0]], vec![vec![2.0, 0.0]]);
        let m = model(&set, "strategy=nn k=2");
        let b = m.belief(&[0.0, 0.0]);
        assert!((b + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_match_returns_sample_state() {
        let set = set_from(
            vec![vec![0.0, 0.0], vec![0.1, 0.0]],
            vec![vec![1.0, 1.0], vec![0.2, 0.0]],
        );
        let m = model(&set, "strategy=nn k=3");
        assert_eq!(m.belief(&[1.0, 1.0]), 1.0);
        assert_eq!(m.belief(&[0.0, 0.0]), -1.0);
    }

    #[test]
    fn empty_radius_is_neutral() {
        let set = set_from(vec![vec![0.0, 0.0]], vec![vec![1.0, 1.0]]);
        let m = model(&set, "strategy=epanechnikov r=0.5");
        assert_eq!(m.belief(&[5.0, 5.0]), 0.0);
        assert_eq!(m.belief(&[0.1, 0.0]), -1.0);
    }

    #[test]
    fn kernel_magnitude_grows_toward_isolated_free_sample() {
        // A single free sample plus a far obs sample keeps the covariance
        // well defined without entering the radius.
        let set = set_from(vec![vec![0.0, 0.0]], vec![vec![50.0, 50.0]]);
        for text in ["strategy=epanechnikov r=1.5", "strategy=gaussian r=1.5"] {
            let m = model(&set, text);
            let mut last = 0.0f64;
            for step in (0..15).rev() {
                let b = m.belief(&[0.1 * step as f64, 0.0]);
                assert!(b <= 0.0);
                assert!(b.abs() >= last.abs(), "{text}: {b} after {last}");
                last = b;
            }
        }
    }

    #[test]
    fn k_above_n_is_rejected() {
        let set = set_from(vec![vec![0.0, 0.0]], vec![vec![1.0, 1.0]]);
        let spec: ModelSpec = "strategy=nn k=3".parse().unwrap();
        assert!(spec.build_with_weights(&set, None).is_err());
    }

    #[test]
    fn weighted_measure_requires_weights() {
        let set = set_from(vec![vec![0.0, 0.0]], vec![vec![1.0, 1.0]]);
        let spec: ModelSpec = "strategy=nn k=1 measure=weighted-euclidean".parse().unwrap();
        assert!(spec.build_with_weights(&set, None).is_err());
        let w = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(spec.build_with_weights(&set, Some(&w)).is_ok());
    }
}
