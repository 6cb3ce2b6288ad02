//! Belief estimators.
//!
//! Every model maps a configuration to a belief in `[-1, 1]` (`-1` free,
//! `+1` in collision) as a weighted average of the states of selected
//! training samples. Models are described by a [`ModelSpec`], which has a
//! one-line text form such as `strategy=nn k=10 measure=euclidean`.

pub mod delaunay;
pub mod kdtree;
pub mod neighbors;
pub mod predicates;
pub mod topo;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kinematics::ArmSpec;
use crate::sampling::{SampleClass, TrainingSet};
use crate::similarity::{importance_weights_for_set, MeasureKind};

pub use delaunay::{LocateTrace, SimplexId, Tessellation};
pub use kdtree::{KdTree, Neighbor, PruneBound, SearchStats};
pub use neighbors::{ann_node_budget, NeighborModel, TrainingData};
pub use topo::{TopoModel, DEFAULT_RHO};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_RADIUS: f64 = 1.5;
pub const DEFAULT_EPS: f64 = 0.5;

/// Anything that produces a belief for a configuration.
pub trait BeliefModel: Send + Sync {
    fn belief(&self, q: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> BeliefModel for F {
    fn belief(&self, q: &[f64]) -> f64 {
        self(q)
    }
}

/// `sum w S / sum w` over `(weight, class)` pairs. `None` for an empty list
/// or zero total weight.
pub fn belief_weighted_average<I>(neighbors: I) -> Option<f64>
where
    I: IntoIterator<Item = (f64, SampleClass)>,
{
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, class) in neighbors {
        debug_assert!(w >= 0.0);
        num += w * class.sign();
        den += w;
    }
    (den > 0.0).then(|| (num / den).clamp(-1.0, 1.0))
}

pub fn gaussian_weight(sim: f64, sigma2: f64) -> f64 {
    (-sim * sim / sigma2).exp()
}

pub fn epanechnikov_weight(sim: f64, r: f64) -> f64 {
    0.75 * (1.0 - sim * sim / (r * r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    ExactKnn { k: usize },
    ApproxKnn { k: usize, eps: f64 },
    FixedRadius { r: f64, kernel: Kernel },
    Topological { rho: f64 },
}

impl Strategy {
    pub const NAMES: [&'static str; 5] = ["nn", "ann", "gaussian", "epanechnikov", "topo"];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::ExactKnn { .. } => "nn",
            Strategy::ApproxKnn { .. } => "ann",
            Strategy::FixedRadius {
                kernel: Kernel::Gaussian,
                ..
            } => "gaussian",
            Strategy::FixedRadius {
                kernel: Kernel::Epanechnikov,
                ..
            } => "epanechnikov",
            Strategy::Topological { .. } => "topo",
        }
    }

    /// The swept parameter: `k`, `r` or `rho`.
    pub fn param(&self) -> f64 {
        match *self {
            Strategy::ExactKnn { k } | Strategy::ApproxKnn { k, .. } => k as f64,
            Strategy::FixedRadius { r, .. } => r,
            Strategy::Topological { rho } => rho,
        }
    }

    /// Same strategy with its swept parameter replaced.
    pub fn with_param(&self, p: f64) -> Result<Self> {
        let s = match *self {
            Strategy::ExactKnn { .. } => Strategy::ExactKnn { k: to_k(p)? },
            Strategy::ApproxKnn { eps, .. } => Strategy::ApproxKnn { k: to_k(p)?, eps },
            Strategy::FixedRadius { kernel, .. } => Strategy::FixedRadius { r: p, kernel },
            Strategy::Topological { .. } => Strategy::Topological { rho: p },
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match *self {
            Strategy::ExactKnn { k } | Strategy::ApproxKnn { k, .. } if k == 0 => bad("k must be at least 1".into()),
            Strategy::ApproxKnn { eps, .. } if !(eps >= 0.0 && eps.is_finite()) => {
                bad(format!("eps must be finite and non-negative, got {eps}"))
            }
            Strategy::FixedRadius { r, .. } if !(r > 0.0 && r.is_finite()) => {
                bad(format!("r must be positive, got {r}"))
            }
            Strategy::Topological { rho } if !(rho >= 0.0 && rho.is_finite()) => {
                bad(format!("rho must be finite and non-negative, got {rho}"))
            }
            _ => Ok(()),
        }
    }
}

fn to_k(p: f64) -> Result<usize> {
    if p >= 1.0 && p.fract() == 0.0 && p < 1e9 {
        Ok(p as usize)
    } else {
        Err(Error::InvalidInput(format!("k must be a positive integer, got {p}")))
    }
}

/// Strategy plus similarity measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    pub strategy: Strategy,
    pub measure: MeasureKind,
}

impl ModelSpec {
    pub fn new(strategy: Strategy, measure: MeasureKind) -> Result<Self> {
        strategy.validate()?;
        Ok(Self { strategy, measure })
    }

    /// Default parameters for a strategy name.
    pub fn default_for(name: &str, measure: MeasureKind) -> Result<Self> {
        let strategy = match name {
            "nn" => Strategy::ExactKnn { k: DEFAULT_K },
            "ann" => Strategy::ApproxKnn {
                k: DEFAULT_K,
                eps: DEFAULT_EPS,
            },
            "gaussian" => Strategy::FixedRadius {
                r: DEFAULT_RADIUS,
                kernel: Kernel::Gaussian,
            },
            "epanechnikov" => Strategy::FixedRadius {
                r: DEFAULT_RADIUS,
                kernel: Kernel::Epanechnikov,
            },
            "topo" => Strategy::Topological { rho: DEFAULT_RHO },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown strategy `{other}` (expected one of {})",
                    Strategy::NAMES.join(", ")
                )))
            }
        };
        Self::new(strategy, measure)
    }

    /// Build a model, computing importance weights if the measure needs them.
    pub fn build(&self, arm: &ArmSpec, set: &TrainingSet) -> Result<Model> {
        let weights = if self.measure.is_weighted() {
            Some(
                importance_weights_for_set(arm, set)?
                    .into_iter()
                    .map(|w| w.into_inner())
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        self.build_with_weights(set, weights.as_deref())
    }

    /// Build a model from precomputed importance weights (one row per
    /// sample in model order); `weights` may be `None` for unweighted
    /// measures.
    pub fn build_with_weights(&self, set: &TrainingSet, weights: Option<&[Vec<f64>]>) -> Result<Model> {
        let data = TrainingData::new(set, weights)?;
        if self.measure.is_weighted() && data.weights().is_none() {
            return Err(Error::InvalidInput(format!(
                "measure {} needs importance weights",
                self.measure
            )));
        }
        match self.strategy {
            Strategy::Topological { rho } => Ok(Model::Topo(TopoModel::build(data, self.measure, rho)?)),
            s => Ok(Model::Neighbor(NeighborModel::build(data, s, self.measure)?)),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "strategy={}", self.strategy.name())?;
        match self.strategy {
            Strategy::ExactKnn { k } => write!(f, " k={k}")?,
            Strategy::ApproxKnn { k, eps } => write!(f, " k={k} eps={eps}")?,
            Strategy::FixedRadius { r, .. } => write!(f, " r={r}")?,
            Strategy::Topological { rho } => write!(f, " rho={rho}")?,
        }
        write!(f, " measure={}", self.measure)
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Parse whitespace-separated `key=value` tokens. Keys: `strategy`
    /// (required), `measure`, `k`, `eps`, `r`, `rho`. Parameters not used by
    /// the strategy are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let mut strategy = None;
        let mut measure = MeasureKind::Euclidean;
        let mut k = None;
        let mut eps = None;
        let mut r = None;
        let mut rho = None;
        for tok in s.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("`{key}` needs a number, got `{value}`")))
            };
            match key {
                "strategy" => strategy = Some(value.to_string()),
                "measure" => measure = value.parse()?,
                "k" => k = Some(to_k(num()?)?),
                "eps" => eps = Some(num()?),
                "r" => r = Some(num()?),
                "rho" => rho = Some(num()?),
                other => return Err(Error::Parse(format!("unknown model key `{other}`"))),
            }
        }
        let name = strategy.ok_or_else(|| Error::Parse("missing strategy".into()))?;
        let mut spec = ModelSpec::default_for(&name, measure)?;
        let reject = |what: &str| {
            Err(Error::InvalidInput(format!(
                "`{what}` does not apply to strategy {name}"
            )))
        };
        match &mut spec.strategy {
            Strategy::ExactKnn { k: kk } => {
                if eps.is_some() {
                    return reject("eps");
                }
                if let Some(v) = k {
                    *kk = v;
                }
            }
            Strategy::ApproxKnn { k: kk, eps: e } => {
                if let Some(v) = k {
                    *kk = v;
                }
                if let Some(v) = eps {
                    *e = v;
                }
            }
            Strategy::FixedRadius { r: rr, .. } => {
                if k.is_some() {
                    return reject("k");
                }
                if eps.is_some() {
                    return reject("eps");
                }
                if let Some(v) = r {
                    *rr = v;
                }
            }
            Strategy::Topological { rho: p } => {
                if k.is_some() {
                    return reject("k");
                }
                if eps.is_some() {
                    return reject("eps");
                }
                if let Some(v) = rho {
                    *p = v;
                }
            }
        }
        if r.is_some() && !matches!(spec.strategy, Strategy::FixedRadius { .. }) {
            return reject("r");
        }
        if rho.is_some() && !matches!(spec.strategy, Strategy::Topological { .. }) {
            return reject("rho");
        }
        ModelSpec::new(spec.strategy, spec.measure)
    }
}

/// A built model of any strategy.
#[derive(Debug)]
pub enum Model {
    Neighbor(NeighborModel),
    Topo(TopoModel),
}

impl Model {
    pub fn belief(&self, q: &[f64]) -> f64 {
        match self {
            Model::Neighbor(m) => m.belief(q),
            Model::Topo(m) => m.belief(q),
        }
    }

    pub fn dof(&self) -> usize {
        match self {
            Model::Neighbor(m) => m.data().dim(),
            Model::Topo(m) => m.dof(),
        }
    }
}

impl BeliefModel for Model {
    fn belief(&self, q: &[f64]) -> f64 {
        Model::belief(self, q)
    }
}
