//! Probabilistic collision-belief models of a robot arm's configuration
//! space.
//!
//! A training set of collision-checked configurations is drawn from a Sobol
//! sequence; belief models then estimate, for an unseen configuration, a
//! signed score in `[-1, 1]` (`-1` free, `+1` in collision) from nearby
//! samples. Four neighbor strategies are provided (exact k-NN, approximate
//! k-NN, fixed-radius Gaussian and Epanechnikov kernels) under four
//! similarity measures, plus a topological estimator built on a Delaunay
//! tessellation of the shoulder/elbow joints.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod kinematics;
pub mod sampling;
pub mod similarity;

pub use error::{Error, Result};
