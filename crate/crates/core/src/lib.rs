//! Clustering families of point sets.
//!
//! The input is a family of n sets, each holding up to m points in R^d; a
//! query is a set of k centers, and a set is served by its best
//! (point, center) pair. This crate provides the loss catalogue and cost
//! primitives, a sampled robust median, layered (onion) sensitivity
//! sampling that compresses a family into a small weighted coreset, and
//! small-instance solvers (an exact enumeration oracle, an EM-style
//! alternating heuristic and a sampled approximate mean).

pub mod cost;
pub mod error;
pub mod family;
pub mod loss;
pub mod onion;
pub mod projection;
pub mod robust_median;
pub mod solvers;

pub use cost::{closest_fraction, family_cost, point_loss, set_cost};
pub use error::{Error, Result};
pub use family::{CenterSet, MSet, Point, SetFamily};
pub use loss::Loss;
pub use onion::{
    build_coreset, robust_med_for_sets, sensitivities, uniform_coreset, CoresetEntry,
    CoresetParams, CoresetSize, LayerResult, SensitivityMap, WeightedCoreset,
};
pub use projection::{closepoints_notail_proj, Projection};
pub use robust_median::{robust_median, verify_robust_median, GridSpec, MedianParams};
pub use solvers::{
    approx_mean, em_sets_kmeans, exact_oracle, exact_oracle_with_budget, SolveResult,
    DEFAULT_ENUMERATION_BUDGET,
};
