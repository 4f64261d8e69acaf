//! Subbotin graphical models.
//!
//! Multivariate densities proportional to `exp(Q(x))` whose node conditionals
//! are generalized normal (Subbotin) with shape `ν`, an exact Gibbs sampler,
//! graph recovery by ℓν-loss Lasso neighborhood selection, stability
//! selection, simulation generators for extreme-value regimes and baseline
//! estimators.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod dataset;
pub mod density;
pub mod error;
pub mod estimator;
pub mod gev;
pub mod graph;
mod optim;
pub mod sampler;
pub mod score;
pub mod seed;
pub mod shape;
pub mod simgen;
pub mod solver;
pub mod special;
pub mod stability;
pub mod theta;

pub use dataset::{standardize, Dataset};
pub use error::{Error, Result};
pub use estimator::{CombinationRule, SelectionOptions};
pub use graph::Graph;
pub use shape::ShapeParam;
pub use theta::ParamMatrix;
