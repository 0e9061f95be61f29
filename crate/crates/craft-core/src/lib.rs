//! Nonparametric clustering with cluster-specific feature selection for
//! mixed categorical/numeric data, plus the degenerate baselines it
//! generalizes, lambda selection, planted-subspace generators, and
//! evaluation metrics.

pub mod baselines;
pub mod engine;
pub mod error;
pub mod io;
pub mod lambda;
pub mod metrics;
pub mod model;
pub mod synth;

pub use engine::{craft_fit, craft_fit_with, ClusteringResult, Forcings};
pub use error::{CraftError, Result};
pub use model::{BudgetMode, ClusterState, Dataset, Hyperparams, Rho, Schema};
