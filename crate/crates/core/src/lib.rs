//! Group SLOPE and sparse-group SLOPE with strong screening rules.
//!
//! The crate fits sorted-l1 penalized regressions (SLOPE, group SLOPE,
//! sparse-group SLOPE and their OSCAR-weighted variants) along a
//! regularization path. Before each fit, strong screening rules discard groups
//! and variables that are predicted to stay at zero; KKT checks after the fit
//! catch any discarded index that should have been active and trigger a refit.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dist;
pub mod error;
pub mod groups;
pub mod kkt;
pub mod path;
pub mod penalty;
pub mod screening;
pub mod solver;
pub mod sort;
pub mod weights;
pub mod synth;
pub mod io;
pub mod bench;
pub mod cli;

pub use data::{Coefficients, Dataset, Loss};
pub use error::{Error, Result};
pub use groups::{group_reduce, GroupStructure};
pub use penalty::{PenaltyKind, PenaltySpec};
pub use weights::{PenaltyWeights, Scheme, WeightConfig};
