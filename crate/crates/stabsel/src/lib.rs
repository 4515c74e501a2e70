//! Complementary pairs stability selection.
//!
//! The crate aggregates a base variable-selection procedure over B disjoint
//! complementary subsample pairs and certifies, via shape-constrained Markov
//! inequalities, an upper bound on the expected number of low-selection-
//! probability variables that survive the aggregation. The pieces:
//!
//! * [`lattice`] — probability mass functions on the grid {0, 1/B, ..., 1}
//!   and their shape diagnostics (unimodality, r-concavity, log-concavity).
//! * [`bounds`] — worst-case, unimodal and r-concave tail bounds, the
//!   combined bound, and the threshold chooser built on it.
//! * [`resampling`] — complementary-pair subsample plans, plain or
//!   stratified by class label.
//! * [`cpss`] — selection-frequency aggregation and the CPSS / simultaneous
//!   selectors.
//! * [`selectors`] — l1-penalised linear and logistic regression by
//!   coordinate descent, with fixed-q tuning.
//! * [`simlab`] — synthetic scenarios, oracle quantities and the experiment
//!   runner used to validate the error control end to end.

pub mod bounds;
pub mod cpss;
pub mod dataset;
mod error;
pub mod lattice;
pub mod resampling;
pub mod selectors;
pub mod simlab;

pub use dataset::Dataset;
pub use error::{Error, Result};
