//! Pool allocation for wireless interference networks via survey
//! propagation on a SAT-style encoding, with greedy and belief-propagation
//! baselines, graph metrics and a seeded experiment harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod csp;
pub mod decimate;
pub mod experiment;
pub mod metrics;
pub mod net;
pub mod sp;
