//! Library side of the `lindyn` CLI: spec validation, experiment dispatch,
//! report emission, and the acceptance selftest.

// Validation guards use `!(x > 0.0)` so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod report;
pub mod runner;
pub mod selftest;
pub mod spec;
