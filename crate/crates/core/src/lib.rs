//! A desk-scale numerical laboratory for the linear dynamics of sets of
//! operators on finite truncations of sequence space.
//!
//! The crate computes orbits `Orb(Γ, x)` of operator families, certifies
//! ε-density against finite target grids, evaluates the hypercyclic-vector
//! grid `⋂ₙ⋃_T T⁻¹(Uₙ)`, runs transitivity / criterion / closure checks,
//! and verifies the axioms of diagonal C-regularized groups — all as
//! finite, deterministic, seeded procedures.

// Validation guards use `!(x > 0.0)` so NaN inputs are rejected too;
// rewriting them with `<=` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod operators;
pub mod reg_groups;
pub mod space;
pub mod structure;
pub mod testers;

pub use error::{LinDynError, Result};

/// Pass/fail outcome of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
        }
    }
}
