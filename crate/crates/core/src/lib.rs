//! Cone metric spaces over finite-dimensional ordered vector spaces.
//!
//! A cone `P ⊂ ℝⁿ` orders ℝⁿ by `x ≤ y ⇔ y − x ∈ P`. A cone metric assigns
//! each pair of points a distance in `P` and satisfies the metric axioms in
//! that order. Every cone metric `D` has a real-valued counterpart
//!
//! ```text
//! d(x, y) = inf { ‖u‖ : D(x, y) ≤ u }
//! ```
//!
//! which generates the same topology. This crate computes `d`, and checks
//! that contractive conditions stated for `D` carry over to `d` with the same
//! constants.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]
// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

extern crate alloc;

pub mod catalog;
pub mod cone;
pub mod equiv;
pub mod error;
pub mod fixedpoint;
pub mod linalg;
pub mod rng;
pub mod space;
pub mod suite;

pub use cone::{norm_eval, Cone, ConeKind, Norm, SolverConfig, Vector, Weights};
pub use equiv::{equivalent_distance, equivalent_metric_table, MinNormProblem, PhiSpec, Solution, SolverMethod};
pub use error::{Error, Result};
pub use space::{FiniteConeMetricSpace, SelfMap};
