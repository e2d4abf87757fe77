//! File formats, reports and the `cmk` command line for
//! [`cone_metric_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod report;

pub use error::KitError;
