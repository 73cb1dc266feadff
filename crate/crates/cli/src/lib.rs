//! Scenario files, relay selection, experiment runners and the validation
//! suite behind the `cogrelay` binary.

// `!(x > 0.0)` guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod selection;
pub mod validate;
