//! Underlay two-way relaying: special functions, channel laws, water-filling
//! power control, per-draw SIRs, and outage and rate analysis.

// `!(x > 0.0)` guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference values are quoted at full published precision
#![allow(clippy::excessive_precision)]

pub mod analysis;
pub mod channels;
pub mod mathkernel;
pub mod power;
pub mod relaying;
