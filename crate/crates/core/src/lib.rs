//! Optimal allocation of a shared chip resource (area, power, energy) across
//! accelerated execution segments, with closed forms, brute-force oracles and a CLI.

// NaN-rejecting comparisons like `!(x > 0.0)` are deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod model;
pub mod oracle;
pub mod report;
pub mod scenarios;
pub mod solver;
