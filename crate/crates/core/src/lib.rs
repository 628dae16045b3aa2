//! Numerical verification of compatibility conditions for Lie algebroids
//! with connections, sampled over a single coordinate chart.

// Tensor code indexes several arrays with the same loop variables.
#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod exprjet;
pub mod fixtures;
pub mod foliation;
pub mod freealg;
pub mod model;
pub mod par;
