//! Link-level analysis and multi-user power allocation for personalized
//! semantic triplet transmission from a multi-antenna UAV.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] — Gamma, incomplete Gamma, Beta, Gauss hypergeometric and
//!   Meijer-G functions.
//! * [`quad`] — adaptive Gauss–Kronrod quadrature used by every "exact"
//!   reference path.
//! * [`fading`] — Fisher-Snedecor F fading, Gamma interference and the SINR
//!   distribution (quadrature, approximate, asymptotic, Monte Carlo).
//! * [`linkperf`] — outage, bit error and triplet drop probabilities.
//! * [`semantics`] — heatmaps, triplets, attention fusion, priorities, match
//!   scores and dataset I/O.
//! * [`allocation`] — Nash-bargaining power allocation with a real-coded
//!   genetic algorithm and the baseline allocators.
//! * [`harness`] — scenario configuration, experiment runners and CSV output.

// `!(x > 0.0)` is how NaN gets rejected together with the bad range
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod allocation;
pub mod error;
pub mod fading;
pub mod harness;
pub mod linkperf;
pub mod quad;
pub mod rng;
pub mod semantics;
pub mod specfun;

pub use error::{Error, Result};

/// Converts a power ratio in decibels to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
