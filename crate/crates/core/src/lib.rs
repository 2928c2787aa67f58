//! Classical simulator for amplitude amplification with coupled harmonic
//! oscillators.
//!
//! Register oscillators hold trial integers in number states; a marker
//! oscillator in a coherent state rotates in phase space at a rate set by a
//! function of those integers. Repeatedly evolving and conditioning the
//! marker on the coherent state that belongs to the wanted function value
//! concentrates the register on the solutions.
//!
//! * [`dynamics`]: rotation frequencies, reduced phase differences, overlaps.
//! * [`ensemble`]: sparse and product-binned register states.
//! * [`factoring`], [`search`], [`solver`]: the three algorithms.
//! * [`harness`]: command-line runner and report writers.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod factoring;
pub mod harness;
mod numeric;
pub mod rng;
pub mod schedule;
pub mod search;
pub mod solver;

pub use error::{Error, Result};

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
