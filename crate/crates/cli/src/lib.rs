//! Batch harness around the `minkowski-lab` numerics crate.
//!
//! The library half of the `minkowski-lab` binary: configuration loading
//! and validation ([`config`]), the ensemble runner and theory-curve
//! builder ([`runner`]), versioned CSV input/output ([`csvio`]), raw field
//! dumps ([`dump`]), theory-vs-simulation comparison reports ([`report`]),
//! the exact-identity and Monte Carlo battery ([`identities`]), and plot
//! data emission ([`plot`]).
//!
//! Everything here is deterministic by construction: a configuration file
//! plus a base seed fully determine every output byte, and parallel runs
//! aggregate per-realization results in index order.

// Guards are written `!(x < bound)` on purpose: a NaN must fail the guard
// the same way an out-of-range value does.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
pub mod dump;
pub mod identities;
pub mod plot;
pub mod report;
pub mod runner;
