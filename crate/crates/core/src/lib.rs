//! Coherently controlled molecular deposition.
//!
//! Sum-over-states susceptibilities of a two-state molecular superposition in
//! a two-color standing wave, the resulting optical potential, classical
//! trajectory ensembles through it and analysis of the deposited pattern.

// `!(x > 0.0)` guards are kept on purpose: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod datasets;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod mixture;
pub mod moldata;
pub mod potential;
pub mod suscept;
pub mod units;

pub use error::{Error, Result};
