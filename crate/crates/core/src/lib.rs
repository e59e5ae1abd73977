//! Multi-period planning of biomass, biogas and bio-ethanol supply chains.
//!
//! Datasets describe residue availability per supplier and month, plants and
//! national demand targets. Scenario builders turn them into linear programs
//! that the embedded simplex solver optimizes.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod conversion;
pub mod datamodel;
pub mod lp;
pub mod scenarios;
pub mod transport;

pub use config::Config;
pub use datamodel::Dataset;
