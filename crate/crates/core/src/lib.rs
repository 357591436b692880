//! Reference class forecasting and risk due diligence for major
//! infrastructure projects.
//!
//! The crate measures forecast inaccuracy in historical project data,
//! builds empirical distributions of cost overrun and traffic inaccuracy for
//! classes of comparable projects, turns those distributions into
//! risk-targeted uplifts for new estimates, stress-tests cost-benefit
//! appraisals, and simulates how funding competition between optimistic
//! appraisals selects the worst projects.
//!
//! All money amounts are taken to be in constant prices; nothing here
//! deflates or converts currencies.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod forecast;
pub mod refclass;
pub mod special;
pub mod unfittest;
pub mod viability;

pub use error::{Error, Result};

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 20_041_118;
