//! Operator-learning toolkit for transient vector fields.
//!
//! The crate generates transient physics datasets (lid-driven cavity flow,
//! path-dependent bar plasticity), trains a sequential deep operator network
//! that maps a time-dependent load history to full-field multi-component
//! solutions at all output steps, and runs genetic-algorithm inverse load
//! identification against the trained surrogate.

pub mod cavity;
pub mod error;
pub mod ga;
pub mod io;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod plasticity;
pub mod rbi;
pub mod train;

pub use error::{Error, Result};
