//! Exact post-quench correlation dynamics of the transverse-field Ising chain
//! and their recurrence quantification analysis.

pub mod ed;
pub mod error;
pub mod pfaffian;
pub mod pipeline;
pub mod recurrence;
pub mod spectral;
pub mod tfim;

pub use error::{Error, Result};
