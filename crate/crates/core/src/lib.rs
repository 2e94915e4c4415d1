//! Classical and quantum echo simulator for a parametrically kicked Kerr oscillator.
//!
//! The crate contains Monte Carlo and Fock-space engines, a Lindblad
//! master-equation solver, closed-form reference results for each of them, and
//! the signal analysis used to detect echoes and revivals in the resulting traces.

pub mod error;
pub mod model;
pub mod ode;
pub mod output;
pub mod analysis;
pub mod classical;
pub mod quadrature;
pub mod quantum;
pub mod scenario;
pub mod series;
pub mod lindblad;
pub mod special;

pub use error::{ConfigIssue, Error, Result};

/// Version of the engine crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
