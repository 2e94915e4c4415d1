//! Classical phase-space dynamics: exact free flow, integration through the
//! kick, Monte Carlo ensembles and closed-form references.

mod analytic;
mod dynamics;
mod ensemble;

pub use analytic::*;
pub use dynamics::*;
pub use ensemble::*;
