//! Fock-space dynamics of the kicked Kerr oscillator and its closed-form
//! references: coherent and cat states, fractional revivals and kicked echoes.

mod analytic;
mod fock;
mod kick;
mod propagate;
mod revival;
mod states;

pub use analytic::*;
pub use fock::*;
pub use kick::*;
pub use propagate::*;
pub use revival::*;
pub use states::*;
