//! Envelope extraction, echo and revival detection, amplitude comparison and
//! the cat-state parameter sweep.

mod detect;
mod envelope;
mod sweep;

pub use detect::*;
pub use envelope::*;
pub use sweep::*;
