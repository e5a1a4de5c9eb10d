//! Anonymous roaming authentication for global mobility networks, a baseline
//! scheme it improves on, executable attacks against both, and a harness
//! that reproduces their communication and computation costs.

pub mod attacks;
pub mod cli;
pub mod crypto;
pub mod error;
pub mod harness;
pub mod mun;
pub mod proposed;
pub mod wire;
