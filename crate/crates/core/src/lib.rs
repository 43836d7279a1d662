//! Pulse engineering for stimulated Raman adiabatic passage (STIRAP) and its
//! shortcut-to-adiabatic variant (STIRSAP) in a far-detuned Λ system.
//!
//! The crate synthesizes the original Gaussian pulse pair and the reshaped
//! shortcut pair, propagates the three-level and effective two-level
//! Schrödinger equations under them, and runs the transfer, speed-up,
//! robustness, multi-cycle and Bloch-sphere campaigns.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod pulse;
pub mod types;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use types::*;
