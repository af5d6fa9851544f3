//! Mechanical detection of magnetic resonance in trapped molecules.
//!
//! - [`constants`]: pinned physical constants
//! - [`trap`]: molecule and trap parameters (ion and optical traps)
//! - [`oscillator`]: driven axial oscillator, integrator and readout rule
//! - [`protocol`]: spin lattice forces and gradient-inversion cancellation
//! - [`register`]: spin register with swap-based port readout
//! - [`readout`]: oscillator-backed port readout
//! - [`circuit`]: text programs for the register
//! - [`report`]: key -> (value, unit) documents

pub mod circuit;
pub mod constants;
pub mod oscillator;
pub mod protocol;
pub mod readout;
pub mod register;
pub mod report;
pub mod trap;

pub use constants::{constants, PhysicalConstants};
pub use report::Report;
