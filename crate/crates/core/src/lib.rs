//! Numerical core for a dissipative bosonic Josephson junction whose
//! interaction parameter is modulated sinusoidally.
//!
//! Everything here is `no_std` (with `alloc`): the two-mode equations, an
//! adaptive Dormand–Prince integrator with a singularity guard, closed-form
//! linear theory around the steady states, the slow-flow (Arnold tongue)
//! stability analysis, signal diagnostics and the trap-to-interaction chain.
//! File formats, presets and the command line live in the `bjj-lab` crate.

#![no_std]

extern crate alloc;

mod error;
pub mod math;

pub mod diagnostics;
pub mod linear;
pub mod model;
pub mod ode;
pub mod slowflow;
pub mod trap;

pub use error::{Error, Result};
pub use model::{Drive, RawParams, State, SystemParams, Termination, Trajectory};
