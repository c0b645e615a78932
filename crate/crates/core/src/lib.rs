//! Split-step spectral engine for Bose-Einstein condensates in periodically
//! shaken, energy-truncated harmonic traps.
//!
//! The crate covers the single-component Gross-Pitaevskii equation in a trap
//! `V(r + α(t)e_z)` (optionally replaced by its drive-period average), the
//! stationary problem for the chemical potential, a two-internal-state model
//! with microwave coupling, absorbing boundaries for escape-rate studies, and
//! the diagnostics used to classify condensate splitting.
//!
//! See `examples/` for one runnable program per capability.

// validation rejects NaN with `!(x > 0.0)`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod groundstate;
pub mod numerics;
pub mod observables;
pub mod potentials;
pub mod propagation;

pub use error::{Error, Result};
