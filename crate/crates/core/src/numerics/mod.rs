//! Grids, complex fields and spectral operators.
//!
//! Every quantity exchanged between modules is dimensionless: ħ = m = Ω_z = 1,
//! energies are in units of ħΩ_z, times in 1/Ω_z and lengths in the harmonic
//! oscillator length (ħ/mΩ_z)^{1/2} of the axial trap. In these units the
//! stationary equation reads
//!
//! ```text
//! μ ψ = [-½∇² + V(r) + g|ψ|²] ψ
//! ```
//!
//! with `g` the product of the interaction constant and the atom number.
//!
//! Axes are stored row-major with the shaking axis `z` always last:
//! `[z]` in 1D, `[x, z]` in 2D and `[x, y, z]` in 3D.

mod field;
mod grid;
mod spectral;

pub use field::{norm2, overlap, ComplexField, ScalarField};
pub use grid::GridSpec;
pub use spectral::{apply_kinetic_phase, KineticStep, Spectral};

pub use num_complex::Complex64;
