//! Bloch oscillations of path-entangled (NOON) photon states in a tilted
//! one-dimensional waveguide lattice.
//!
//! The crate is split along the physics:
//!
//! * [`propagator`] builds the single-photon transfer matrix of the lattice,
//!   analytically from Bessel functions and numerically from the
//!   coupled-mode equations.
//! * [`state`] expands a NOON input into its exact N-photon output
//!   occupation distribution.
//! * [`correlation`] evaluates photon densities, multiple-detection
//!   probabilities, normalized coincidence ratios and their oscillation
//!   period.
//!
//! Everything here is pure computation and only needs `alloc`. File formats
//! and the command line live in the `noonbloch` crate.
#![no_std]

extern crate alloc;

pub mod bessel;
pub mod correlation;
mod error;
pub mod lattice;
pub mod propagator;
pub mod state;

pub use num_complex::Complex64;

pub use crate::error::{Error, Result};
pub use crate::lattice::{LatticeParams, LatticeWindow, ZGrid};
