//! Quantum work statistics for sudden quenches.
//!
//! * [`spectral_core`]: two-point-measurement work distributions, Gibbs
//!   states, entropy production and fluctuation identities by exact
//!   diagonalization.
//! * [`quench_ground`]: ground-state quenches as film partition functions,
//!   fidelity, generalized susceptibilities and edge fits.
//! * [`ising_chain`]: free-fermion transverse-field Ising backend with a
//!   brute-force spin-chain oracle.
//! * [`large_dev`]: excess free energy, Legendre–Fenchel rate functions and
//!   scaling collapse.
//! * [`fermi_impurity`]: orthogonality catastrophe and Fermi-edge dynamics of
//!   a localized scatterer in a free Fermi gas.

pub mod error;
pub mod fermi_impurity;
pub mod numerics;
pub mod ising_chain;
pub mod large_dev;
pub mod quench_ground;
pub mod spectral_core;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
