//! Charged particles in a rotating magnetic field.
//!
//! A time-dependent unitary transformation `W(t) = exp(-i omega t j_z)`
//! maps the Schrödinger equation with a rotating field onto one with a
//! time-independent effective Hamiltonian. This crate builds those
//! Hamiltonians, their exact propagators and cyclic solutions, the
//! total/dynamic/geometric phase decomposition, and a fixed-step RK4
//! integrator of the original equation that checks all of it.
//!
//! Units: `hbar = 1`, particle mass `M = 1`, all couplings given as frequencies.

pub mod angular_momentum;
pub mod cli;
pub mod error;
pub mod heff;
pub mod linalg;
pub mod oracle;
pub mod phases;
pub mod propagator;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
