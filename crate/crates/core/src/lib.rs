//! Gaussian (free-fermion) simulation of the continuously monitored
//! transverse-field Ising chain.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: model parameters, the non-Hermitian quasiparticle spectrum
//!   and the no-click vacuum amplitudes;
//! - [`dynamics`]: quantum-jump trajectories of the fermionic correlation
//!   matrices `(C, F)`;
//! - [`correlators`]: Majorana two-point blocks, Pfaffians and connected
//!   spin-spin correlators;
//! - [`entanglement`]: von Neumann entropy of contiguous blocks;
//! - [`qfi`]: the quantum Fisher information quadratic form and its
//!   maximisation by simulated annealing;
//! - [`analysis`]: power-law / decay fits and ensemble statistics;
//! - [`noclick`]: the stationary no-click pipeline and phase-diagram scans.
//!
//! Units: `J = 1` throughout; entropies are in nats.

pub mod analysis;
pub mod correlators;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod noclick;
mod par;
pub mod qfi;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use faer::c64;
pub use spectral::ModelParams;
