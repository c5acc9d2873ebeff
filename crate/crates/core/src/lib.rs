//! Qubit networks longitudinally coupled to a hot multimode transmission line.
//!
//! - [`model`]: line geometry, modes and photon-mediated Ising couplings
//! - [`dynamics`]: exact finite-temperature gate dynamics and a Fock-space oracle
//! - [`compiler`]: Ising target matrices compiled into stroboscopic coupling cycles
//! - [`qaoa`]: Max-Cut QAOA on the single-mode model, ideal and with Lindblad noise
//! - [`budget`]: closed-form error budget
//! - [`dispersion`]: boundary-condition mode structure and nonlinear spectra
//!
//! Units: ħ = 1, temperatures are energies k_B·T in the frequency unit.

pub mod budget;
pub mod compiler;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod qaoa;
pub mod state;

pub use error::{Error, Result};
