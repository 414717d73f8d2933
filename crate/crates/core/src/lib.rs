//! Simulation and analysis toolkit for a multiplexed atomic-frequency-comb
//! quantum memory storing orbital-angular-momentum qutrits.
//!
//! - [`qutrit`]: states, the λ operator basis, process matrices, fidelities.
//! - [`tomography`]: photon-count simulation, maximum-likelihood state
//!   reconstruction, process tomography and bootstrap error bars.
//! - [`memory`]: comb spectra, storage timing, detection histograms and SNR.
//! - [`mux`]: the (f, t, s) mode grid, crosstalk, and mode-conversion schedules.
//! - [`scenarios`]: calibrated end-to-end runs with machine-readable reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod memory;
pub mod mux;
pub mod qutrit;
pub mod rng;
pub mod scenarios;
pub mod tomography;

pub use error::{Error, Result};
