//! Projective photon-counting tomography of qutrit states and of the memory
//! process.
//!
//! Each of the nine analysis projectors is measured in its own exposure window,
//! so counts are independent Poisson variates rather than a multinomial draw.

mod bootstrap;
mod counts;
mod mle;
mod process;
mod settings;

pub use bootstrap::{bootstrap_error, bootstrap_std, resample_counts};
pub use counts::{
    read_counts_csv, simulate_counts, simulate_probabilities, write_counts_csv, CountRecord,
    DetectionModel,
};
pub use mle::{
    reconstruct_from_frequencies, reconstruct_state, reconstruct_state_with, MleOptions,
    TomographyResult,
};
pub use process::{reconstruct_process, ProjectionOptions};
pub use settings::TomographySettings;

/// Fidelity above which storage is certified to beat any measure-and-prepare
/// strategy. Reported alongside the process-tomography result; its derivation
/// is not part of this crate.
pub const CLASSICAL_BOUND: f64 = 0.831;

/// Outcome of comparing a fidelity with [`CLASSICAL_BOUND`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BoundVerdict {
    Pass,
    Fail,
}

/// Strict comparison against the classical bound.
pub fn classical_bound_check(fidelity: f64) -> crate::Result<BoundVerdict> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(crate::Error::Validation(format!("fidelity {fidelity} outside [0, 1]")));
    }
    Ok(if fidelity > CLASSICAL_BOUND { BoundVerdict::Pass } else { BoundVerdict::Fail })
}
