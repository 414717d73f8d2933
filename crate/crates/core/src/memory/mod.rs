//! Spectral structure, storage timing, detection statistics and SNR of the
//! spin-wave AFC memory.

mod comb;
mod detection;
mod timeline;

pub use comb::{
    build_spectral_structure, echo_efficiency, scan_echo_delay, spectral_capacity,
    temporal_capacity, AbsorptionProfile, AfcComb, EfficiencyModel, SpectralPrep, ToothShape,
    FILTER_WINDOW_HZ,
};
pub use detection::{
    simulate_detection, simulate_detection_binned, simulate_input, snr, Binning, CountHistogram, MemoryCalibration, Snr,
    TimeWindow,
};
pub use timeline::{storage_timeline, storage_timeline_with, ControlPair, StorageTimeline};

/// Microseconds per second.
pub(crate) const US_PER_S: f64 = 1e6;
