use std::io::Write;

use serde::{Deserialize, Serialize};

use super::timeline::StorageTimeline;
use crate::error::{validation, Error, Result};
use crate::rng::{derive_seed, poisson, rng_from_seed};

/// Calibration of one storage-and-detection chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryCalibration {
    /// Spin-wave storage efficiency of the comb in use.
    pub eta_sw: f64,
    /// Mean photon number per input pulse.
    pub mu: f64,
    /// Unconditional noise probability per detection window and trial.
    pub noise_rate: f64,
    pub detection_window_us: f64,
    /// Transmission and detection efficiency after the memory.
    pub eta_detect: f64,
}

impl Default for MemoryCalibration {
    /// Single-comb spin-wave storage at µ = 1.12. `eta_detect` and
    /// `noise_rate` are free parameters fitted once so that the retrieval
    /// window reaches SNR 39.7.
    fn default() -> Self {
        Self {
            eta_sw: 0.0551,
            mu: 1.12,
            noise_rate: 4.784e-4,
            detection_window_us: 1.0,
            eta_detect: 0.3,
        }
    }
}

impl MemoryCalibration {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_sw", self.eta_sw),
            ("noise_rate", self.noise_rate),
            ("eta_detect", self.eta_detect),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return validation(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return validation(format!("mu = {} must be ≥ 0", self.mu));
        }
        if !(self.detection_window_us > 0.0) {
            return validation(format!(
                "detection window must be > 0 µs, got {}",
                self.detection_window_us
            ));
        }
        Ok(())
    }

    /// Expected retrieved-signal counts per trial.
    pub fn signal_per_trial(&self) -> f64 {
        self.mu * self.eta_sw * self.eta_detect
    }
}

/// Half-open time interval `[start_us, end_us)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start_us: f64,
    pub end_us: f64,
}

impl TimeWindow {
    pub fn new(start_us: f64, end_us: f64) -> Self {
        Self { start_us, end_us }
    }

    pub fn centered(center_us: f64, width_us: f64) -> Self {
        Self::new(center_us - width_us / 2.0, center_us + width_us / 2.0)
    }

    pub fn duration_us(&self) -> f64 {
        self.end_us - self.start_us
    }

    fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.end_us.min(hi) - self.start_us.max(lo)).max(0.0)
    }
}

/// Uniform time bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub start_us: f64,
    pub width_us: f64,
    pub bins: usize,
}

impl Binning {
    pub const DEFAULT_WIDTH_US: f64 = 0.1;

    /// Bins spanning 2 µs before absorption to 3 µs after retrieval, aligned
    /// so the retrieval window starts on a bin edge.
    pub fn covering(timeline: &StorageTimeline, window_us: f64, width_us: f64) -> Result<Self> {
        if !(width_us > 0.0) {
            return validation(format!("bin width must be > 0, got {width_us}"));
        }
        let anchor = timeline.t_out_us - window_us / 2.0;
        let before = ((anchor - (timeline.t_in_us - 2.0)) / width_us).ceil();
        let start_us = anchor - before * width_us;
        let end_us = timeline.t_out_us + 3.0;
        let bins = ((end_us - start_us) / width_us).ceil() as usize;
        Ok(Self { start_us, width_us, bins })
    }

    fn edge(&self, k: usize) -> f64 {
        self.start_us + k as f64 * self.width_us
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub bin_edges_us: Vec<f64>,
    pub counts: Vec<u64>,
    pub trials: u64,
}

impl CountHistogram {
    pub fn empty(binning: &Binning) -> Self {
        Self {
            bin_edges_us: (0..=binning.bins).map(|k| binning.edge(k)).collect(),
            counts: vec![0; binning.bins],
            trials: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn range_us(&self) -> (f64, f64) {
        (self.bin_edges_us[0], self.bin_edges_us[self.bin_edges_us.len() - 1])
    }

    /// Add another histogram over the same bins.
    pub fn merge(&mut self, other: &CountHistogram) -> Result<()> {
        if self.bin_edges_us.len() != other.bin_edges_us.len()
            || self
                .bin_edges_us
                .iter()
                .zip(&other.bin_edges_us)
                .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return validation("cannot merge histograms with different bins");
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.trials += other.trials;
        Ok(())
    }

    /// Counts in bins whose centres fall inside `window`.
    pub fn window_counts(&self, window: TimeWindow) -> Result<u64> {
        let (lo, hi) = self.range_us();
        if !(window.duration_us() > 0.0) {
            return validation(format!(
                "window [{}, {}) µs has zero length",
                window.start_us, window.end_us
            ));
        }
        if window.start_us < lo - 1e-9 || window.end_us > hi + 1e-9 {
            return validation(format!(
                "window [{}, {}) µs outside histogram range [{lo}, {hi}) µs",
                window.start_us, window.end_us
            ));
        }
        Ok(self
            .bin_edges_us
            .windows(2)
            .zip(&self.counts)
            .filter(|(e, _)| {
                let c = 0.5 * (e[0] + e[1]);
                c >= window.start_us && c < window.end_us
            })
            .map(|(_, n)| n)
            .sum())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Reporting(e.to_string());
        w.write_record(["bin_start_us", "bin_end_us", "counts"]).map_err(io)?;
        for (e, n) in self.bin_edges_us.windows(2).zip(&self.counts) {
            w.write_record([format!("{:.4}", e[0]), format!("{:.4}", e[1]), n.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Reporting(e.to_string()))
    }
}

fn simulate_pulse(
    binning: &Binning,
    pulse: TimeWindow,
    signal_mean: f64,
    noise_mean_per_window: f64,
    trials: u64,
    seed: u64,
) -> CountHistogram {
    let mut hist = CountHistogram::empty(binning);
    hist.trials = trials;
    let width = pulse.duration_us();
    for (k, n) in hist.counts.iter_mut().enumerate() {
        let (lo, hi) = (binning.edge(k), binning.edge(k + 1));
        let mean = signal_mean * pulse.overlap(lo, hi) / width
            + noise_mean_per_window * (hi - lo) / width;
        *n = poisson(&mut rng_from_seed(derive_seed(seed, k as u64)), mean);
    }
    hist
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return validation("trials must be ≥ 1");
    }
    Ok(())
}

/// Retrieval histogram with default 0.1 µs bins.
pub fn simulate_detection(
    cal: &MemoryCalibration,
    timeline: &StorageTimeline,
    trials: u64,
    seed: u64,
) -> Result<CountHistogram> {
    let binning = Binning::covering(timeline, cal.detection_window_us, Binning::DEFAULT_WIDTH_US)?;
    simulate_detection_binned(cal, timeline, trials, seed, &binning)
}

/// Retrieved signal spread uniformly over a detection window centred on the
/// retrieval time, on top of a homogeneous Poisson noise floor.
pub fn simulate_detection_binned(
    cal: &MemoryCalibration,
    timeline: &StorageTimeline,
    trials: u64,
    seed: u64,
    binning: &Binning,
) -> Result<CountHistogram> {
    cal.validate()?;
    timeline.validate()?;
    check_trials(trials)?;
    let window = TimeWindow::centered(timeline.t_out_us, cal.detection_window_us);
    let n = trials as f64;
    Ok(simulate_pulse(
        binning,
        window,
        n * cal.signal_per_trial(),
        n * cal.noise_rate,
        trials,
        seed,
    ))
}

/// Input reference histogram: the unstored pulse at absorption time.
pub fn simulate_input(
    cal: &MemoryCalibration,
    timeline: &StorageTimeline,
    trials: u64,
    seed: u64,
) -> Result<CountHistogram> {
    cal.validate()?;
    check_trials(trials)?;
    let binning = Binning::covering(timeline, cal.detection_window_us, Binning::DEFAULT_WIDTH_US)?;
    let window = TimeWindow::centered(timeline.t_in_us, cal.detection_window_us);
    Ok(simulate_pulse(&binning, window, trials as f64 * cal.mu * cal.eta_detect, 0.0, trials, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Finite(f64),
    /// No counts in the noise window.
    Infinite,
}

impl Snr {
    pub fn value(self) -> f64 {
        match self {
            Snr::Finite(v) => v,
            Snr::Infinite => f64::INFINITY,
        }
    }
}

/// Counts in `signal` divided by counts in `noise`; windows must have equal
/// duration.
pub fn snr(hist: &CountHistogram, signal: TimeWindow, noise: TimeWindow) -> Result<Snr> {
    if (signal.duration_us() - noise.duration_us()).abs() > 1e-9 {
        return validation(format!(
            "signal window {} µs and noise window {} µs differ in duration",
            signal.duration_us(),
            noise.duration_us()
        ));
    }
    let s = hist.window_counts(signal)?;
    let n = hist.window_counts(noise)?;
    if n == 0 {
        return Ok(Snr::Infinite);
    }
    Ok(Snr::Finite(s as f64 / n as f64))
}
