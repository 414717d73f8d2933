use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Result};
use crate::memory::MemoryCalibration;
use crate::mux::{GridDims, LeakModel, MuxCalibration, TimingParams};

pub const DEFAULT_SEED: u64 = 2021;

/// Everything a scenario run depends on. Every block has defaults, so an
/// empty config file reproduces the calibrated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Scenario to run when none is given on the command line.
    pub scenario: Option<String>,
    pub seed: u64,
    /// Single-comb storage, µ = 1.12.
    pub calibration: MemoryCalibration,
    pub mux: MuxBlock,
    pub channel: ChannelBlock,
    pub grid: GridBlock,
    pub tomography: TomographyBlock,
    pub timing: TimingParams,
    /// Conversion schedule file replacing the built-in one of the `fig4`
    /// scenario. Relative paths are resolved against the config file.
    pub schedule: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: DEFAULT_SEED,
            calibration: MemoryCalibration::default(),
            mux: MuxBlock::default(),
            channel: ChannelBlock::default(),
            grid: GridBlock::default(),
            tomography: TomographyBlock::default(),
            timing: TimingParams::default(),
            schedule: None,
        }
    }
}

/// Multiplexed operation at µ = 1.04. The noise floor is higher than in
/// single-comb storage and was fitted once to the eight conversion
/// fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuxBlock {
    pub mu: f64,
    pub noise_rate: f64,
    pub comb_eta_sw: Vec<f64>,
    pub leak: LeakModel,
    /// Trials per mode in the crosstalk runs.
    pub trials: u64,
}

impl Default for MuxBlock {
    fn default() -> Self {
        Self { mu: 1.04, noise_rate: 8.611e-4, comb_eta_sw: vec![0.0505, 0.0513], leak: LeakModel::NONE, trials: 1_000_000 }
    }
}

/// Storage channel acting on the spatial qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelBlock {
    /// Depolarizing probability, fitted once to the process fidelity.
    pub depolarizing: f64,
}

impl Default for ChannelBlock {
    fn default() -> Self {
        Self { depolarizing: 0.024 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridBlock {
    pub nf: u32,
    pub nt: u32,
    pub ns: u32,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { nf: 2, nt: 2, ns: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyBlock {
    /// Trials per setting for each output channel.
    pub exposure: u64,
    /// Trials per setting for each process-tomography output.
    pub process_exposure: u64,
    pub resamples: usize,
    /// Trials of the storage histograms.
    pub histogram_trials: u64,
    /// Overrides the top-level seed for tomography streams.
    pub seed: Option<u64>,
}

impl Default for TomographyBlock {
    fn default() -> Self {
        Self { exposure: 125_000, process_exposure: 300_000, resamples: 100, histogram_trials: 80_000, seed: None }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.calibration.validate()?;
        self.mux_calibration().validate()?;
        self.timing.validate()?;
        GridDims::new(self.grid.nf, self.grid.nt, self.grid.ns)?;
        if !(0.0..=1.0).contains(&self.channel.depolarizing) {
            return validation(format!("channel.depolarizing = {} outside [0, 1]", self.channel.depolarizing));
        }
        let t = &self.tomography;
        if t.exposure == 0 || t.process_exposure == 0 || t.histogram_trials == 0 || self.mux.trials == 0 {
            return validation("exposures and trial counts must be ≥ 1");
        }
        if t.resamples < 100 {
            return validation(format!("tomography.resamples must be ≥ 100, got {}", t.resamples));
        }
        Ok(())
    }

    pub fn mux_calibration(&self) -> MuxCalibration {
        MuxCalibration {
            memory: MemoryCalibration { mu: self.mux.mu, noise_rate: self.mux.noise_rate, ..self.calibration },
            comb_eta_sw: self.mux.comb_eta_sw.clone(),
            leak: self.mux.leak,
        }
    }

    pub fn tomography_seed(&self) -> u64 {
        self.tomography.seed.unwrap_or(self.seed)
    }
}
