use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::TomographySettings;
use crate::error::{validation, Error, Result};
use crate::qutrit::DensityMatrix;
use crate::rng::{derive_seed, poisson, rng_from_seed};

/// Photon counts recorded for one analysis setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_index: usize,
    pub counts: u64,
    /// Number of trials (pulses) in the exposure window.
    pub exposure: u64,
}

/// Detector-side parameters of the count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Probability that a photon in the analysed mode produces a click.
    pub eta_detect: f64,
    /// Background clicks per trial, independent of the state.
    pub noise_rate: f64,
}

impl DetectionModel {
    pub const IDEAL: DetectionModel = DetectionModel { eta_detect: 1.0, noise_rate: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta_detect) {
            return validation(format!("eta_detect {} outside [0, 1]", self.eta_detect));
        }
        if !(self.noise_rate >= 0.0) || !self.noise_rate.is_finite() {
            return validation(format!("noise_rate {} must be ≥ 0", self.noise_rate));
        }
        Ok(())
    }
}

/// Born-rule probabilities `Tr(ρ Πᵢ)` for every setting.
pub fn simulate_probabilities(rho: &DensityMatrix, settings: &TomographySettings) -> Vec<f64> {
    settings
        .projectors()
        .iter()
        .map(|p| rho.expectation(p).max(0.0))
        .collect()
}

/// Draw counts for every setting: Poisson with mean
/// `exposure · (Tr(ρΠᵢ)·η_detect + noise_rate)`. Setting `i` uses the stream
/// `derive_seed(seed, i)`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &TomographySettings,
    exposure: u64,
    model: DetectionModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if exposure == 0 {
        return validation("exposure must be ≥ 1");
    }
    model.validate()?;
    let probs = simulate_probabilities(rho, settings);
    Ok(probs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mean = exposure as f64 * (p * model.eta_detect + model.noise_rate);
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            CountRecord { setting_index: i, counts: poisson(&mut rng, mean), exposure }
        })
        .collect())
}

pub fn write_counts_csv<W: Write>(records: &[CountRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| Error::Reporting(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Reporting(e.to_string()))
}

pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (k, row) in rd.deserialize().enumerate() {
        // header is line 1
        let rec: CountRecord = row.map_err(|e| Error::Parse { line: k + 2, msg: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}
