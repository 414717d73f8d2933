use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ModeId, Spatial};
use crate::error::{validation, Error, Result};
use crate::memory::MemoryCalibration;
use crate::qutrit::DensityMatrix;
use crate::rng::{derive_seed, poisson, rng_from_seed};

/// One input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPayload {
    pub mode: ModeId,
    /// Spatial qutrit carried by the channel; `None` for a classical marker.
    pub state: Option<DensityMatrix>,
    pub mean_photons: f64,
}

impl ChannelPayload {
    pub fn marker(mode: ModeId, mean_photons: f64) -> Self {
        Self { mode, state: None, mean_photons }
    }

    pub fn qutrit(mode: ModeId, state: DensityMatrix, mean_photons: f64) -> Self {
        Self { mode, state: Some(state), mean_photons }
    }
}

/// Fraction of a channel's retrieved signal that lands in a mode differing
/// in the given degree of freedom. A mode differing in several DOFs gets the
/// product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakModel {
    pub spectral: f64,
    pub temporal: f64,
    pub spatial: f64,
}

impl LeakModel {
    pub const NONE: LeakModel = LeakModel { spectral: 0.0, temporal: 0.0, spatial: 0.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("spectral", self.spectral), ("temporal", self.temporal), ("spatial", self.spatial)] {
            if !(0.0..1.0).contains(&v) {
                return validation(format!("{name} leak {v} outside [0, 1)"));
            }
        }
        Ok(())
    }

    pub fn between(&self, a: &ModeId, b: &ModeId) -> f64 {
        if a == b {
            return 1.0;
        }
        let mut leak = 1.0;
        if a.f != b.f {
            leak *= self.spectral;
        }
        if a.t != b.t {
            leak *= self.temporal;
        }
        if a.s != b.s {
            leak *= self.spatial;
        }
        leak
    }
}

/// Memory calibration plus the per-comb efficiencies and leakage of a
/// multiplexed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuxCalibration {
    pub memory: MemoryCalibration,
    /// Spin-wave efficiency of comb `f` at index `f − 1`; combs past the end
    /// use `memory.eta_sw`.
    pub comb_eta_sw: Vec<f64>,
    pub leak: LeakModel,
}

impl Default for MuxCalibration {
    fn default() -> Self {
        Self {
            memory: MemoryCalibration { mu: 1.04, ..MemoryCalibration::default() },
            comb_eta_sw: vec![0.0505, 0.0513],
            leak: LeakModel::NONE,
        }
    }
}

impl MuxCalibration {
    pub fn validate(&self) -> Result<()> {
        self.memory.validate()?;
        self.leak.validate()?;
        if let Some(e) = self.comb_eta_sw.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return validation(format!("comb efficiency {e} outside [0, 1]"));
        }
        Ok(())
    }

    pub fn eta_sw(&self, f: u32) -> f64 {
        self.comb_eta_sw.get(f as usize - 1).copied().unwrap_or(self.memory.eta_sw)
    }

    /// Expected retrieved counts per trial for `mean_photons` stored in comb `f`.
    pub fn signal_per_trial(&self, f: u32, mean_photons: f64) -> f64 {
        mean_photons * self.eta_sw(f) * self.memory.eta_detect
    }
}

/// Input-mode × output-mode counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstalkMatrix {
    pub modes: Vec<ModeId>,
    pub counts: Vec<Vec<u64>>,
}

impl CrosstalkMatrix {
    pub fn new(modes: Vec<ModeId>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != modes.len() || counts.iter().any(|r| r.len() != modes.len()) {
            return validation("crosstalk matrix must be square with one row per mode");
        }
        Ok(Self { modes, counts })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Reporting(e.to_string());
        let mut header = vec!["input".to_string()];
        header.extend(self.modes.iter().map(ToString::to_string));
        w.write_record(&header).map_err(io)?;
        for (m, row) in self.modes.iter().zip(&self.counts) {
            let mut rec = vec![m.to_string()];
            rec.extend(row.iter().map(ToString::to_string));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Reporting(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// No off-diagonal counts in any row.
    Infinite,
}

impl Ratio {
    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(v) => v,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

/// Simulated storage of all `inputs` in parallel, read out in every input
/// mode.
pub fn run_multiplexed(
    inputs: &[ChannelPayload],
    cal: &MuxCalibration,
    trials: u64,
    seed: u64,
) -> Result<CrosstalkMatrix> {
    cal.validate()?;
    if trials == 0 {
        return validation("trials must be ≥ 1");
    }
    let mut seen = HashSet::new();
    for p in inputs {
        if !seen.insert(p.mode) {
            return validation(format!("duplicate input mode {}", p.mode));
        }
        if !(p.mean_photons >= 0.0) {
            return validation(format!("mean photon number of {} must be ≥ 0", p.mode));
        }
    }
    let n = inputs.len();
    let trials = trials as f64;
    let noise = trials * cal.memory.noise_rate;
    let counts = inputs
        .iter()
        .enumerate()
        .map(|(i, src)| {
            let signal = trials * cal.signal_per_trial(src.mode.f, src.mean_photons);
            inputs
                .iter()
                .enumerate()
                .map(|(j, dst)| {
                    let mean = if i == j {
                        signal
                    } else {
                        noise + cal.leak.between(&src.mode, &dst.mode) * signal
                    };
                    let stream = (i * n + j) as u64;
                    poisson(&mut rng_from_seed(derive_seed(seed, stream)), mean)
                })
                .collect()
        })
        .collect();
    CrosstalkMatrix::new(inputs.iter().map(|p| p.mode).collect(), counts)
}

/// Per-row diagonal count over the row's largest off-diagonal count; rows
/// without off-diagonal counts give `Infinite`.
pub fn row_ratios(m: &CrosstalkMatrix) -> Vec<Ratio> {
    m.counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let off = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| *c).max().unwrap_or(0);
            if off == 0 {
                Ratio::Infinite
            } else {
                Ratio::Finite(row[i] as f64 / off as f64)
            }
        })
        .collect()
}

/// Minimum over rows of [`row_ratios`].
pub fn crosstalk_min(m: &CrosstalkMatrix) -> Result<Ratio> {
    if m.is_empty() {
        return validation("empty crosstalk matrix");
    }
    Ok(row_ratios(m)
        .into_iter()
        .filter_map(|r| match r {
            Ratio::Finite(v) => Some(v),
            Ratio::Infinite => None,
        })
        .min_by(f64::total_cmp)
        .map_or(Ratio::Infinite, Ratio::Finite))
}

/// Path-encoded payloads for every mode of a grid, each carrying its path's
/// OAM basis state when `ns ≤ 3`.
pub fn path_payloads(modes: &[ModeId], mean_photons: f64) -> Vec<ChannelPayload> {
    modes
        .iter()
        .map(|m| match m.s {
            Spatial::Path(_) => match m.s.oam() {
                Some(b) => ChannelPayload::qutrit(
                    *m,
                    crate::qutrit::QutritKet::basis(b).to_density(),
                    mean_photons,
                ),
                None => ChannelPayload::marker(*m, mean_photons),
            },
            Spatial::Qutrit => ChannelPayload::marker(*m, mean_photons),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mux::mode_grid;

    fn clean() -> MuxCalibration {
        MuxCalibration {
            memory: MemoryCalibration { noise_rate: 0.0, ..MemoryCalibration::default() },
            leak: LeakModel::NONE,
            ..Default::default()
        }
    }

    #[test]
    fn no_leak_no_noise_is_diagonal() {
        let modes = mode_grid(2, 2, 3).unwrap();
        let m = run_multiplexed(&path_payloads(&modes, 1.04), &clean(), 100_000, 1).unwrap();
        for (i, row) in m.counts.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if i == j {
                    assert!(*c > 0);
                } else {
                    assert_eq!(*c, 0);
                }
            }
        }
        assert_eq!(crosstalk_min(&m).unwrap(), Ratio::Infinite);
    }

    #[test]
    fn duplicate_modes_rejected() {
        let p = ChannelPayload::marker(ModeId::qutrit(1, 1), 1.0);
        assert!(run_multiplexed(&[p.clone(), p], &clean(), 10, 1).is_err());
    }

    #[test]
    fn crosstalk_min_examples() {
        let modes = mode_grid(1, 1, 3).unwrap();
        let m = CrosstalkMatrix::new(modes.clone(), vec![vec![20, 1, 1], vec![1, 20, 1], vec![1, 1, 20]]).unwrap();
        assert_eq!(crosstalk_min(&m).unwrap(), Ratio::Finite(20.0));
        let m = CrosstalkMatrix::new(modes, vec![vec![0, 1, 1], vec![1, 20, 1], vec![1, 1, 20]]).unwrap();
        assert_eq!(crosstalk_min(&m).unwrap(), Ratio::Finite(0.0));
        let empty = CrosstalkMatrix::new(vec![], vec![]).unwrap();
        assert!(crosstalk_min(&empty).is_err());
    }

    #[test]
    fn diagonal_mean_per_comb() {
        let modes = [ModeId::qutrit(1, 1), ModeId::qutrit(2, 1)];
        let payloads: Vec<_> = modes.iter().map(|m| ChannelPayload::marker(*m, 1.0)).collect();
        let trials = 10_000_000;
        let m = run_multiplexed(&payloads, &clean(), trials, 4).unwrap();
        for (k, eta) in [0.0505, 0.0513].into_iter().enumerate() {
            let mean = trials as f64 * eta * 0.3;
            let c = m.counts[k][k] as f64;
            assert!((c - mean).abs() < 5.0 * mean.sqrt(), "{c} vs {mean}");
        }
    }

    #[test]
    fn leak_is_product_over_differing_dofs() {
        let l = LeakModel { spectral: 0.1, temporal: 0.2, spatial: 0.5 };
        let a = ModeId::path(1, 1, 1);
        assert_eq!(l.between(&a, &a), 1.0);
        assert_eq!(l.between(&a, &ModeId::path(2, 1, 1)), 0.1);
        assert!((l.between(&a, &ModeId::path(2, 2, 2)) - 0.01).abs() < 1e-15);
        assert!(LeakModel { spectral: 1.0, ..l }.validate().is_err());
    }

    #[test]
    fn csv_export() {
        let modes = vec![ModeId::qutrit(1, 1), ModeId::qutrit(1, 2)];
        let m = CrosstalkMatrix::new(modes, vec![vec![9, 1], vec![0, 7]]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "input,f1t1,f1t2\nf1t1,9,1\nf1t2,0,7\n");
    }
}
