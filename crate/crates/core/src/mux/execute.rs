use serde::Serialize;

use super::plan::PulseTimeline;
use super::{ChannelPayload, ModeId, MuxCalibration};
use crate::error::{Error, Result};
use crate::memory::{Binning, CountHistogram, TimeWindow};
use crate::qutrit::{state_fidelity, DensityMatrix, ProcessMatrix};
use crate::rng::{derive_seed, poisson, rng_from_seed};
use crate::tomography::{
    bootstrap_error, reconstruct_state, simulate_counts, CountRecord, DetectionModel,
    TomographySettings,
};

/// A retrieved channel.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPayload {
    pub source: ModeId,
    pub mode: ModeId,
    pub state: Option<DensityMatrix>,
    /// Mean input photons routed to this output.
    pub mean_photons: f64,
    /// Expected detected signal per trial.
    pub signal_per_trial: f64,
    pub t_out_us: f64,
    pub phase: Option<f64>,
    pub merged: bool,
}

impl OutputPayload {
    pub fn label(&self) -> String {
        format!("{}->{}", self.source, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub outputs: Vec<OutputPayload>,
    pub histogram: CountHistogram,
}

/// Run a compiled plan. Each output state is the input state passed through
/// `channel` (unchanged when `None`); the histogram holds every output's
/// retrieved signal inside its gate window plus the noise floor.
pub fn execute_conversion(
    payloads: &[ChannelPayload],
    plan: &PulseTimeline,
    cal: &MuxCalibration,
    channel: Option<&ProcessMatrix>,
    trials: u64,
    seed: u64,
) -> Result<Execution> {
    cal.validate()?;
    plan.validate()?;
    if trials == 0 {
        return Err(Error::Validation("trials must be ≥ 1".into()));
    }
    let mut planned: Vec<ModeId> = plan.channels.iter().map(|c| c.source).collect();
    let mut given: Vec<ModeId> = payloads.iter().map(|p| p.mode).collect();
    planned.sort();
    given.sort();
    if planned != given {
        let show = |v: &[ModeId]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        return Err(Error::Execution(format!(
            "plan covers [{}] but payloads are [{}]",
            show(&planned),
            show(&given)
        )));
    }

    let mut outputs = Vec::with_capacity(plan.output_count());
    for c in &plan.channels {
        let p = payloads.iter().find(|p| p.mode == c.source).expect("checked above");
        let state = match (&p.state, channel) {
            (Some(rho), Some(ch)) => Some(ch.apply(rho)?),
            (s, _) => *s,
        };
        for o in &c.outputs {
            let mean_photons = p.mean_photons * o.fraction;
            outputs.push(OutputPayload {
                source: c.source,
                mode: o.mode,
                state,
                mean_photons,
                signal_per_trial: cal.signal_per_trial(c.source.f, mean_photons),
                t_out_us: o.t_out_us,
                phase: o.phase,
                merged: o.merge,
            });
        }
    }

    let last = outputs
        .iter()
        .map(|o| o.t_out_us)
        .chain(plan.channels.iter().map(|c| c.t_echo_us + plan.timing.base_spin_us))
        .fold(0.0, f64::max);
    let width = Binning::DEFAULT_WIDTH_US;
    let start_us = -2.0;
    let binning = Binning { start_us, width_us: width, bins: ((last + 3.0 - start_us) / width).ceil() as usize };
    let mut histogram = CountHistogram::empty(&binning);
    histogram.trials = trials;
    let n = trials as f64;
    let window = cal.memory.detection_window_us;
    let gates: Vec<(TimeWindow, f64)> = plan
        .outputs()
        .zip(&outputs)
        .map(|((_, g), o)| (g.gate, n * o.signal_per_trial))
        .collect();
    for (k, count) in histogram.counts.iter_mut().enumerate() {
        let lo = start_us + k as f64 * width;
        let hi = lo + width;
        let signal: f64 = gates
            .iter()
            .map(|(g, s)| s * (g.end_us.min(hi) - g.start_us.max(lo)).max(0.0) / g.duration_us())
            .sum();
        let mean = signal + n * cal.memory.noise_rate * width / window;
        *count = poisson(&mut rng_from_seed(derive_seed(seed, k as u64)), mean);
    }
    Ok(Execution { outputs, histogram })
}

/// Tomography data of one output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTomography {
    pub label: String,
    /// State the reconstruction is compared against.
    pub reference: DensityMatrix,
    pub records: Vec<CountRecord>,
}

/// Simulate `exposure` trials per tomography setting for every output that
/// carries a state. Counts per setting have mean
/// `exposure · (Tr(ρΠᵢ)·signal_per_trial + noise_rate)`.
pub fn simulate_channel_tomography(
    outputs: &[OutputPayload],
    payloads: &[ChannelPayload],
    cal: &MuxCalibration,
    settings: &TomographySettings,
    exposure: u64,
    seed: u64,
) -> Result<Vec<ChannelTomography>> {
    outputs
        .iter()
        .enumerate()
        .filter_map(|(k, o)| o.state.as_ref().map(|rho| (k, o, rho)))
        .map(|(k, o, rho)| {
            let reference = payloads
                .iter()
                .find(|p| p.mode == o.source)
                .and_then(|p| p.state)
                .ok_or_else(|| Error::Execution(format!("no input state for {}", o.source)))?;
            let model = DetectionModel { eta_detect: o.signal_per_trial, noise_rate: cal.memory.noise_rate };
            let records = simulate_counts(rho, settings, exposure, model, derive_seed(seed, k as u64))?;
            Ok(ChannelTomography { label: o.label(), reference, records })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub label: String,
    pub fidelity: f64,
    pub std: f64,
}

/// Reconstruct every channel and report its fidelity to the reference with a
/// bootstrap standard deviation.
pub fn channel_fidelity_report(
    channels: &[ChannelTomography],
    settings: &TomographySettings,
    resamples: usize,
    seed: u64,
) -> Result<Vec<FidelityRow>> {
    channels
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if c.records.is_empty() || c.records.iter().all(|r| r.counts == 0) {
                return Err(Error::Reporting(format!("no tomography counts for {}", c.label)));
            }
            let est = reconstruct_state(&c.records, settings)
                .map_err(|e| Error::Reporting(format!("{}: {e}", c.label)))?;
            let std = bootstrap_error(&c.records, settings, &c.reference, resamples, derive_seed(seed, k as u64))?;
            Ok(FidelityRow { label: c.label.clone(), fidelity: state_fidelity(&c.reference, &est.rho_hat), std })
        })
        .collect()
}
