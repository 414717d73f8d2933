use serde::{Deserialize, Serialize};

use super::schedule::{ConversionOp, Schedule, ScheduledOp};
use super::{GridDims, ModeId};
use crate::error::{Error, Result};
use crate::memory::TimeWindow;

const EPS_US: f64 = 1e-9;

/// Slot geometry and control constraints, times in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    pub delta_hz: f64,
    /// Spacing of temporal slots, both at input and at output.
    pub slot_pitch_us: f64,
    /// Spin-wave time of a channel read out in its own slot.
    pub base_spin_us: f64,
    /// First control pulse precedes the echo by this much.
    pub control_lead_us: f64,
    /// Shortest feasible separation of the two control pulses.
    pub min_spin_us: f64,
    pub gate_us: f64,
    pub spectral_spacing_hz: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            delta_hz: 200e3,
            slot_pitch_us: 2.0,
            base_spin_us: 7.68,
            control_lead_us: 0.5,
            min_spin_us: 1.0,
            gate_us: 1.0,
            spectral_spacing_hz: 80e6,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_hz", self.delta_hz),
            ("slot_pitch_us", self.slot_pitch_us),
            ("control_lead_us", self.control_lead_us),
            ("gate_us", self.gate_us),
            ("spectral_spacing_hz", self.spectral_spacing_hz),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
        }
        if !(self.min_spin_us >= 0.0 && self.base_spin_us >= self.min_spin_us) {
            return Err(Error::Validation("base spin time below the control-pulse minimum".into()));
        }
        if self.control_lead_us >= self.afc_delay_us() {
            return Err(Error::Validation("control lead must be shorter than the AFC delay".into()));
        }
        if self.gate_us > self.slot_pitch_us {
            return Err(Error::Validation("gate window wider than the slot pitch".into()));
        }
        Ok(())
    }

    pub fn afc_delay_us(&self) -> f64 {
        1e6 / self.delta_hz
    }

    pub fn input_time_us(&self, t: u32) -> f64 {
        f64::from(t - 1) * self.slot_pitch_us
    }

    pub fn output_time_us(&self, t: u32) -> f64 {
        f64::from(t - 1) * self.slot_pitch_us + self.afc_delay_us() + self.base_spin_us
    }
}

/// One readout of a stored channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputGate {
    pub mode: ModeId,
    /// Schedule line that produced this output.
    pub line: usize,
    pub control_up_us: f64,
    pub t_out_us: f64,
    pub gate: TimeWindow,
    pub shift_hz: f64,
    /// Share of the stored excitation read out here.
    pub fraction: f64,
    /// Relative phase of a split pair, on both outputs.
    pub phase: Option<f64>,
    pub merge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelEntry {
    pub source: ModeId,
    pub line: usize,
    pub t_in_us: f64,
    pub t_echo_us: f64,
    pub control_down_us: f64,
    /// Empty when the channel is dropped.
    pub outputs: Vec<OutputGate>,
}

/// A compiled schedule. Construct through [`plan_conversion`]; every
/// instance it returns has passed [`PulseTimeline::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseTimeline {
    pub grid: GridDims,
    pub timing: TimingParams,
    pub channels: Vec<ChannelEntry>,
}

impl PulseTimeline {
    pub fn outputs(&self) -> impl Iterator<Item = (&ChannelEntry, &OutputGate)> {
        self.channels.iter().flat_map(|c| c.outputs.iter().map(move |o| (c, o)))
    }

    pub fn output_count(&self) -> usize {
        self.channels.iter().map(|c| c.outputs.len()).sum()
    }

    /// Check every timeline invariant.
    pub fn validate(&self) -> Result<()> {
        let tp = &self.timing;
        tp.validate()?;
        let sched = |msg: String| Err(Error::Schedule(msg));
        for c in &self.channels {
            if !self.grid.contains(&c.source) {
                return sched(format!("source {} outside the grid", c.source));
            }
            if (c.t_in_us - tp.input_time_us(c.source.t)).abs() > EPS_US
                || (c.t_echo_us - c.t_in_us - tp.afc_delay_us()).abs() > EPS_US
            {
                return sched(format!("{}: absorption or echo off its slot", c.source));
            }
            if !(c.control_down_us > c.t_in_us && c.control_down_us < c.t_echo_us) {
                return sched(format!("{}: control pulse does not precede the echo", c.source));
            }
            let total: f64 = c.outputs.iter().map(|o| o.fraction).sum();
            if total > 1.0 + 1e-12 {
                return sched(format!("{}: readout fractions sum to {total}", c.source));
            }
            for o in &c.outputs {
                if !self.grid.contains(&o.mode) || o.mode.s != c.source.s {
                    return sched(format!("{}: output {} outside the grid", c.source, o.mode));
                }
                if !(o.fraction > 0.0 && o.fraction <= 1.0) {
                    return sched(format!("{}: fraction {} outside (0, 1]", c.source, o.fraction));
                }
                let spin = o.control_up_us - c.control_down_us;
                if spin < tp.min_spin_us - EPS_US {
                    return Err(Error::Timing(format!(
                        "{} → {}: control pulses {spin:.3} µs apart, minimum {} µs",
                        c.source, o.mode, tp.min_spin_us
                    )));
                }
                if (o.t_out_us - (c.t_in_us + tp.afc_delay_us() + spin)).abs() > EPS_US
                    || (o.t_out_us - tp.output_time_us(o.mode.t)).abs() > EPS_US
                {
                    return sched(format!("{} → {}: retrieval time inconsistent", c.source, o.mode));
                }
                let g = TimeWindow::centered(o.t_out_us, tp.gate_us);
                if (o.gate.start_us - g.start_us).abs() > EPS_US || (o.gate.end_us - g.end_us).abs() > EPS_US {
                    return sched(format!("{} → {}: gate not centred on retrieval", c.source, o.mode));
                }
                let expected_shift = (f64::from(o.mode.f) - f64::from(c.source.f)) * tp.spectral_spacing_hz;
                if o.shift_hz != expected_shift {
                    return sched(format!(
                        "{} → {}: shifter at {} Hz does not map between grid frequencies",
                        c.source, o.mode, o.shift_hz
                    ));
                }
            }
        }
        let outs: Vec<&OutputGate> = self.outputs().map(|(_, o)| o).collect();
        for (i, a) in outs.iter().enumerate() {
            for b in &outs[i + 1..] {
                let overlap = a.gate.start_us < b.gate.end_us - EPS_US && b.gate.start_us < a.gate.end_us - EPS_US;
                if overlap && !(a.merge && b.merge) {
                    return Err(collision(a, b));
                }
            }
        }
        Ok(())
    }

    /// One line per output, for diagnostics.
    pub fn summary(&self) -> String {
        let mut s = format!("{} channels, {} outputs\n", self.channels.len(), self.output_count());
        for c in &self.channels {
            if c.outputs.is_empty() {
                s.push_str(&format!("  {} dropped\n", c.source));
            }
            for o in &c.outputs {
                s.push_str(&format!(
                    "  {} -> {} at {:.2} us, shift {:+.0} MHz, fraction {}{}\n",
                    c.source,
                    o.mode,
                    o.t_out_us,
                    o.shift_hz / 1e6,
                    o.fraction,
                    if o.merge { ", merged" } else { "" }
                ));
            }
        }
        s
    }
}

fn collision(a: &OutputGate, b: &OutputGate) -> Error {
    let (first, second) = if a.line <= b.line { (a.line, b.line) } else { (b.line, a.line) };
    let slot = if a.mode.f == b.mode.f && a.mode.t == b.mode.t {
        a.mode.to_string()
    } else {
        format!("gate t{}", a.mode.t)
    };
    Error::Collision { slot, first, second }
}

struct ChannelOps<'a> {
    shift: Option<&'a ScheduledOp>,
    temporal: Option<&'a ScheduledOp>,
    merge: bool,
}

fn gather<'a>(mode: ModeId, ops: &'a [ScheduledOp]) -> Result<ChannelOps<'a>> {
    let mut out = ChannelOps { shift: None, temporal: None, merge: false };
    for op in ops.iter().filter(|o| o.mode == mode) {
        out.merge |= op.merge;
        let slot = if op.op.is_temporal() { &mut out.temporal } else { &mut out.shift };
        if let Some(prev) = slot {
            return Err(Error::Schedule(format!(
                "{mode}: conflicting operations on lines {} and {}",
                prev.line, op.line
            )));
        }
        *slot = Some(op);
    }
    if let (Some(s), Some(t)) = (out.shift, out.temporal) {
        if t.op == ConversionOp::Drop {
            return Err(Error::Schedule(format!(
                "{mode}: shift on line {} applied to a dropped channel (line {})",
                s.line, t.line
            )));
        }
    }
    Ok(out)
}

/// Compile a schedule into a validated pulse timeline.
pub fn plan_conversion(schedule: &Schedule, timing: &TimingParams) -> Result<PulseTimeline> {
    timing.validate()?;
    let grid = schedule.grid;
    let mut sources: Vec<ModeId> = Vec::new();
    for (m, line) in &schedule.inputs {
        if !grid.contains(m) {
            return Err(Error::Schedule(format!("input {m} (line {line}) outside the grid")));
        }
        if sources.contains(m) {
            return Err(Error::Schedule(format!("duplicate input {m}")));
        }
        sources.push(*m);
    }
    if let Some(op) = schedule.ops.iter().find(|o| !sources.contains(&o.mode)) {
        return Err(Error::Schedule(format!("line {}: {} is not an input", op.line, op.mode)));
    }

    let mut channels = Vec::with_capacity(sources.len());
    for (src, decl_line) in &schedule.inputs {
        let ops = gather(*src, &schedule.ops)?;
        let t_in_us = timing.input_time_us(src.t);
        let t_echo_us = t_in_us + timing.afc_delay_us();
        let control_down_us = t_echo_us - timing.control_lead_us;

        let f_out = match ops.shift.map(|o| o.op) {
            Some(ConversionOp::FrequencyShift { from, to }) => {
                if from != src.f {
                    return Err(Error::Schedule(format!("{src}: shift from f{from} does not match the input")));
                }
                to
            }
            _ => src.f,
        };
        let line_of = |o: Option<&ScheduledOp>| o.map(|o| o.line);
        let line = line_of(ops.temporal).or(line_of(ops.shift)).unwrap_or(*decl_line);
        let readouts: Vec<(u32, f64, Option<f64>)> = match ops.temporal.map(|o| o.op) {
            None | Some(ConversionOp::Keep) => vec![(src.t, 1.0, None)],
            Some(ConversionOp::Retime { from, to }) => {
                if from != src.t {
                    return Err(Error::Schedule(format!("{src}: retime from t{from} does not match the input")));
                }
                vec![(to, 1.0, None)]
            }
            Some(ConversionOp::Split { targets, ratios, phase }) => {
                if targets[0] == targets[1] {
                    return Err(Error::Schedule(format!("{src}: split targets must differ")));
                }
                if !ratios.iter().all(|r| *r > 0.0 && *r < 1.0) || ratios[0] + ratios[1] > 1.0 + 1e-12 {
                    return Err(Error::Schedule(format!("{src}: invalid split ratios {ratios:?}")));
                }
                vec![(targets[0], ratios[0], Some(phase)), (targets[1], ratios[1], Some(phase))]
            }
            Some(ConversionOp::Drop) => vec![],
            Some(ConversionOp::FrequencyShift { .. }) => unreachable!("shift is not temporal"),
        };

        let mut outputs = Vec::with_capacity(readouts.len());
        for (t_out, fraction, phase) in readouts {
            let mode = ModeId { f: f_out, t: t_out, s: src.s };
            if !grid.contains(&mode) {
                return Err(Error::Schedule(format!("line {line}: output {mode} outside the grid")));
            }
            let t_out_us = timing.output_time_us(t_out);
            let spin = t_out_us - t_echo_us;
            if spin < timing.min_spin_us - EPS_US {
                return Err(Error::Timing(format!(
                    "line {line}: recall of {src} at t{t_out} leaves {spin:.2} µs between control pulses, minimum {} µs",
                    timing.min_spin_us
                )));
            }
            outputs.push(OutputGate {
                mode,
                line,
                control_up_us: control_down_us + spin,
                t_out_us,
                gate: TimeWindow::centered(t_out_us, timing.gate_us),
                shift_hz: (f64::from(f_out) - f64::from(src.f)) * timing.spectral_spacing_hz,
                fraction,
                phase,
                merge: ops.merge,
            });
        }
        channels.push(ChannelEntry { source: *src, line, t_in_us, t_echo_us, control_down_us, outputs });
    }

    let timeline = PulseTimeline { grid, timing: *timing, channels };
    timeline.validate()?;
    Ok(timeline)
}
