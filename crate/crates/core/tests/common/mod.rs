//! Random schedule generator and an independent planning oracle, shared by
//! the fuzz tests and the acceptance suite.
#![allow(dead_code)]

use qmem::mux::{
    execute_conversion, parse_schedule, plan_conversion, ChannelPayload, ModeId, MuxCalibration,
    OutputGate, PulseTimeline, TimingParams,
};
use qmem::qutrit::random::random_density;
use qmem::qutrit::state_fidelity;
use qmem::memory::MemoryCalibration;
use qmem::Error;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum GenOp {
    Keep,
    Drop,
    Retime(u32),
    Shift(u32),
    Split(u32, u32, f64),
}

#[derive(Debug, Clone)]
pub struct GenLine {
    pub mode: (u32, u32),
    pub op: GenOp,
    pub merge: bool,
}

#[derive(Debug, Clone)]
pub struct GenSchedule {
    pub nf: u32,
    pub nt: u32,
    pub inputs: Vec<(u32, u32)>,
    /// Write an explicit `input` line.
    pub explicit: bool,
    pub lines: Vec<GenLine>,
}

impl GenSchedule {
    pub fn text(&self) -> String {
        let mut s = format!("grid {} {}\n", self.nf, self.nt);
        if self.explicit {
            s += "input";
            for (f, t) in &self.inputs {
                s += &format!(" f{f}t{t}");
            }
            s += "\n";
        }
        for l in &self.lines {
            let (f, t) = l.mode;
            let op = match &l.op {
                GenOp::Keep => "keep".to_string(),
                GenOp::Drop => "drop".to_string(),
                GenOp::Retime(to) => format!("retime t{to}"),
                GenOp::Shift(to) => format!("shift f{to}"),
                GenOp::Split(a, b, r) => format!("split t{a} t{b} {r} 0.25"),
            };
            s += &format!("f{f}t{t} {op}{}\n", if l.merge { " merge" } else { "" });
        }
        s
    }
}

pub fn random_schedule<R: Rng>(rng: &mut R) -> GenSchedule {
    let nf = rng.random_range(1..=3);
    let nt = rng.random_range(1..=5);
    let mut inputs: Vec<(u32, u32)> = (1..=nf)
        .flat_map(|f| (1..=nt).map(move |t| (f, t)))
        .filter(|_| rng.random_bool(0.4))
        .collect();
    if inputs.is_empty() {
        inputs.push((rng.random_range(1..=nf), rng.random_range(1..=nt)));
    }
    let explicit = rng.random_bool(0.5);
    let mut lines = Vec::new();
    for &mode in &inputs {
        let n = if explicit { rng.random_range(0..=2) } else { rng.random_range(1..=2) };
        for _ in 0..n {
            let op = match rng.random_range(0..5) {
                0 => GenOp::Keep,
                1 => GenOp::Drop,
                2 => GenOp::Retime(rng.random_range(1..=nt)),
                3 => GenOp::Shift(rng.random_range(1..=nf)),
                _ if nt >= 2 => {
                    let a = rng.random_range(1..=nt);
                    let mut b = rng.random_range(1..=nt);
                    while b == a {
                        b = rng.random_range(1..=nt);
                    }
                    GenOp::Split(a, b, [0.25, 0.5, 0.75][rng.random_range(0..3)])
                }
                _ => GenOp::Keep,
            };
            lines.push(GenLine { mode, op, merge: rng.random_bool(0.3) });
        }
    }
    lines.shuffle(rng);
    GenSchedule { nf, nt, inputs, explicit, lines }
}

/// Expected readout: output (f, t), fraction, merge flag.
pub type Expected = Vec<((u32, u32), (u32, u32), f64, bool)>;

#[derive(Debug, PartialEq)]
pub enum Verdict {
    Accept(Expected),
    /// Only a gate collision is wrong.
    Collision,
    Reject,
}

/// Predict the planner's decision from first principles: a slot pitch of
/// 2 µs, a 1 µs gate, AFC delay 5 µs, base spin 7.68 µs, minimum spin 1 µs.
pub fn oracle(g: &GenSchedule) -> Verdict {
    let mut out: Expected = Vec::new();
    for &(f, t) in &g.inputs {
        let mine: Vec<&GenLine> = g.lines.iter().filter(|l| l.mode == (f, t)).collect();
        let shifts: Vec<_> = mine.iter().filter(|l| matches!(l.op, GenOp::Shift(_))).collect();
        let temporal: Vec<_> = mine.iter().filter(|l| !matches!(l.op, GenOp::Shift(_))).collect();
        if shifts.len() > 1 || temporal.len() > 1 {
            return Verdict::Reject;
        }
        let merge = mine.iter().any(|l| l.merge);
        let f_out = match shifts.first().map(|l| &l.op) {
            Some(GenOp::Shift(to)) => *to,
            _ => f,
        };
        let reads: Vec<(u32, f64)> = match temporal.first().map(|l| &l.op) {
            None | Some(GenOp::Keep) => vec![(t, 1.0)],
            Some(GenOp::Retime(to)) => vec![(*to, 1.0)],
            Some(GenOp::Split(a, b, r)) => vec![(*a, *r), (*b, 1.0 - r)],
            Some(GenOp::Drop) => {
                if !shifts.is_empty() {
                    return Verdict::Reject;
                }
                vec![]
            }
            Some(GenOp::Shift(_)) => unreachable!(),
        };
        for (t_out, frac) in reads {
            let spin = 2.0 * (f64::from(t_out) - f64::from(t)) + 7.68;
            if spin < 1.0 {
                return Verdict::Reject;
            }
            out.push(((f, t), (f_out, t_out), frac, merge));
        }
    }
    for (i, a) in out.iter().enumerate() {
        for b in &out[i + 1..] {
            if a.1 .1 == b.1 .1 && !(a.3 && b.3) {
                return Verdict::Collision;
            }
        }
    }
    Verdict::Accept(out)
}

fn expected_of(plan: &PulseTimeline) -> Expected {
    plan.outputs()
        .map(|(c, o)| ((c.source.f, c.source.t), (o.mode.f, o.mode.t), o.fraction, o.merge))
        .collect()
}

fn sorted(mut e: Expected) -> Expected {
    e.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
    e
}

/// Corrupt one invariant of an accepted plan.
pub fn mutate<R: Rng>(plan: &PulseTimeline, rng: &mut R) -> Option<PulseTimeline> {
    let mut p = plan.clone();
    let ci = p.channels.iter().position(|c| !c.outputs.is_empty())?;
    let oi = rng.random_range(0..p.channels[ci].outputs.len());
    match rng.random_range(0..7) {
        0 => p.channels[ci].outputs[oi].t_out_us += 0.3,
        1 => p.channels[ci].outputs[oi].fraction = 1.5,
        2 => p.channels[ci].outputs[oi].shift_hz += 1.0,
        3 => {
            let c = &mut p.channels[ci];
            c.outputs[oi].control_up_us = c.control_down_us + 0.5;
        }
        4 => p.channels[ci].t_echo_us += 0.1,
        5 => p.channels[ci].control_down_us = p.channels[ci].t_echo_us + 0.1,
        _ => {
            let mut dup: OutputGate = p.channels[ci].outputs[oi];
            dup.merge = false;
            dup.fraction = 1e-3;
            p.channels[ci].outputs[oi].fraction = (p.channels[ci].outputs[oi].fraction - 1e-3).max(1e-3);
            p.channels[ci].outputs.push(dup);
        }
    }
    Some(p)
}

#[derive(Debug, Default)]
pub struct FuzzStats {
    pub accepted: usize,
    pub rejected: usize,
    pub collisions: usize,
    pub mutations_rejected: usize,
}

/// Run one fuzzed schedule through parse, plan, mutation and noiseless
/// execution. Returns a description of the first discrepancy.
pub fn check_one<R: Rng>(g: &GenSchedule, rng: &mut R, stats: &mut FuzzStats) -> Result<(), String> {
    let text = g.text();
    let schedule = parse_schedule(&text).map_err(|e| format!("parse failed: {e}\n{text}"))?;
    let timing = TimingParams::default();
    let planned = plan_conversion(&schedule, &timing);
    match (oracle(g), planned) {
        (Verdict::Accept(exp), Ok(plan)) => {
            stats.accepted += 1;
            plan.validate().map_err(|e| format!("accepted plan fails validation: {e}\n{text}"))?;
            if sorted(exp.clone()) != sorted(expected_of(&plan)) {
                return Err(format!("outputs differ: oracle {exp:?}\n{}\n{text}", plan.summary()));
            }
            if let Some(bad) = mutate(&plan, rng) {
                if bad.validate().is_err() {
                    stats.mutations_rejected += 1;
                } else {
                    return Err(format!("corrupted plan validated\n{text}"));
                }
            }
            noiseless_preserves(&plan, rng).map_err(|e| format!("{e}\n{text}"))
        }
        (Verdict::Collision, Err(Error::Collision { first, second, .. })) => {
            stats.collisions += 1;
            if first == 0 || second == 0 || first > second {
                return Err(format!("collision lines {first}, {second}\n{text}"));
            }
            Ok(())
        }
        (Verdict::Reject, Err(e @ (Error::Schedule(_) | Error::Timing(_) | Error::Collision { .. }))) => {
            stats.rejected += 1;
            if e.to_string().len() < 10 {
                return Err(format!("diagnostic too terse: {e}"));
            }
            Ok(())
        }
        (v, r) => Err(format!("oracle {v:?}, planner {:?}\n{text}", r.map(|p| p.summary()))),
    }
}

fn noiseless_preserves<R: Rng>(plan: &PulseTimeline, rng: &mut R) -> Result<(), String> {
    let cal = MuxCalibration {
        memory: MemoryCalibration { noise_rate: 0.0, ..MemoryCalibration::default() },
        ..MuxCalibration::default()
    };
    let payloads: Vec<ChannelPayload> = plan
        .channels
        .iter()
        .map(|c| ChannelPayload::qutrit(c.source, random_density(rng), 1.0))
        .collect();
    let ex = execute_conversion(&payloads, plan, &cal, None, 1, 0).map_err(|e| e.to_string())?;
    for o in &ex.outputs {
        let input = payloads.iter().find(|p| p.mode == o.source).and_then(|p| p.state.as_ref()).unwrap();
        let f = state_fidelity(input, o.state.as_ref().unwrap());
        if (f - 1.0).abs() > 1e-12 {
            return Err(format!("{} fidelity {f}", o.label()));
        }
    }
    Ok(())
}

pub fn qutrit_mode(f: u32, t: u32) -> ModeId {
    ModeId::qutrit(f, t)
}
