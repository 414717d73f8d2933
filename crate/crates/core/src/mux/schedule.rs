//! Declarative conversion schedules.
//!
//! ```text
//! # comment
//! grid 2 2                 # nf nt, optional, default 2 2
//! input f1t1 f2t2          # optional; otherwise every mode named below
//! f1t1 retime t2
//! f2t2 shift f1
//! f1t1 split t1 t2 0.5 0.0 # targets, ratio to the first target, phase [, ratio to the second]
//! f2t2 drop
//! f1t1 keep merge          # `merge` lets this output share a gate window
//! ```

use std::collections::HashSet;

use serde::Serialize;

use super::mode::parse_index;
use super::{GridDims, ModeId, Spatial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConversionOp {
    /// Read out in the input slot.
    Keep,
    Retime { from: u32, to: u32 },
    FrequencyShift { from: u32, to: u32 },
    /// Two partial readouts at `targets` with the given fractions; `phase`
    /// (rad) is carried as metadata on the output pair.
    Split { targets: [u32; 2], ratios: [f64; 2], phase: f64 },
    Drop,
}

impl ConversionOp {
    /// Ops that decide the readout time(s).
    pub fn is_temporal(&self) -> bool {
        !matches!(self, ConversionOp::FrequencyShift { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduledOp {
    /// 1-based source line, 0 for programmatic ops.
    pub line: usize,
    pub mode: ModeId,
    pub op: ConversionOp,
    pub merge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub grid: GridDims,
    /// Input modes with the line that declared them (0 when implicit).
    pub inputs: Vec<(ModeId, usize)>,
    pub ops: Vec<ScheduledOp>,
}

impl Schedule {
    pub fn new(grid: GridDims, inputs: Vec<ModeId>, ops: Vec<ScheduledOp>) -> Self {
        Self { grid, inputs: inputs.into_iter().map(|m| (m, 0)).collect(), ops }
    }

    pub fn input_modes(&self) -> Vec<ModeId> {
        self.inputs.iter().map(|(m, _)| *m).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn parse_mode(line: usize, tok: &str, grid: &GridDims) -> Result<ModeId> {
    let m: ModeId = tok
        .parse()
        .or_else(|_| parse_err(line, format!("unknown mode '{tok}'")))?;
    if m.s != Spatial::Qutrit {
        return parse_err(line, format!("mode '{tok}': spatial labels are not convertible"));
    }
    if !grid.contains(&m) {
        return parse_err(
            line,
            format!("unknown mode '{tok}' outside the {}×{} grid", grid.nf, grid.nt),
        );
    }
    Ok(m)
}

fn parse_slot(line: usize, prefix: char, tok: &str, bound: u32) -> Result<u32> {
    match parse_index(prefix, tok) {
        Some(v) if v <= bound => Ok(v),
        Some(_) => parse_err(line, format!("target '{tok}' outside the grid")),
        None => parse_err(line, format!("expected {prefix}<index>, got '{tok}'")),
    }
}

fn parse_f64(line: usize, tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map_or_else(|| parse_err(line, format!("invalid {what} '{tok}'")), Ok)
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut grid = GridDims { nf: 2, nt: 2, ns: 1 };
    let mut declared: Vec<(ModeId, usize)> = Vec::new();
    let mut ops: Vec<ScheduledOp> = Vec::new();
    let mut seen_body = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "grid" => {
                if seen_body {
                    return parse_err(line, "grid must precede inputs and ops");
                }
                let dims: Vec<u32> = toks[1..]
                    .iter()
                    .map(|t| t.parse::<u32>().ok().filter(|v| *v >= 1))
                    .collect::<Option<_>>()
                    .map_or_else(|| parse_err(line, "grid needs two positive integers"), Ok)?;
                if dims.len() != 2 {
                    return parse_err(line, "grid needs exactly two dimensions: nf nt");
                }
                grid = GridDims { nf: dims[0], nt: dims[1], ns: 1 };
            }
            "input" => {
                seen_body = true;
                if toks.len() < 2 {
                    return parse_err(line, "input needs at least one mode");
                }
                for tok in &toks[1..] {
                    let m = parse_mode(line, tok, &grid)?;
                    if let Some((_, first)) = declared.iter().find(|(d, _)| *d == m) {
                        return parse_err(line, format!("input {m} already declared on line {first}"));
                    }
                    declared.push((m, line));
                }
            }
            tok => {
                seen_body = true;
                let mode = parse_mode(line, tok, &grid)?;
                let mut args: Vec<&str> = toks[1..].to_vec();
                let merge = args.last() == Some(&"merge");
                if merge {
                    args.pop();
                }
                let Some((&verb, rest)) = args.split_first() else {
                    return parse_err(line, format!("missing operation for {mode}"));
                };
                let op = match (verb, rest) {
                    ("keep", []) => ConversionOp::Keep,
                    ("drop", []) => ConversionOp::Drop,
                    ("retime", [t]) => ConversionOp::Retime { from: mode.t, to: parse_slot(line, 't', t, grid.nt)? },
                    ("shift", [f]) => {
                        ConversionOp::FrequencyShift { from: mode.f, to: parse_slot(line, 'f', f, grid.nf)? }
                    }
                    ("split", [a, b, r, phi, more @ ..]) if more.len() <= 1 => {
                        let ta = parse_slot(line, 't', a, grid.nt)?;
                        let tb = parse_slot(line, 't', b, grid.nt)?;
                        let r1 = parse_f64(line, r, "ratio")?;
                        let phase = parse_f64(line, phi, "phase")?;
                        let r2 = match more {
                            [x] => parse_f64(line, x, "ratio")?,
                            _ => 1.0 - r1,
                        };
                        if ta == tb {
                            return parse_err(line, "split targets must differ");
                        }
                        if !(r1 > 0.0 && r1 < 1.0 && r2 > 0.0 && r2 < 1.0 && r1 + r2 <= 1.0 + 1e-12) {
                            return parse_err(line, format!("split ratios {r1}, {r2} must lie in (0, 1) and sum to ≤ 1"));
                        }
                        ConversionOp::Split { targets: [ta, tb], ratios: [r1, r2], phase }
                    }
                    ("keep" | "drop" | "retime" | "shift" | "split", _) => {
                        return parse_err(line, format!("wrong arguments for '{verb}'"));
                    }
                    _ => return parse_err(line, format!("unknown operation '{verb}'")),
                };
                ops.push(ScheduledOp { line, mode, op, merge });
            }
        }
    }

    let inputs = if declared.is_empty() {
        let mut seen = HashSet::new();
        ops.iter().filter(|o| seen.insert(o.mode)).map(|o| (o.mode, o.line)).collect()
    } else {
        if let Some(o) = ops.iter().find(|o| !declared.iter().any(|(m, _)| *m == o.mode)) {
            return parse_err(o.line, format!("operation on undeclared input {}", o.mode));
        }
        declared
    };
    Ok(Schedule { grid, inputs, ops })
}
