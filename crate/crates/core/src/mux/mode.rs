use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::qutrit::OamBasis;

/// Spatial label of a channel: one of the independent input paths, or the
/// whole OAM qutrit when the spatial DOF carries the payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spatial {
    /// 1-based path index.
    Path(u32),
    Qutrit,
}

impl Spatial {
    /// OAM mode carried by paths 1..=3, in the order L, R, G.
    pub fn oam(self) -> Option<OamBasis> {
        match self {
            Spatial::Path(1) => Some(OamBasis::L),
            Spatial::Path(2) => Some(OamBasis::R),
            Spatial::Path(3) => Some(OamBasis::G),
            _ => None,
        }
    }
}

/// Address of a channel in the (f, t, s) grid; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub f: u32,
    pub t: u32,
    pub s: Spatial,
}

impl ModeId {
    pub fn qutrit(f: u32, t: u32) -> Self {
        Self { f, t, s: Spatial::Qutrit }
    }

    pub fn path(f: u32, t: u32, s: u32) -> Self {
        Self { f, t, s: Spatial::Path(s) }
    }

    pub fn with_f(self, f: u32) -> Self {
        Self { f, ..self }
    }

    pub fn with_t(self, t: u32) -> Self {
        Self { t, ..self }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.s {
            Spatial::Qutrit => write!(out, "f{}t{}", self.f, self.t),
            Spatial::Path(s) => write!(out, "f{}t{}s{}", self.f, self.t, s),
        }
    }
}

fn index_after(prefix: char, s: &str) -> Option<(u32, &str)> {
    let rest = s.strip_prefix(prefix)?;
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    if end == 0 {
        return None;
    }
    let v: u32 = rest[..end].parse().ok()?;
    (v >= 1).then_some((v, &rest[end..]))
}

impl FromStr for ModeId {
    type Err = Error;

    /// `f<i>t<j>` or `f<i>t<j>s<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("malformed mode label '{s}'"));
        let (f, rest) = index_after('f', s).ok_or_else(bad)?;
        let (t, rest) = index_after('t', rest).ok_or_else(bad)?;
        if rest.is_empty() {
            return Ok(ModeId::qutrit(f, t));
        }
        match index_after('s', rest) {
            Some((p, "")) => Ok(ModeId::path(f, t, p)),
            _ => Err(bad()),
        }
    }
}

/// Parse a bare `t<j>` or `f<i>` index.
pub(crate) fn parse_index(prefix: char, s: &str) -> Option<u32> {
    match index_after(prefix, s) {
        Some((v, "")) => Some(v),
        _ => None,
    }
}

/// Grid extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub nf: u32,
    pub nt: u32,
    pub ns: u32,
}

impl GridDims {
    pub fn new(nf: u32, nt: u32, ns: u32) -> Result<Self> {
        if nf == 0 || nt == 0 || ns == 0 {
            return validation(format!("grid dimensions must be ≥ 1, got ({nf}, {nt}, {ns})"));
        }
        Ok(Self { nf, nt, ns })
    }

    pub fn size(&self) -> u64 {
        u64::from(self.nf) * u64::from(self.nt) * u64::from(self.ns)
    }

    pub fn contains(&self, m: &ModeId) -> bool {
        let s_ok = match m.s {
            Spatial::Path(p) => p >= 1 && p <= self.ns,
            Spatial::Qutrit => true,
        };
        m.f >= 1 && m.f <= self.nf && m.t >= 1 && m.t <= self.nt && s_ok
    }
}

/// All modes of an `nf × nt × ns` grid, f-major, then t, then s.
pub fn mode_grid(nf: u32, nt: u32, ns: u32) -> Result<Vec<ModeId>> {
    let dims = GridDims::new(nf, nt, ns)?;
    let mut out = Vec::with_capacity(dims.size() as usize);
    for f in 1..=nf {
        for t in 1..=nt {
            for s in 1..=ns {
                out.push(ModeId::path(f, t, s));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(mode_grid(2, 2, 3).unwrap().len(), 12);
        assert_eq!(mode_grid(1, 1, 1).unwrap().len(), 1);
        assert_eq!(mode_grid(60, 50, 51).unwrap().len(), 153_000);
        assert!(mode_grid(0, 2, 3).is_err());
    }

    #[test]
    fn f_major_order() {
        let g = mode_grid(2, 2, 3).unwrap();
        assert_eq!(g[0], ModeId::path(1, 1, 1));
        assert_eq!(g[1], ModeId::path(1, 1, 2));
        assert_eq!(g[3], ModeId::path(1, 2, 1));
        assert_eq!(g[6], ModeId::path(2, 1, 1));
        let mut sorted = g.clone();
        sorted.sort();
        assert_eq!(sorted, g);
    }

    #[test]
    fn labels_round_trip() {
        for m in [ModeId::qutrit(1, 2), ModeId::path(12, 3, 2)] {
            assert_eq!(m.to_string().parse::<ModeId>().unwrap(), m);
        }
        for bad in ["", "f1", "t1f1", "f0t1", "f1t1x", "f1t1s", "fxt1", "f1t1s0"] {
            assert!(bad.parse::<ModeId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn path_oam_labels() {
        assert_eq!(Spatial::Path(1).oam(), Some(OamBasis::L));
        assert_eq!(Spatial::Path(2).oam(), Some(OamBasis::R));
        assert_eq!(Spatial::Path(3).oam(), Some(OamBasis::G));
        assert_eq!(Spatial::Qutrit.oam(), None);
    }
}
