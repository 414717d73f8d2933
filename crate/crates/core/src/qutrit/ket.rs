use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::{c, DensityMatrix, Vec3, C64};
use crate::error::{validation, Result};

const NORM_TOL: f64 = 1e-12;

/// OAM eigenstates spanning the qutrit: `L` (l = +1), `G` (l = 0, Gaussian),
/// `R` (l = −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OamBasis {
    L,
    G,
    R,
}

impl OamBasis {
    pub const ALL: [OamBasis; 3] = [OamBasis::L, OamBasis::G, OamBasis::R];

    pub fn index(self) -> usize {
        match self {
            OamBasis::L => 0,
            OamBasis::G => 1,
            OamBasis::R => 2,
        }
    }
}

/// A normalized pure qutrit state over `(|L⟩, |G⟩, |R⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritKet(Vec3);

impl QutritKet {
    /// Wrap amplitudes that must already be normalized to within 1e-12.
    pub fn new(amplitudes: [C64; 3]) -> Result<Self> {
        let v = Vec3::new(amplitudes[0], amplitudes[1], amplitudes[2]);
        let norm2 = v.norm_squared();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > NORM_TOL {
            return validation(format!("ket is not normalized: Σ|a|² = {norm2}"));
        }
        Ok(Self(v))
    }

    /// Normalize arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: [C64; 3]) -> Result<Self> {
        let v = Vec3::new(amplitudes[0], amplitudes[1], amplitudes[2]);
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return validation("cannot normalize a zero or non-finite ket");
        }
        Ok(Self(v.unscale(n)))
    }

    pub fn basis(b: OamBasis) -> Self {
        let mut v = Vec3::zeros();
        v[b.index()] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// `(|L⟩ + |G⟩ + |R⟩)/√3`
    pub fn psi1() -> Self {
        let a = c(1.0 / 3f64.sqrt(), 0.0);
        Self(Vec3::new(a, a, a))
    }

    /// `(|L⟩ + |G⟩ − i|R⟩)/√3`
    pub fn psi2() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self(Vec3::new(c(s, 0.0), c(s, 0.0), c(0.0, -s)))
    }

    /// Equal-weight superposition `(a|x⟩ + b|y⟩)/√2` of two basis states.
    pub(crate) fn pair(x: OamBasis, a: C64, y: OamBasis, b: C64) -> Self {
        let mut v = Vec3::zeros();
        v[x.index()] += a * FRAC_1_SQRT_2;
        v[y.index()] += b * FRAC_1_SQRT_2;
        Self(v)
    }

    pub fn amplitudes(&self) -> [C64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn as_vector(&self) -> &Vec3 {
        &self.0
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QutritKet) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn to_density(&self) -> DensityMatrix {
        ket_to_density(self)
    }
}

/// `|ψ⟩⟨ψ|`
pub fn ket_to_density(psi: &QutritKet) -> DensityMatrix {
    let v = psi.as_vector();
    DensityMatrix::from_raw(v * v.adjoint())
}
