use nalgebra::DMatrix;

use crate::error::{validation, Result};
use crate::qutrit::{c, Mat3, OamBasis, QutritKet, C64};

/// Preparation states and the matching rank-1 analysis projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettings {
    states: Vec<QutritKet>,
    projectors: Vec<Mat3>,
}

impl TomographySettings {
    /// The nine-state set: three OAM eigenstates and six two-level
    /// superpositions.
    pub fn standard() -> Self {
        use OamBasis::{G, L, R};
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let states = vec![
            QutritKet::basis(L),
            QutritKet::basis(G),
            QutritKet::basis(R),
            QutritKet::pair(L, one, G, one),
            QutritKet::pair(R, one, G, one),
            QutritKet::pair(L, i, G, one),
            QutritKet::pair(R, -i, G, one),
            QutritKet::pair(L, one, R, one),
            QutritKet::pair(L, one, R, -i),
        ];
        Self::new(states).expect("standard set is informationally complete")
    }

    /// Custom settings; the projectors must span the 3×3 operator space.
    pub fn new(states: Vec<QutritKet>) -> Result<Self> {
        if states.len() < 9 {
            return validation(format!("need at least 9 settings, got {}", states.len()));
        }
        let projectors: Vec<Mat3> = states
            .iter()
            .map(|s| s.as_vector() * s.as_vector().adjoint())
            .collect();
        let mut m = DMatrix::<C64>::zeros(9, projectors.len());
        for (k, p) in projectors.iter().enumerate() {
            for (idx, z) in p.iter().enumerate() {
                m[(idx, k)] = *z;
            }
        }
        let sv = m.singular_values();
        let rank = sv.iter().filter(|s| **s > 1e-10).count();
        if rank < 9 {
            return validation(format!("projectors span only {rank} of 9 operator dimensions"));
        }
        Ok(Self { states, projectors })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[QutritKet] {
        &self.states
    }

    pub fn projectors(&self) -> &[Mat3] {
        &self.projectors
    }
}
