use nalgebra::SymmetricEigen;

use super::{c, lambda_basis, lambda_expand, lambda_norms, max_abs, DensityMatrix, Mat3, Mat9, C64};
use crate::error::{validation, Error, Result};

pub const CHI_HERMITIAN_TOL: f64 = 1e-10;
pub const CHI_PSD_TOL: f64 = 1e-8;
pub const CHI_TP_TOL: f64 = 1e-8;
/// Trace-preservation slack tolerated by [`ProcessMatrix::apply`].
const APPLY_TP_TOL: f64 = 1e-6;
const UNITARY_TOL: f64 = 1e-10;

/// χ matrix of a qutrit channel over the λ basis:
/// `ρ ↦ Σₘₙ χₘₙ λₘ ρ λₙ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    chi: Mat9,
}

impl ProcessMatrix {
    /// Validate Hermiticity, positivity and trace preservation.
    pub fn new(chi: Mat9) -> Result<Self> {
        let herm = max_abs((chi - chi.adjoint()).iter().copied());
        if !(herm <= CHI_HERMITIAN_TOL) {
            return validation(format!("χ is not Hermitian (deviation {herm:.3e})"));
        }
        let chi = (chi + chi.adjoint()).scale(0.5);
        let min = min_eigenvalue9(&chi);
        if min < -CHI_PSD_TOL {
            return validation(format!("χ is not positive (min eigenvalue {min:.3e})"));
        }
        let pm = Self { chi };
        let tp = pm.tp_residual();
        if !(tp <= CHI_TP_TOL) {
            return validation(format!("χ is not trace preserving (residual {tp:.3e})"));
        }
        Ok(pm)
    }

    pub(crate) fn from_raw(chi: Mat9) -> Self {
        Self { chi }
    }

    pub fn identity() -> Self {
        let mut chi = Mat9::zeros();
        chi[(0, 0)] = c(1.0, 0.0);
        Self { chi }
    }

    /// `ρ ↦ (1 − p) ρ + p I/3`
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return validation(format!("depolarizing probability {p} outside [0, 1]"));
        }
        let full = Self::from_kraus_unchecked(&weyl_operators().map(|w| w.unscale(3.0)));
        Self::new(Self::identity().chi.scale(1.0 - p) + full.chi.scale(p))
    }

    /// Build χ from Kraus operators `Kₖ = Σₘ aₖₘ λₘ`: `χₘₙ = Σₖ aₖₘ conj(aₖₙ)`.
    pub fn from_kraus(kraus: &[Mat3]) -> Result<Self> {
        let pm = Self::from_kraus_unchecked(kraus);
        Self::new(pm.chi)
    }

    fn from_kraus_unchecked(kraus: &[Mat3]) -> Self {
        let mut chi = Mat9::zeros();
        for k in kraus {
            let a = nalgebra::SVector::<C64, 9>::from_column_slice(&lambda_expand(k));
            chi += a * a.adjoint();
        }
        Self { chi }
    }

    pub fn from_unitary(u: &Mat3) -> Result<Self> {
        if !is_unitary(u) {
            return validation("operator is not unitary");
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn chi(&self) -> &Mat9 {
        &self.chi
    }

    /// `Σₘₙ χₘₙ λₙ† λₘ`, which equals the identity for a trace-preserving map.
    pub fn tp_operator(&self) -> Mat3 {
        let ops = lambda_basis().ops();
        let mut acc = Mat3::zeros();
        for m in 0..9 {
            for n in 0..9 {
                let w = self.chi[(m, n)];
                if w.norm() == 0.0 {
                    continue;
                }
                acc += ops[n].adjoint() * ops[m] * w;
            }
        }
        acc
    }

    pub fn tp_residual(&self) -> f64 {
        max_abs((self.tp_operator() - Mat3::identity()).iter().copied())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue9(&self.chi)
    }

    /// `Σₘₙ χₘₙ λₘ X λₙ†` for an arbitrary operator `X`.
    pub fn apply_operator(&self, x: &Mat3) -> Mat3 {
        let ops = lambda_basis().ops();
        let left: Vec<Mat3> = ops.iter().map(|l| l * x).collect();
        let right: Vec<Mat3> = ops.iter().map(|l| l.adjoint()).collect();
        let mut out = Mat3::zeros();
        for (m, l) in left.iter().enumerate() {
            for (n, r) in right.iter().enumerate() {
                let w = self.chi[(m, n)];
                if w.norm() == 0.0 {
                    continue;
                }
                out += l * r * w;
            }
        }
        out
    }

    /// Apply the channel to a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let tp = self.tp_residual();
        if !(tp <= APPLY_TP_TOL) {
            return Err(Error::Channel(format!(
                "trace preservation violated (residual {tp:.3e})"
            )));
        }
        DensityMatrix::project(self.apply_operator(rho.matrix()), APPLY_TP_TOL)
            .map_err(|e| Error::Channel(e.to_string()))
    }

    /// χ rescaled onto the trace-orthonormal basis `λᵢ/‖λᵢ‖`.
    pub fn orthonormal_chi(&self) -> Mat9 {
        let n = lambda_norms();
        Mat9::from_fn(|r, col| self.chi[(r, col)] * (n[r] * n[col]))
    }

    /// Compose `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &ProcessMatrix) -> Result<ProcessMatrix> {
        // Kraus decomposition of each, then expand all products.
        let ka = self.kraus_operators();
        let kb = other.kraus_operators();
        let mut prods = Vec::with_capacity(ka.len() * kb.len());
        for b in &kb {
            for a in &ka {
                prods.push(b * a);
            }
        }
        let pm = Self::from_kraus_unchecked(&prods);
        Ok(Self { chi: (pm.chi + pm.chi.adjoint()).scale(0.5) })
    }

    /// Kraus operators from the eigen-decomposition of χ.
    pub fn kraus_operators(&self) -> Vec<Mat3> {
        let eig = SymmetricEigen::new(self.chi);
        let ops = lambda_basis().ops();
        let mut out = Vec::new();
        for k in 0..9 {
            let lam = eig.eigenvalues[k];
            if lam <= 1e-14 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let mut kr = Mat3::zeros();
            for m in 0..9 {
                kr += ops[m] * v[m];
            }
            out.push(kr.scale(lam.sqrt()));
        }
        out
    }
}

pub(crate) fn min_eigenvalue9(m: &Mat9) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_unitary(u: &Mat3) -> bool {
    max_abs((u.adjoint() * u - Mat3::identity()).iter().copied()) <= UNITARY_TOL
}

/// The nine qutrit Weyl operators `XᵃZᵇ`.
pub(crate) fn weyl_operators() -> [Mat3; 9] {
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let x = Mat3::new(zero, zero, one, one, zero, zero, zero, one, zero);
    let z = Mat3::from_diagonal(&nalgebra::Vector3::new(one, w, w * w));
    let mut out = [Mat3::zeros(); 9];
    for a in 0..3 {
        for b in 0..3 {
            out[3 * a + b] = x.pow(a as u32) * z.pow(b as u32);
        }
    }
    out
}

/// Process (entanglement) fidelity of χ to the unitary channel `U·U†`:
/// `Tr(χ_U χ) / (Tr χ_U · Tr χ)`, evaluated in the trace-orthonormal basis.
pub fn process_fidelity(chi: &ProcessMatrix, target_unitary: &Mat3) -> Result<f64> {
    if !is_unitary(target_unitary) {
        return validation("target operator is not unitary");
    }
    let target = ProcessMatrix::from_unitary(target_unitary)?.orthonormal_chi();
    let actual = chi.orthonormal_chi();
    let num = (target * actual).trace().re;
    let den = target.trace().re * actual.trace().re;
    if !(den > 0.0) {
        return validation("process matrix has zero trace");
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Average gate fidelity over pure inputs, `(d·F_pro + 1)/(d + 1)` with d = 3.
pub fn average_gate_fidelity(chi: &ProcessMatrix, target_unitary: &Mat3) -> Result<f64> {
    let f = process_fidelity(chi, target_unitary)?;
    Ok((3.0 * f + 1.0) / 4.0)
}
