use nalgebra::SymmetricEigen;

use super::{hermitian_eigenvalues3, hermitize3, max_abs, psd_sqrt, Mat3, C64, DIM, EIG_ZERO};
use crate::error::{validation, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// A qutrit density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat3);

impl DensityMatrix {
    /// Validate `m` against the density-matrix invariants.
    pub fn new(m: Mat3) -> Result<Self> {
        let herm = max_abs((m - m.adjoint()).iter().copied());
        if !(herm <= HERMITIAN_TOL) {
            return validation(format!("matrix is not Hermitian (deviation {herm:.3e})"));
        }
        let tr = m.trace();
        if !((tr - C64::new(1.0, 0.0)).norm() <= TRACE_TOL) {
            return validation(format!("trace is not 1 (got {tr})"));
        }
        let min = hermitian_eigenvalues3(&m)[0];
        if min < -PSD_TOL {
            return validation(format!("matrix is not PSD (min eigenvalue {min:.3e})"));
        }
        Ok(Self(hermitize3(&m)))
    }

    /// Snap a nearly valid matrix onto the state space: Hermitian part, negative
    /// eigenvalues clamped, trace renormalized. Fails when any invariant is
    /// violated by more than `tol`.
    pub fn project(m: Mat3, tol: f64) -> Result<Self> {
        let herm = max_abs((m - m.adjoint()).iter().copied());
        if !(herm <= tol) {
            return validation(format!("matrix is not Hermitian (deviation {herm:.3e})"));
        }
        let tr = m.trace();
        if !((tr - C64::new(1.0, 0.0)).norm() <= tol) {
            return validation(format!("trace is not 1 (got {tr})"));
        }
        let eig = SymmetricEigen::new(hermitize3(&m));
        let mut out = Mat3::zeros();
        let mut total = 0.0;
        for k in 0..DIM {
            let lam = eig.eigenvalues[k];
            if lam < -tol {
                return validation(format!("matrix is not PSD (eigenvalue {lam:.3e})"));
            }
            if lam > 0.0 {
                let v = eig.eigenvectors.column(k);
                out += (v * v.adjoint()).scale(lam);
                total += lam;
            }
        }
        Ok(Self(hermitize3(&out.unscale(total))))
    }

    pub(crate) fn from_raw(m: Mat3) -> Self {
        Self(m)
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat3::identity().scale(1.0 / 3.0))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// `Tr(ρ A)` for Hermitian `A`, returned as a real number.
    pub fn expectation(&self, op: &Mat3) -> f64 {
        (self.0 * op).trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        hermitian_eigenvalues3(&self.0)
    }

    /// `½‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        0.5 * hermitian_eigenvalues3(&(self.0 - other.0))
            .iter()
            .map(|x| x.abs())
            .sum::<f64>()
    }

    /// `(1 − w)·self + w·other`
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return validation(format!("mixing weight {w} outside [0, 1]"));
        }
        Ok(Self(self.0.scale(1.0 - w) + other.0.scale(w)))
    }

    pub fn max_entry_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs((self.0 - other.0).iter().copied())
    }
}

/// Uhlmann fidelity `(Tr √(√σ ρ √σ))²`.
///
/// Evaluated as the squared nuclear norm of `√ρ √σ`, whose singular values are
/// the square roots of the eigenvalues of `√σ ρ √σ`. Going through the SVD keeps
/// rank-deficient (pure) inputs accurate to rounding error, where an explicit
/// eigenvalue square root would amplify 1e-17 noise to 1e-9.
pub fn state_fidelity(rho_in: &DensityMatrix, rho_out: &DensityMatrix) -> f64 {
    let a = psd_sqrt(rho_in.matrix()) * psd_sqrt(rho_out.matrix());
    let sv = a.singular_values();
    let nuclear: f64 = sv.iter().filter(|s| **s > EIG_ZERO).sum();
    (nuclear * nuclear).clamp(0.0, 1.0)
}
