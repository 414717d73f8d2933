//! Exact linear algebra for qutrit states, the nine-operator λ basis, process
//! matrices and fidelities.
//!
//! The computational basis is ordered `(|L⟩, |G⟩, |R⟩)` everywhere: row and
//! column 0 of every matrix refer to `|L⟩`, 1 to `|G⟩`, 2 to `|R⟩`.

mod basis;
mod density;
mod ket;
mod process;
pub mod random;

pub use basis::{lambda_basis, lambda_expand, lambda_recombine, lambda_norms, LambdaBasis};
pub use density::{state_fidelity, DensityMatrix};
pub use ket::{ket_to_density, OamBasis, QutritKet};
pub use process::{
    average_gate_fidelity, is_unitary, process_fidelity, ProcessMatrix, CHI_HERMITIAN_TOL,
    CHI_PSD_TOL, CHI_TP_TOL,
};

use nalgebra::{Matrix3, SMatrix, SymmetricEigen, Vector3};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;
pub type Vec3 = Vector3<C64>;
pub type Mat9 = SMatrix<C64, 9, 9>;

pub const DIM: usize = 3;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn hermitize3(m: &Mat3) -> Mat3 {
    (m + m.adjoint()).scale(0.5)
}

pub(crate) fn max_abs(m: impl IntoIterator<Item = C64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues below this magnitude are treated as exact zeros when taking
/// matrix square roots; they sit at the level of rounding noise for unit-trace
/// 3×3 matrices.
pub(crate) const EIG_ZERO: f64 = 1e-14;

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues below
/// `EIG_ZERO` (including small negatives from rounding) are clamped to zero.
pub(crate) fn psd_sqrt(m: &Mat3) -> Mat3 {
    let eig = SymmetricEigen::new(hermitize3(m));
    let mut out = Mat3::zeros();
    for k in 0..DIM {
        let lam = eig.eigenvalues[k];
        if lam <= EIG_ZERO {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()).scale(lam.sqrt());
    }
    out
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues3(m: &Mat3) -> [f64; 3] {
    let eig = SymmetricEigen::new(hermitize3(m));
    let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
    v.sort_by(f64::total_cmp);
    v
}
