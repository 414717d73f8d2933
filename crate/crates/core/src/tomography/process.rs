//! Linear-inversion process tomography followed by projection onto the set of
//! completely positive, trace-preserving χ matrices.

use std::sync::LazyLock;

use nalgebra::{DMatrix, DVector, SMatrix, SVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qutrit::{lambda_basis, DensityMatrix, Mat9, ProcessMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub max_rounds: usize,
    /// Largest tolerated negative eigenvalue and trace-preservation residual.
    pub tolerance: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { max_rounds: 1000, tolerance: 1e-8 }
    }
}

/// Trace-preservation constraint `T(χ) = Σₘₙ χₘₙ λₙ†λₘ` as a 9×81 matrix
/// acting on `vec(χ)` (index `9m + n`).
type TpMatrix = SMatrix<C64, 9, 81>;

struct TpProjector {
    t: TpMatrix,
    /// `T† (T T†)⁻¹`
    pinv: SMatrix<C64, 81, 9>,
    identity: SVector<C64, 9>,
}

static TP: LazyLock<TpProjector> = LazyLock::new(|| {
    let ops = lambda_basis().ops();
    let mut t = TpMatrix::zeros();
    for m in 0..9 {
        for n in 0..9 {
            let prod = ops[n].adjoint() * ops[m];
            for r in 0..3 {
                for c in 0..3 {
                    t[(3 * r + c, 9 * m + n)] = prod[(r, c)];
                }
            }
        }
    }
    let tt = t * t.adjoint();
    let inv = tt.try_inverse().expect("trace constraint has full row rank");
    let pinv = t.adjoint() * inv;
    let mut identity = SVector::<C64, 9>::zeros();
    for k in 0..3 {
        identity[4 * k] = C64::new(1.0, 0.0);
    }
    TpProjector { t, pinv, identity }
});

fn vec81(chi: &Mat9) -> SVector<C64, 81> {
    SVector::<C64, 81>::from_fn(|k, _| chi[(k / 9, k % 9)])
}

fn unvec81(v: &SVector<C64, 81>) -> Mat9 {
    Mat9::from_fn(|m, n| v[9 * m + n])
}

fn hermitize9(m: &Mat9) -> Mat9 {
    (m + m.adjoint()).scale(0.5)
}

fn project_tp(chi: &Mat9) -> Mat9 {
    let x = vec81(chi);
    let resid = TP.t * x - TP.identity;
    hermitize9(&unvec81(&(x - TP.pinv * resid)))
}

fn project_psd(chi: &Mat9) -> Mat9 {
    let eig = SymmetricEigen::new(hermitize9(chi));
    let mut out = Mat9::zeros();
    for k in 0..9 {
        let lam = eig.eigenvalues[k];
        if lam > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (v * v.adjoint()).scale(lam);
        }
    }
    hermitize9(&out)
}

fn residuals(chi: &Mat9) -> (f64, f64) {
    let pm = ProcessMatrix::from_raw(*chi);
    (-pm.min_eigenvalue(), pm.tp_residual())
}

/// Reconstruct χ from paired input/output states.
///
/// Solves `outⱼ = Σₘₙ χₘₙ λₘ inⱼ λₙ†` for all pairs in least squares, then
/// moves the solution to the nearest (Frobenius) Hermitian PSD, trace-preserving
/// χ with Dykstra's alternating projections.
pub fn reconstruct_process(
    inputs: &[DensityMatrix],
    outputs: &[DensityMatrix],
) -> Result<ProcessMatrix> {
    reconstruct_process_with(inputs, outputs, ProjectionOptions::default())
}

pub fn reconstruct_process_with(
    inputs: &[DensityMatrix],
    outputs: &[DensityMatrix],
    opts: ProjectionOptions,
) -> Result<ProcessMatrix> {
    if inputs.len() != outputs.len() {
        return Err(Error::Reconstruction(format!(
            "{} inputs but {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    let chi = least_squares_chi(inputs, outputs)?;
    let chi = cptp_projection(&chi, opts)?;
    ProcessMatrix::new(chi).map_err(|e| Error::Reconstruction(e.to_string()))
}

fn least_squares_chi(inputs: &[DensityMatrix], outputs: &[DensityMatrix]) -> Result<Mat9> {
    let ops = lambda_basis().ops();
    let rows = 9 * inputs.len();
    let mut a = DMatrix::<C64>::zeros(rows, 81);
    let mut b = DVector::<C64>::zeros(rows);
    for (j, (rin, rout)) in inputs.iter().zip(outputs).enumerate() {
        for m in 0..9 {
            let left = ops[m] * rin.matrix();
            for n in 0..9 {
                let term = left * ops[n].adjoint();
                for r in 0..3 {
                    for c in 0..3 {
                        a[(9 * j + 3 * r + c, 9 * m + n)] = term[(r, c)];
                    }
                }
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                b[9 * j + 3 * r + c] = rout.matrix()[(r, c)];
            }
        }
    }
    let svd = a.svd(true, true);
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if rows < 81 || !(min > 1e-9 * max) {
        return Err(Error::RankDeficient(if rows < 81 { 0.0 } else { min }));
    }
    let x = svd
        .solve(&b, 1e-12 * max)
        .map_err(|e| Error::Reconstruction(e.to_string()))?;
    let x = SVector::<C64, 81>::from_column_slice(x.as_slice());
    Ok(hermitize9(&unvec81(&x)))
}

/// Dykstra's algorithm between the PSD cone and the trace-preservation affine
/// subspace, started from `chi`.
fn cptp_projection(chi: &Mat9, opts: ProjectionOptions) -> Result<Mat9> {
    let mut x = project_tp(chi);
    let (neg, tp) = residuals(&x);
    if neg <= opts.tolerance && tp <= opts.tolerance {
        return Ok(x);
    }
    let mut p = Mat9::zeros();
    let mut q = Mat9::zeros();
    for _ in 0..opts.max_rounds {
        let y = project_psd(&(x + p));
        p = x + p - y;
        let next = project_tp(&(y + q));
        q = y + q - next;
        x = next;
        let (neg, tp) = residuals(&x);
        if neg <= opts.tolerance && tp <= opts.tolerance {
            return Ok(x);
        }
    }
    let (neg, tp) = residuals(&x);
    Err(Error::Reconstruction(format!(
        "CPTP projection did not converge in {} rounds (min eigenvalue {:.3e}, TP residual {tp:.3e})",
        opts.max_rounds, -neg
    )))
}
