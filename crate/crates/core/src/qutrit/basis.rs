use std::sync::LazyLock;

use super::{c, Mat3, Mat9, C64};

/// The nine Hermitian operators λ₁…λ₉ used to expand qutrit process matrices.
///
/// λ₁ is the identity; λ₂…λ₉ are the Gell-Mann matrices in the
/// `(|L⟩, |G⟩, |R⟩)` ordering. The set is trace-orthogonal but not normalized:
/// `Tr(λ₁†λ₁) = 3` while every other element has `Tr(λᵢ†λᵢ) = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaBasis {
    ops: [Mat3; 9],
}

impl LambdaBasis {
    pub fn ops(&self) -> &[Mat3; 9] {
        &self.ops
    }

    /// λ with 1-based index, as written in the literature.
    pub fn get(&self, one_based: usize) -> &Mat3 {
        &self.ops[one_based - 1]
    }
}

fn build_basis() -> LambdaBasis {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let s = 1.0 / 3f64.sqrt();
    let ops = [
        Mat3::new(o, z, z, z, o, z, z, z, o),
        Mat3::new(z, o, z, o, z, z, z, z, z),
        Mat3::new(z, -i, z, i, z, z, z, z, z),
        Mat3::new(o, z, z, z, -o, z, z, z, z),
        Mat3::new(z, z, o, z, z, z, o, z, z),
        Mat3::new(z, z, -i, z, z, z, i, z, z),
        Mat3::new(z, z, z, z, z, o, z, o, z),
        Mat3::new(z, z, z, z, z, -i, z, i, z),
        Mat3::new(c(s, 0.0), z, z, z, c(s, 0.0), z, z, z, c(-2.0 * s, 0.0)),
    ];
    LambdaBasis { ops }
}

static BASIS: LazyLock<LambdaBasis> = LazyLock::new(build_basis);

/// Inverse of the 9×9 matrix whose columns are the row-major vectorizations of
/// λ₁…λ₉. The expansion solves this system directly instead of relying on
/// trace-orthogonality, so it stays correct for the non-uniform norms.
static EXPAND: LazyLock<Mat9> = LazyLock::new(|| {
    let mut b = Mat9::zeros();
    for (k, op) in BASIS.ops.iter().enumerate() {
        for r in 0..3 {
            for col in 0..3 {
                b[(3 * r + col, k)] = op[(r, col)];
            }
        }
    }
    b.try_inverse().expect("λ basis spans the 3×3 matrices")
});

pub fn lambda_basis() -> &'static LambdaBasis {
    &BASIS
}

/// Frobenius norms `√Tr(λᵢ†λᵢ)`.
pub fn lambda_norms() -> [f64; 9] {
    let mut out = [0.0; 9];
    for (k, op) in BASIS.ops.iter().enumerate() {
        out[k] = (op.adjoint() * op).trace().re.sqrt();
    }
    out
}

/// Coefficients `cᵢ` with `op = Σ cᵢ λᵢ`.
pub fn lambda_expand(op: &Mat3) -> [C64; 9] {
    let mut v = nalgebra::SVector::<C64, 9>::zeros();
    for r in 0..3 {
        for col in 0..3 {
            v[3 * r + col] = op[(r, col)];
        }
    }
    let sol = *EXPAND * v;
    let mut out = [C64::new(0.0, 0.0); 9];
    out.copy_from_slice(sol.as_slice());
    out
}

/// `Σ cᵢ λᵢ`
pub fn lambda_recombine(coeffs: &[C64; 9]) -> Mat3 {
    BASIS
        .ops
        .iter()
        .zip(coeffs)
        .fold(Mat3::zeros(), |acc, (op, k)| acc + op * *k)
}
