//! Random states and unitaries for property tests and Monte Carlo studies.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, Mat3, QutritKet, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> QutritKet {
    loop {
        let a = [gaussian(rng), gaussian(rng), gaussian(rng)];
        if let Ok(k) = QutritKet::normalized(a) {
            return k;
        }
    }
}

/// Hilbert–Schmidt random mixed state (`G G† / Tr`, Ginibre `G`).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = Mat3::from_fn(|_, _| gaussian(rng));
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::project(m.unscale(tr), 1e-9).expect("Ginibre product is PSD")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let g = Mat3::from_fn(|_, _| gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut phases = Mat3::zeros();
    for k in 0..3 {
        let d = r[(k, k)];
        phases[(k, k)] = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
    }
    q * phases
}
