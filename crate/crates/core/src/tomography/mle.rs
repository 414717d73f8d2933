//! Maximum-likelihood state reconstruction by the RρR fixed-point iteration.
//!
//! The nine projectors do not sum to a multiple of the identity, so the raw
//! RρR map does not have the MLE as a fixed point. The data are first
//! re-expressed against an equivalent POVM: with `G = Σ Eᵢ Πᵢ` (exposure
//! weighted) and `S = G^{-1/2}`, the operators `Π̃ᵢ = S Eᵢ Πᵢ S` sum to the
//! identity and `σ̃ = G^{1/2} ρ G^{1/2} / Tr(Gρ)` reproduces the normalized
//! click probabilities `Eᵢ Tr(ρΠᵢ) / Tr(Gρ)`. RρR runs on `σ̃`; the physical
//! state is recovered as `ρ ∝ S σ̃ S`.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{CountRecord, TomographySettings};
use crate::error::{Error, Result};
use crate::qutrit::{hermitize3, max_abs, DensityMatrix, Mat3, DIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Stop once no entry of ρ changes by more than this between iterations.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record the log-likelihood after every iteration.
    pub track_likelihood: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 10_000, track_likelihood: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyResult {
    #[serde(skip)]
    pub rho_hat: DensityMatrix,
    pub log_likelihood: f64,
    /// Filled in by the bootstrap when requested.
    pub std_error_fidelity: Option<f64>,
    pub iterations: usize,
    /// `false` when the iteration cap was hit short of optimality; `rho_hat` is
    /// then the last iterate.
    pub converged: bool,
    /// Number of iterations that fell back to a diluted step.
    pub diluted_steps: usize,
    /// `λ_max(R(ρ̂)) − 1`, an upper bound on the log-likelihood deficit per
    /// count; zero at the exact optimum.
    pub optimality_gap: f64,
    #[serde(skip)]
    pub likelihood_trace: Vec<f64>,
}

/// Reconstruct from count records. Records sharing a setting are pooled.
pub fn reconstruct_state(
    records: &[CountRecord],
    settings: &TomographySettings,
) -> Result<TomographyResult> {
    reconstruct_state_with(records, settings, MleOptions::default())
}

pub fn reconstruct_state_with(
    records: &[CountRecord],
    settings: &TomographySettings,
    opts: MleOptions,
) -> Result<TomographyResult> {
    let n = settings.len();
    let mut counts = vec![0.0; n];
    let mut exposure = vec![0.0; n];
    for r in records {
        if r.setting_index >= n {
            return Err(Error::Reconstruction(format!(
                "record refers to setting {} of {n}",
                r.setting_index
            )));
        }
        counts[r.setting_index] += r.counts as f64;
        exposure[r.setting_index] += r.exposure as f64;
    }
    if let Some(k) = exposure.iter().position(|e| *e <= 0.0) {
        return Err(Error::Reconstruction(format!("setting {k} has no exposure")));
    }
    reconstruct_from_frequencies(&counts, &exposure, settings, opts)
}

/// Reconstruct from real-valued counts (for example exact expected counts in
/// the infinite-exposure limit) and per-setting exposures.
pub fn reconstruct_from_frequencies(
    counts: &[f64],
    exposure: &[f64],
    settings: &TomographySettings,
    opts: MleOptions,
) -> Result<TomographyResult> {
    let n = settings.len();
    if counts.len() != n || exposure.len() != n {
        return Err(Error::Reconstruction(format!(
            "expected {n} settings, got {} counts and {} exposures",
            counts.len(),
            exposure.len()
        )));
    }
    if counts.iter().any(|c| !(*c >= 0.0)) {
        return Err(Error::Reconstruction("negative or NaN counts".into()));
    }
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Reconstruction("all counts are zero".into()));
    }
    let freqs: Vec<f64> = counts.iter().map(|c| c / total).collect();

    let g = settings
        .projectors()
        .iter()
        .zip(exposure)
        .fold(Mat3::zeros(), |acc, (p, e)| acc + p.scale(*e));
    let (s, s_inv) = inverse_sqrt(&g)?;
    let povm: Vec<Mat3> = settings
        .projectors()
        .iter()
        .zip(exposure)
        .map(|(p, e)| hermitize3(&(s * p.scale(*e) * s)))
        .collect();

    let to_physical = |sigma: &Mat3| -> Mat3 {
        let m = hermitize3(&(s * sigma * s));
        m.unscale(m.trace().re)
    };
    let likelihood = |sigma: &Mat3| -> f64 {
        freqs
            .iter()
            .zip(&povm)
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, p)| f * (sigma * p).trace().re.max(f64::MIN_POSITIVE).ln())
            .sum()
    };
    let r_operator = |sigma: &Mat3| -> Mat3 {
        freqs
            .iter()
            .zip(&povm)
            .filter(|(f, _)| **f > 0.0)
            .fold(Mat3::zeros(), |acc, (f, p)| {
                let prob = (sigma * p).trace().re.max(f64::MIN_POSITIVE);
                acc + p.scale(f / prob)
            })
    };

    // ρ₀ = I/3 maps to σ̃₀ ∝ G.
    let mut sigma = normalize(&(s_inv * s_inv));
    let mut rho = to_physical(&sigma);
    let mut ll = likelihood(&sigma);
    let mut trace = Vec::new();
    if opts.track_likelihood {
        trace.push(ll);
    }
    let mut converged = false;
    let mut iterations = 0;
    let mut diluted_steps = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        let r = r_operator(&sigma);
        let mut next = normalize(&(r * sigma * r));
        let mut next_ll = likelihood(&next);
        if next_ll < ll - 1e-13 * ll.abs().max(1.0) {
            // Plain step overshot: shrink towards the identity map until the
            // likelihood stops decreasing.
            diluted_steps += 1;
            let mut eps = 1.0;
            for _ in 0..60 {
                eps *= 0.5;
                let d = Mat3::identity() + r.scale(eps);
                next = normalize(&(d * sigma * d));
                next_ll = likelihood(&next);
                if next_ll >= ll {
                    break;
                }
            }
        }
        let next_rho = to_physical(&next);
        let delta = max_abs((next_rho - rho).iter().copied());
        sigma = next;
        rho = next_rho;
        ll = next_ll;
        if opts.track_likelihood {
            trace.push(ll);
        }
        if delta < opts.tolerance {
            converged = true;
            break;
        }
    }

    // Near pure optima RρR creeps, and the iteration cap can be hit while
    // already optimal. λ_max(R) − 1 bounds the log-likelihood deficit per count.
    let gap = optimality_gap(&r_operator(&sigma));
    if gap <= GAP_TOL {
        converged = true;
    }

    let rho_hat = DensityMatrix::project(rho, 1e-8)
        .map_err(|e| Error::Reconstruction(format!("estimate left the state space: {e}")))?;
    Ok(TomographyResult {
        rho_hat,
        log_likelihood: ll,
        std_error_fidelity: None,
        iterations,
        converged,
        diluted_steps,
        optimality_gap: gap,
        likelihood_trace: trace,
    })
}

/// Optimality gap below which an estimate that hit the iteration cap still
/// counts as converged.
const GAP_TOL: f64 = 1e-9;

fn optimality_gap(r: &Mat3) -> f64 {
    let eig = SymmetricEigen::new(hermitize3(r));
    eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1.0
}

fn normalize(m: &Mat3) -> Mat3 {
    let h = hermitize3(m);
    h.unscale(h.trace().re)
}

/// `(G^{-1/2}, G^{1/2})` for Hermitian positive-definite `G`.
fn inverse_sqrt(g: &Mat3) -> Result<(Mat3, Mat3)> {
    let eig = SymmetricEigen::new(hermitize3(g));
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut inv = Mat3::zeros();
    let mut sq = Mat3::zeros();
    for k in 0..DIM {
        let lam = eig.eigenvalues[k];
        if !(lam > 1e-12 * max) {
            return Err(Error::Reconstruction(
                "measurement operators are not informationally complete".into(),
            ));
        }
        let v = eig.eigenvectors.column(k);
        let outer = v * v.adjoint();
        inv += outer.scale(1.0 / lam.sqrt());
        sq += outer.scale(lam.sqrt());
    }
    Ok((inv, sq))
}
