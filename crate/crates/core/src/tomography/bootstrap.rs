use rayon::prelude::*;

use super::{reconstruct_state, CountRecord, TomographySettings};
use crate::error::{validation, Result};
use crate::qutrit::{state_fidelity, DensityMatrix};
use crate::rng::{derive_seed, poisson, rng_from_seed};

/// Poisson-resample each record around its observed counts. The stream for a
/// record is keyed by `setting_index`, so the output does not depend on record
/// order.
pub fn resample_counts(records: &[CountRecord], seed: u64) -> Vec<CountRecord> {
    let mut pooled: Vec<CountRecord> = Vec::new();
    for r in records {
        match pooled.iter_mut().find(|p| p.setting_index == r.setting_index) {
            Some(p) => {
                p.counts += r.counts;
                p.exposure += r.exposure;
            }
            None => pooled.push(*r),
        }
    }
    pooled.sort_by_key(|r| r.setting_index);
    pooled
        .into_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r.setting_index as u64));
            CountRecord { counts: poisson(&mut rng, r.counts as f64), ..r }
        })
        .collect()
}

/// Standard deviation of `statistic` over `resamples` evaluations, each handed
/// its own derived seed. Resamples run in parallel; results are gathered in
/// index order before reduction.
pub fn bootstrap_std<F>(resamples: usize, seed: u64, statistic: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if resamples < 2 {
        return validation("bootstrap needs at least two resamples");
    }
    let values: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|k| statistic(derive_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Bootstrap standard deviation of the state fidelity between the
/// reconstruction of `records` and `reference`.
pub fn bootstrap_error(
    records: &[CountRecord],
    settings: &TomographySettings,
    reference: &DensityMatrix,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    if resamples < 100 {
        return validation(format!("need at least 100 resamples, got {resamples}"));
    }
    bootstrap_std(resamples, seed, |s| {
        let rec = resample_counts(records, s);
        let est = reconstruct_state(&rec, settings)?;
        Ok(state_fidelity(&est.rho_hat, reference))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qutrit::QutritKet;
    use crate::tomography::{simulate_counts, DetectionModel};

    #[test]
    fn std_vanishes_for_huge_counts() {
        let s = TomographySettings::standard();
        let rho = QutritKet::psi1().to_density().mix(&DensityMatrix::maximally_mixed(), 0.2).unwrap();
        let recs = simulate_counts(&rho, &s, 1_000_000_000_000, DetectionModel::IDEAL, 1).unwrap();
        let sd = bootstrap_error(&recs, &s, &rho, 100, 2).unwrap();
        assert!(sd < 1e-5, "{sd}");
    }

    #[test]
    fn std_scales_as_inverse_root_exposure() {
        // 100× more exposure should shrink the spread by ≈10×. The reference
        // differs from the true state so the fidelity moves at first order.
        let s = TomographySettings::standard();
        let target = QutritKet::psi2().to_density();
        let rho = target.mix(&DensityMatrix::maximally_mixed(), 0.1).unwrap();
        let lo = simulate_counts(&rho, &s, 1_000, DetectionModel::IDEAL, 3).unwrap();
        let hi = simulate_counts(&rho, &s, 100_000, DetectionModel::IDEAL, 3).unwrap();
        let sd_lo = bootstrap_error(&lo, &s, &target, 200, 4).unwrap();
        let sd_hi = bootstrap_error(&hi, &s, &target, 200, 4).unwrap();
        let ratio = sd_lo / sd_hi;
        assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn record_order_does_not_matter() {
        let s = TomographySettings::standard();
        let rho = QutritKet::psi1().to_density();
        let recs = simulate_counts(&rho, &s, 5_000, DetectionModel::IDEAL, 6).unwrap();
        let mut rev = recs.clone();
        rev.reverse();
        let a = bootstrap_error(&recs, &s, &rho, 100, 9).unwrap();
        let b = bootstrap_error(&rev, &s, &rho, 100, 9).unwrap();
        assert!((a - b).abs() <= 0.05 * a);
    }

    #[test]
    fn too_few_resamples_rejected() {
        let s = TomographySettings::standard();
        let rho = QutritKet::psi1().to_density();
        let recs = simulate_counts(&rho, &s, 100, DetectionModel::IDEAL, 6).unwrap();
        assert!(bootstrap_error(&recs, &s, &rho, 10, 1).is_err());
    }
}
