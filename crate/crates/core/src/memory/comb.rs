use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::US_PER_S;
use crate::error::{validation, Result};

/// Transparency window of the filter crystal after power broadening.
pub const FILTER_WINDOW_HZ: f64 = 1.84e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToothShape {
    #[default]
    Square,
    /// Gaussian teeth whose FWHM equals the nominal tooth width.
    Gaussian,
}

/// Atomic frequency comb descriptor. Frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfcComb {
    /// Tooth spacing Δ.
    pub delta_hz: f64,
    /// Total comb bandwidth Γ_AFC.
    pub bandwidth_hz: f64,
    /// Comb centre relative to the signal reference frequency.
    pub center_offset_hz: f64,
    /// Δ divided by the tooth width.
    pub finesse: f64,
    pub peak_od: f64,
    /// Residual optical depth between teeth.
    pub background_od: f64,
    #[serde(default)]
    pub shape: ToothShape,
}

impl AfcComb {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_hz > 0.0) {
            return validation(format!("tooth spacing must be > 0, got {}", self.delta_hz));
        }
        if !(self.bandwidth_hz >= self.delta_hz) {
            return validation(format!(
                "bandwidth {} Hz narrower than tooth spacing {} Hz",
                self.bandwidth_hz, self.delta_hz
            ));
        }
        if !(self.finesse > 1.0) {
            return validation(format!("finesse must exceed 1, got {}", self.finesse));
        }
        if !(self.peak_od >= 0.0 && self.background_od >= 0.0) {
            return validation("optical depths must be ≥ 0");
        }
        Ok(())
    }

    pub fn tooth_width_hz(&self) -> f64 {
        self.delta_hz / self.finesse
    }

    pub fn tooth_count(&self) -> usize {
        temporal_capacity(self) as usize
    }

    /// Tooth centres, filling the band from its lower edge.
    pub fn tooth_centers_hz(&self) -> Vec<f64> {
        let lo = self.center_offset_hz - self.bandwidth_hz / 2.0;
        (0..self.tooth_count())
            .map(|k| lo + (k as f64 + 0.5) * self.delta_hz)
            .collect()
    }

    pub fn contains(&self, nu_hz: f64) -> bool {
        (nu_hz - self.center_offset_hz).abs() <= self.bandwidth_hz / 2.0
    }

    /// Optical depth at `nu_hz`, which must lie inside the comb band.
    fn od_at(&self, nu_hz: f64) -> f64 {
        let lo = self.center_offset_hz - self.bandwidth_hz / 2.0;
        let k = ((nu_hz - lo) / self.delta_hz).floor();
        let n = self.tooth_count() as f64;
        let width = self.tooth_width_hz();
        let contrast = self.peak_od - self.background_od;
        match self.shape {
            ToothShape::Square => {
                if k < 0.0 || k >= n {
                    return self.background_od;
                }
                let center = lo + (k + 0.5) * self.delta_hz;
                if (nu_hz - center).abs() < width / 2.0 {
                    self.peak_od
                } else {
                    self.background_od
                }
            }
            ToothShape::Gaussian => {
                let a = 4.0 * std::f64::consts::LN_2 / (width * width);
                let mut od = self.background_od;
                for j in [k - 1.0, k, k + 1.0] {
                    if j < 0.0 || j >= n {
                        continue;
                    }
                    let x = nu_hz - (lo + (j + 0.5) * self.delta_hz);
                    od += contrast * (-a * x * x).exp();
                }
                od
            }
        }
    }
}

/// Hole-burning preparation: one transparent pit per comb, each holding one
/// comb feature; bulk absorption elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralPrep {
    pub pit_width_hz: f64,
    pub bulk_od: f64,
    pub resolution_hz: f64,
    pub combs: Vec<AfcComb>,
}

impl SpectralPrep {
    /// Pit 16 MHz wide, resolution Δ/20.
    pub fn single(comb: AfcComb) -> Self {
        Self { pit_width_hz: 16e6, bulk_od: 5.0, resolution_hz: comb.delta_hz / 20.0, combs: vec![comb] }
    }

    /// Two identical combs separated by `separation_hz`.
    pub fn double(comb: AfcComb, separation_hz: f64) -> Self {
        let second = AfcComb { center_offset_hz: comb.center_offset_hz + separation_hz, ..comb };
        Self { combs: vec![comb, second], ..Self::single(comb) }
    }
}

/// Optical depth sampled on a uniform detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionProfile {
    pub detuning_hz: Vec<f64>,
    pub od: Vec<f64>,
    pub step_hz: f64,
    /// Centres of the comb features, in preparation order.
    pub feature_centers_hz: Vec<f64>,
}

impl AbsorptionProfile {
    /// `∫ (od − background) dν` over the band of `comb`.
    pub fn tooth_area(&self, comb: &AfcComb) -> f64 {
        self.detuning_hz
            .iter()
            .zip(&self.od)
            .filter(|(nu, _)| comb.contains(**nu))
            .map(|(_, od)| (od - comb.background_od) * self.step_hz)
            .sum()
    }
}

pub fn build_spectral_structure(prep: &SpectralPrep) -> Result<AbsorptionProfile> {
    if prep.combs.is_empty() {
        return validation("no comb features to prepare");
    }
    let min_delta = prep.combs.iter().map(|c| c.delta_hz).fold(f64::INFINITY, f64::min);
    if !(prep.resolution_hz > 0.0 && prep.resolution_hz <= min_delta / 20.0 * (1.0 + 1e-12)) {
        return validation(format!(
            "sampling resolution {} Hz coarser than Δ/20 = {} Hz",
            prep.resolution_hz,
            min_delta / 20.0
        ));
    }
    for c in &prep.combs {
        c.validate()?;
        if c.bandwidth_hz > prep.pit_width_hz {
            return validation(format!(
                "comb feature of {} Hz wider than the {} Hz pit",
                c.bandwidth_hz, prep.pit_width_hz
            ));
        }
    }
    let half_pit = prep.pit_width_hz / 2.0;
    let lo = prep.combs.iter().map(|c| c.center_offset_hz).fold(f64::INFINITY, f64::min) - half_pit - 1e6;
    let hi = prep.combs.iter().map(|c| c.center_offset_hz).fold(f64::NEG_INFINITY, f64::max) + half_pit + 1e6;
    let n = ((hi - lo) / prep.resolution_hz).ceil() as usize;
    let mut detuning_hz = Vec::with_capacity(n);
    let mut od = Vec::with_capacity(n);
    for k in 0..n {
        // sample at bin midpoints so tooth edges never fall on a sample
        let nu = lo + (k as f64 + 0.5) * prep.resolution_hz;
        let value = match prep.combs.iter().find(|c| c.contains(nu)) {
            Some(c) => c.od_at(nu),
            None if prep.combs.iter().any(|c| (nu - c.center_offset_hz).abs() <= half_pit) => 0.0,
            None => prep.bulk_od,
        };
        detuning_hz.push(nu);
        od.push(value);
    }
    Ok(AbsorptionProfile {
        detuning_hz,
        od,
        step_hz: prep.resolution_hz,
        feature_centers_hz: prep.combs.iter().map(|c| c.center_offset_hz).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyModel {
    /// Return a measured efficiency regardless of the comb profile.
    Calibrated(f64),
    /// First-order echo from the comb's Fourier response, sampled at
    /// `samples_per_tooth` points per period Δ.
    Fourier { samples_per_tooth: usize },
}

/// Echo efficiency after a storage delay `at_time_us`.
///
/// In the Fourier model the echo amplitude is the Fourier component at the
/// delay of the band-limited optical-depth modulation `d(ν) − d̄`, normalized
/// by the bandwidth, and the echo is attenuated by the mean depth:
/// `η(t) = |Γ⁻¹ ∫ (d(ν) − d̄) e^{2πiνt} dν|² · e^{−d̄}`. For square teeth at
/// `t = 1/Δ` this reduces to `(d_peak/F · sinc(π/F))² e^{−d̄}`.
pub fn echo_efficiency(comb: &AfcComb, at_time_us: f64, model: EfficiencyModel) -> Result<f64> {
    comb.validate()?;
    match model {
        EfficiencyModel::Calibrated(eta) => {
            if !(0.0..=1.0).contains(&eta) {
                return validation(format!("calibrated efficiency {eta} outside [0, 1]"));
            }
            Ok(eta)
        }
        EfficiencyModel::Fourier { samples_per_tooth } => {
            if samples_per_tooth < 20 {
                return validation("Fourier model needs at least 20 samples per tooth period");
            }
            let (nus, ods) = sample_band(comb, samples_per_tooth);
            Ok(fourier_efficiency(&nus, &ods, comb.bandwidth_hz, at_time_us))
        }
    }
}

fn sample_band(comb: &AfcComb, samples_per_tooth: usize) -> (Vec<f64>, Vec<f64>) {
    let step = comb.delta_hz / samples_per_tooth as f64;
    let n = (comb.bandwidth_hz / step).round() as usize;
    let lo = comb.center_offset_hz - comb.bandwidth_hz / 2.0;
    let nus: Vec<f64> = (0..n).map(|k| lo + (k as f64 + 0.5) * step).collect();
    let ods = nus.iter().map(|nu| comb.od_at(*nu)).collect();
    (nus, ods)
}

fn fourier_efficiency(nus: &[f64], ods: &[f64], bandwidth_hz: f64, at_time_us: f64) -> f64 {
    let n = ods.len() as f64;
    let mean = ods.iter().sum::<f64>() / n;
    let t_s = at_time_us / US_PER_S;
    let center = (nus[0] + nus[nus.len() - 1]) / 2.0;
    let step = bandwidth_hz / n;
    let amp: Complex64 = nus
        .iter()
        .zip(ods)
        .map(|(nu, od)| Complex64::from_polar((od - mean) * step, 2.0 * std::f64::consts::PI * (nu - center) * t_s))
        .sum::<Complex64>()
        / bandwidth_hz;
    amp.norm_sqr() * (-mean).exp()
}

/// Scan `steps` delays uniformly inside the open interval `(0, 2/Δ)` and return
/// the delay (µs) with the largest Fourier-model efficiency and that efficiency.
pub fn scan_echo_delay(comb: &AfcComb, steps: usize, samples_per_tooth: usize) -> Result<(f64, f64)> {
    comb.validate()?;
    let span_us = 2.0 * US_PER_S / comb.delta_hz;
    let (nus, ods) = sample_band(comb, samples_per_tooth);
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..steps {
        let t = (j as f64 + 1.0) * span_us / (steps as f64 + 1.0);
        let eta = fourier_efficiency(&nus, &ods, comb.bandwidth_hz, t);
        if eta > best.1 {
            best = (t, eta);
        }
    }
    Ok(best)
}

/// Number of temporal modes a comb supports, `⌊Γ_AFC/Δ⌋`.
pub fn temporal_capacity(comb: &AfcComb) -> u64 {
    spectral_capacity(comb.bandwidth_hz, comb.delta_hz)
}

/// `⌊bandwidth/spacing⌋`, tolerant of rounding in exact ratios.
pub fn spectral_capacity(bandwidth_hz: f64, spacing_hz: f64) -> u64 {
    if !(spacing_hz > 0.0) || !(bandwidth_hz >= 0.0) {
        return 0;
    }
    (bandwidth_hz / spacing_hz + 1e-9).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comb() -> AfcComb {
        AfcComb {
            delta_hz: 200e3,
            bandwidth_hz: 2e6,
            center_offset_hz: 0.0,
            finesse: 4.0,
            peak_od: 10.0,
            background_od: 0.2,
            shape: ToothShape::Square,
        }
    }

    #[test]
    fn ten_teeth_per_comb() {
        let c = comb();
        assert_eq!(c.tooth_count(), 10);
        assert_eq!(temporal_capacity(&c), 10);
        let centers = c.tooth_centers_hz();
        assert_eq!(centers.len(), 10);
        for w in centers.windows(2) {
            assert!((w[1] - w[0] - 200e3).abs() < 1e-6);
        }
    }

    #[test]
    fn sampled_profile_has_ten_teeth() {
        let p = build_spectral_structure(&SpectralPrep::single(comb())).unwrap();
        // count rising edges inside the band
        let band: Vec<f64> = p
            .detuning_hz
            .iter()
            .zip(&p.od)
            .filter(|(nu, _)| comb().contains(**nu))
            .map(|(_, od)| *od)
            .collect();
        let rises = band.windows(2).filter(|w| w[0] < 5.0 && w[1] >= 5.0).count()
            + usize::from(band[0] >= 5.0);
        assert_eq!(rises, 10);
    }

    #[test]
    fn infinite_finesse_has_no_tooth_area() {
        let c = AfcComb { finesse: 1e12, ..comb() };
        let p = build_spectral_structure(&SpectralPrep::single(c)).unwrap();
        assert!(p.tooth_area(&c).abs() < 1e-9);
        // tooth edges fall between samples at Δ/40
        let prep = SpectralPrep { resolution_hz: 5e3, ..SpectralPrep::single(comb()) };
        let finite = build_spectral_structure(&prep).unwrap();
        // 10 teeth · (10 − 0.2) · 50 kHz
        let a = finite.tooth_area(&comb());
        assert!((a - 10.0 * 9.8 * 50e3).abs() < 1e-3, "{a}");
    }

    #[test]
    fn double_comb_centers_are_80_mhz_apart() {
        let p = build_spectral_structure(&SpectralPrep::double(comb(), 80e6)).unwrap();
        assert_eq!(p.feature_centers_hz.len(), 2);
        assert_eq!(p.feature_centers_hz[1] - p.feature_centers_hz[0], 80e6);
        // transparent between teeth inside the second pit, bulk between pits
        let at = |nu: f64| {
            let k = p.detuning_hz.iter().position(|x| *x >= nu).unwrap();
            p.od[k]
        };
        assert_eq!(at(40e6), 5.0);
        assert_eq!(at(80e6 + 5e6), 0.0);
    }

    #[test]
    fn feature_wider_than_pit_rejected() {
        let mut prep = SpectralPrep::single(comb());
        prep.pit_width_hz = 1e6;
        assert!(build_spectral_structure(&prep).is_err());
        let mut prep = SpectralPrep::single(comb());
        prep.resolution_hz = 50e3;
        assert!(build_spectral_structure(&prep).is_err());
    }

    #[test]
    fn invalid_combs_rejected() {
        assert!(AfcComb { finesse: 1.0, ..comb() }.validate().is_err());
        assert!(AfcComb { bandwidth_hz: 100e3, ..comb() }.validate().is_err());
        assert!(AfcComb { delta_hz: 0.0, ..comb() }.validate().is_err());
        assert!(AfcComb { peak_od: -1.0, ..comb() }.validate().is_err());
    }

    #[test]
    fn echo_peaks_at_inverse_spacing() {
        let c = comb();
        let (t, _) = scan_echo_delay(&c, 400, 40).unwrap();
        let step = 10.0 / 401.0;
        assert!((t - 5.0).abs() <= step, "{t}");
    }

    #[test]
    fn square_comb_matches_closed_form() {
        // (d/F · sinc(π/F))² e^{−d̄} with contrast d = peak − background and
        // d̄ = background + d/F.
        let c = comb();
        let d = c.peak_od - c.background_od;
        let x = std::f64::consts::PI / c.finesse;
        let mean = c.background_od + d / c.finesse;
        let closed = (d / c.finesse * x.sin() / x).powi(2) * (-mean).exp();
        let eta = echo_efficiency(&c, 5.0, EfficiencyModel::Fourier { samples_per_tooth: 400 }).unwrap();
        assert!((eta - closed).abs() < 1e-3 * closed, "{eta} vs {closed}");
    }

    #[test]
    fn unmodulated_absorber_has_no_echo() {
        let flat = AfcComb { peak_od: 3.0, background_od: 3.0, ..comb() };
        let eta = echo_efficiency(&flat, 5.0, EfficiencyModel::Fourier { samples_per_tooth: 40 }).unwrap();
        assert!(eta < 1e-20);
        let near_one = AfcComb { finesse: 1.0 + 1e-9, ..comb() };
        let eta = echo_efficiency(&near_one, 5.0, EfficiencyModel::Fourier { samples_per_tooth: 40 }).unwrap();
        assert!(eta < 1e-12, "{eta}");
    }

    #[test]
    fn calibrated_override() {
        let eta = echo_efficiency(&comb(), 5.0, EfficiencyModel::Calibrated(0.0551)).unwrap();
        assert_eq!(eta, 0.0551);
        assert!(echo_efficiency(&comb(), 5.0, EfficiencyModel::Calibrated(1.5)).is_err());
    }

    #[test]
    fn capacity_arithmetic() {
        assert_eq!(temporal_capacity(&AfcComb { bandwidth_hz: 200e3, ..comb() }), 1);
        assert_eq!(spectral_capacity(5e9, 80e6), 62);
        assert!(spectral_capacity(5e9, 80e6) > 60);
    }
}
