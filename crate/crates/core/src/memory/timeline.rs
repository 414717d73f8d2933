use serde::{Deserialize, Serialize};

use super::US_PER_S;
use crate::error::{Error, Result};

/// Rounding slack for comparisons of derived times, µs.
const TIME_EPS_US: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPair {
    /// Transfer to the spin level, µs.
    pub down_us: f64,
    /// Transfer back to the excited level, µs.
    pub up_us: f64,
}

impl ControlPair {
    pub fn spin_time_us(&self) -> f64 {
        self.up_us - self.down_us
    }
}

/// Times of one storage cycle, all in µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageTimeline {
    pub t_in_us: f64,
    pub t_echo_us: f64,
    /// Absent for a pure AFC echo (no spin-wave transfer).
    pub control: Option<ControlPair>,
    pub t_out_us: f64,
}

impl StorageTimeline {
    pub fn storage_time_us(&self) -> f64 {
        self.t_out_us - self.t_in_us
    }

    pub fn spin_time_us(&self) -> f64 {
        self.control.map_or(0.0, |c| c.spin_time_us())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_echo_us > self.t_in_us) {
            return Err(Error::Schedule(format!(
                "echo at {} µs not after absorption at {} µs",
                self.t_echo_us, self.t_in_us
            )));
        }
        if let Some(c) = self.control {
            if !(c.down_us > self.t_in_us && c.down_us < self.t_echo_us) {
                return Err(Error::Schedule(format!(
                    "control pulse at {} µs must fall between absorption ({} µs) and echo ({} µs)",
                    c.down_us, self.t_in_us, self.t_echo_us
                )));
            }
            if !(c.up_us >= c.down_us) {
                return Err(Error::Schedule("second control pulse precedes the first".into()));
            }
        }
        let expected = self.t_echo_us + self.spin_time_us();
        if (self.t_out_us - expected).abs() > TIME_EPS_US {
            return Err(Error::Schedule(format!(
                "retrieval at {} µs, expected {} µs",
                self.t_out_us, expected
            )));
        }
        Ok(())
    }
}

/// Timeline for absorption at t = 0 with the first control pulse placed a
/// tenth of the AFC delay before the echo.
pub fn storage_timeline(delta_hz: f64, t_spin_us: f64) -> Result<StorageTimeline> {
    if !(delta_hz > 0.0) {
        return Err(Error::Validation(format!("tooth spacing must be > 0, got {delta_hz}")));
    }
    let lead = 0.1 * US_PER_S / delta_hz;
    storage_timeline_with(delta_hz, t_spin_us, 0.0, lead)
}

pub fn storage_timeline_with(
    delta_hz: f64,
    t_spin_us: f64,
    t_in_us: f64,
    control_lead_us: f64,
) -> Result<StorageTimeline> {
    if !(delta_hz > 0.0) {
        return Err(Error::Validation(format!("tooth spacing must be > 0, got {delta_hz}")));
    }
    if !(t_spin_us >= 0.0) || !t_spin_us.is_finite() {
        return Err(Error::Validation(format!("spin storage time must be ≥ 0, got {t_spin_us}")));
    }
    let t_echo_us = t_in_us + US_PER_S / delta_hz;
    let control = (t_spin_us > 0.0).then(|| {
        let down_us = t_echo_us - control_lead_us;
        ControlPair { down_us, up_us: down_us + t_spin_us }
    });
    let timeline = StorageTimeline { t_in_us, t_echo_us, control, t_out_us: t_echo_us + t_spin_us };
    timeline.validate()?;
    Ok(timeline)
}
