use serde::Serialize;

use crate::error::{Error, Result};

/// How a metric's target relates to experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Target is an experimentally reported value with its uncertainty.
    ReportedMeasurement,
    /// Target is an experimentally reported range read off a figure.
    ReportedRange,
    /// Exact arithmetic consequence of stated parameters.
    Derived,
    /// Simulation output with no experimental counterpart.
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MetricValue {
    Number(f64),
    Count(u64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: MetricValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_uncertainty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_range: Option<[f64; 2]>,
    pub provenance: Provenance,
}

impl Metric {
    pub fn model(name: impl Into<String>, value: MetricValue) -> Self {
        Self {
            name: name.into(),
            value,
            uncertainty: None,
            unit: None,
            target: None,
            target_uncertainty: None,
            target_range: None,
            provenance: Provenance::Model,
        }
    }

    pub fn number(name: impl Into<String>, value: f64) -> Self {
        Self::model(name, MetricValue::Number(value))
    }

    pub fn measured(name: impl Into<String>, value: f64, target: f64, target_uncertainty: Option<f64>) -> Self {
        Self {
            target: Some(target),
            target_uncertainty,
            provenance: Provenance::ReportedMeasurement,
            ..Self::number(name, value)
        }
    }

    pub fn derived(name: impl Into<String>, value: MetricValue, target: f64) -> Self {
        Self { target: Some(target), provenance: Provenance::Derived, ..Self::model(name, value) }
    }

    pub fn in_range(name: impl Into<String>, value: f64, range: [f64; 2]) -> Self {
        Self { target_range: Some(range), provenance: Provenance::ReportedRange, ..Self::number(name, value) }
    }

    pub fn with_uncertainty(mut self, u: f64) -> Self {
        self.uncertainty = Some(u);
        self
    }

    pub fn with_unit(mut self, unit: &'static str) -> Self {
        self.unit = Some(unit);
        self
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.value {
            MetricValue::Number(v) => Some(v),
            MetricValue::Count(v) => Some(v as f64),
            _ => None,
        }
    }
}

/// A CSV or text file produced by a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self { scenario: scenario.to_string(), seed, metrics: Vec::new(), artifacts: Vec::new() }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub(crate) fn push(&mut self, m: Metric) {
        self.metrics.push(m);
    }

    pub(crate) fn attach<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        let contents = String::from_utf8(buf).map_err(|e| Error::Reporting(e.to_string()))?;
        self.artifacts.push(Artifact { name: name.to_string(), contents });
        Ok(())
    }
}
