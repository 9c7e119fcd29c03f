//! Post-hoc confidence calibrators: fit on held-out data, apply record-wise.
//!
//! Four methods with one shared application surface:
//!
//! * temperature scaling: one scalar T, logits z -> z/T, re-activated;
//! * Platt scaling: logits z -> a*z + b, then sigmoid;
//! * isotonic regression: monotone step map over confidences;
//! * histogram binning: per-confidence-bin replacement values.
//!
//! Temperature and Platt need logits and keep the record's logits in sync
//! with its confidences. Isotonic and histogram rewrite confidences
//! directly and drop logits, which the new confidences no longer match.
//!
//! Fitting takes a mode: `Dominant` fits on (dominant confidence,
//! correctness) pairs only, `Full` on all C per-class (confidence,
//! is-true-class) pairs. Application always rewrites the full confidence
//! vector regardless of fit mode, because downstream evaluation of all C
//! entries needs calibrated secondary confidences too.

mod histogram;
mod isotonic;
mod platt;
mod temperature;

pub use histogram::{fit_histogram, HistogramMap};
pub use isotonic::{fit_isotonic, IsotonicMap};
pub use platt::{fit_platt, PlattFit, PlattParams};
pub use temperature::{fit_temperature, TemperatureParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Activation, ConfidenceVector, Dataset, DetectionRecord, LogitVector, PredictionMode};

/// The (confidence, hit) pairs a fit mode selects from a dataset.
/// Dominant: one pair per record, target = dominant prediction correct.
/// Full: C pairs per record, target = class equals label.
pub(crate) fn confidence_pairs(data: &Dataset, mode: PredictionMode) -> Vec<(f64, bool)> {
    let mut pairs = Vec::new();
    for r in data.records() {
        match mode {
            PredictionMode::Dominant => {
                let (class, conf) = r.dominant();
                pairs.push((conf, class == r.label));
            }
            PredictionMode::Full => {
                for (class, &conf) in r.confidences.values().iter().enumerate() {
                    pairs.push((conf, class == r.label));
                }
            }
        }
    }
    pairs
}

/// Like [`confidence_pairs`] but over logits, for the logit-domain fits.
/// Errors when any record lacks logits.
pub(crate) fn logit_pairs(data: &Dataset, mode: PredictionMode) -> Result<Vec<(f64, bool)>> {
    let mut pairs = Vec::new();
    for r in data.records() {
        let z = r.logits.as_ref().ok_or_else(|| {
            Error::MissingLogits(format!("record '{}' has no logits", r.id))
        })?;
        match mode {
            PredictionMode::Dominant => {
                let (class, _) = r.dominant();
                pairs.push((z.values()[class], class == r.label));
            }
            PredictionMode::Full => {
                for (class, &zl) in z.values().iter().enumerate() {
                    pairs.push((zl, class == r.label));
                }
            }
        }
    }
    Ok(pairs)
}

/// A fitted calibrator of any method, ready to apply and to serialize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Calibrator {
    Temperature(TemperatureParams),
    Platt(PlattParams),
    Isotonic(IsotonicMap),
    Histogram(HistogramMap),
}

impl Calibrator {
    pub fn method(&self) -> &'static str {
        match self {
            Calibrator::Temperature(_) => "temperature",
            Calibrator::Platt(_) => "platt",
            Calibrator::Isotonic(_) => "isotonic",
            Calibrator::Histogram(_) => "histogram",
        }
    }

    /// Parameter invariants, checked after deserializing from untrusted
    /// files: constructors uphold them, JSON cannot be trusted to.
    pub fn validate(&self) -> Result<()> {
        match self {
            Calibrator::Temperature(p) => p.validate(),
            Calibrator::Platt(p) => p.validate(),
            Calibrator::Isotonic(m) => m.validate(),
            Calibrator::Histogram(m) => m.validate(),
        }
    }

    /// Applies this calibrator to one record. Ids, labels and features are
    /// preserved; see the module docs for what happens to logits.
    pub fn apply_record(&self, record: &DetectionRecord) -> Result<DetectionRecord> {
        match self {
            Calibrator::Temperature(p) => scale_logits(record, |z| z / p.temperature),
            Calibrator::Platt(p) => {
                let z = record.logits.as_ref().ok_or_else(|| {
                    Error::MissingLogits(format!("record '{}' has no logits", record.id))
                })?;
                let scaled: Vec<f64> = z.values().iter().map(|&v| p.a * v + p.b).collect();
                let logits = LogitVector::new(scaled)?;
                let confidences = logits.sigmoid();
                DetectionRecord::new(record.id.clone(), Some(logits), confidences, record.label, record.features.clone())
            }
            Calibrator::Isotonic(m) => remap_confidences(record, |c| m.map(c)),
            Calibrator::Histogram(m) => remap_confidences(record, |c| m.map(c)),
        }
    }
}

/// Divides or otherwise transforms logits and re-derives confidences
/// through the activation the record already uses.
fn scale_logits(record: &DetectionRecord, f: impl Fn(f64) -> f64) -> Result<DetectionRecord> {
    let z = record.logits.as_ref().ok_or_else(|| {
        Error::MissingLogits(format!("record '{}' has no logits", record.id))
    })?;
    let activation = Activation::infer(z, &record.confidences).ok_or_else(|| Error::InvalidRecord {
        id: record.id.clone(),
        reason: "confidences match neither activation of the logits".into(),
    })?;
    let logits = LogitVector::new(z.values().iter().map(|&v| f(v)).collect())?;
    let confidences = activation.apply(&logits);
    DetectionRecord::new(record.id.clone(), Some(logits), confidences, record.label, record.features.clone())
}

/// Rewrites every class confidence through `f` and drops logits, which no
/// longer describe the new confidences.
fn remap_confidences(record: &DetectionRecord, f: impl Fn(f64) -> f64) -> Result<DetectionRecord> {
    let mapped: Vec<f64> = record.confidences.values().iter().map(|&c| f(c)).collect();
    let confidences = ConfidenceVector::new(mapped)?;
    DetectionRecord::new(record.id.clone(), None, confidences, record.label, record.features.clone())
}

/// Applies `calibrator` to every record of `data`.
pub fn calibrate_dataset(data: &Dataset, calibrator: &Calibrator) -> Result<Dataset> {
    let records = data
        .records()
        .iter()
        .map(|r| calibrator.apply_record(r))
        .collect::<Result<Vec<_>>>()?;
    data.with_records(records)
}
