//! Domain types: confidence and logit vectors, detection records, datasets.
//!
//! A [`DetectionRecord`] is one matched detection: the classification head's
//! per-class confidences (and optionally the pre-activation logits they came
//! from), the ground-truth class, and optional geometric features such as
//! distance used for multidimensional binning. Records arrive pre-matched;
//! box geometry and IoU matching are out of scope.
//!
//! Detection heads in the wild use either independent per-class sigmoids or
//! a softmax over classes. Both are supported: when a record carries logits,
//! its confidences must equal one of the two activations applied to them
//! (within 1e-9 elementwise), and operations that rescale logits re-derive
//! the confidences through the same activation.

use crate::error::{Error, Result};

/// Tolerance for checking that stored confidences match `activation(logits)`.
pub const ACTIVATION_TOLERANCE: f64 = 1e-9;

/// Logistic function `1 / (1 + exp(-z))`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Per-class confidences of one detection, each in `[0, 1]`.
///
/// The vector is NOT required to sum to one: sigmoid heads emit independent
/// per-class scores. Softmax-normalized vectors are equally valid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceVector(Vec<f64>);

impl ConfidenceVector {
    /// Validates length >= 2 and every element finite in `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidVector(format!(
                "confidence vector needs at least 2 classes, got {}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidVector(format!(
                    "confidence[{i}] = {v} is not in [0, 1]"
                )));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Number of classes C.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Pre-activation scores of one detection, all finite, length >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector(Vec<f64>);

impl LogitVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidVector(format!(
                "logit vector needs at least 2 classes, got {}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidVector(format!("logit[{i}] = {v} is not finite")));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Independent per-class sigmoid activation.
    pub fn sigmoid(&self) -> ConfidenceVector {
        ConfidenceVector(self.0.iter().map(|&z| sigmoid(z)).collect())
    }

    /// Softmax activation with max-subtraction so large logits cannot
    /// overflow. Output is positive and sums to one.
    pub fn softmax(&self) -> ConfidenceVector {
        let max = self.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = self.0.iter().map(|&z| (z - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        ConfidenceVector(exps.iter().map(|&e| (e / sum).min(1.0)).collect())
    }
}

/// Which activation links a record's logits to its confidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Softmax,
}

impl Activation {
    pub fn apply(self, logits: &LogitVector) -> ConfidenceVector {
        match self {
            Activation::Sigmoid => logits.sigmoid(),
            Activation::Softmax => logits.softmax(),
        }
    }

    /// Detects which activation produced `confidences` from `logits`, within
    /// [`ACTIVATION_TOLERANCE`] elementwise. Sigmoid is checked first; if
    /// both match (possible only where they coincide, e.g. all-zero logits
    /// with C = 2) the answer is interchangeable.
    pub fn infer(logits: &LogitVector, confidences: &ConfidenceVector) -> Option<Activation> {
        let close = |a: &ConfidenceVector| {
            a.values()
                .iter()
                .zip(confidences.values())
                .all(|(x, y)| (x - y).abs() <= ACTIVATION_TOLERANCE)
        };
        if close(&logits.sigmoid()) {
            Some(Activation::Sigmoid)
        } else if close(&logits.softmax()) {
            Some(Activation::Softmax)
        } else {
            None
        }
    }
}

/// Index and value of the highest-confidence class. Ties break to the
/// lowest class index, deterministically.
pub fn dominant(conf: &ConfidenceVector) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in conf.values().iter().enumerate() {
        if v > conf.values()[best] {
            best = i;
        }
    }
    (best, conf.values()[best])
}

/// Which predictions of each record an operation consumes: only the
/// dominant (argmax) one, or all C per-class entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    Dominant,
    Full,
}

impl std::fmt::Display for PredictionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PredictionMode::Dominant => write!(f, "dominant"),
            PredictionMode::Full => write!(f, "full"),
        }
    }
}

/// One matched detection.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub id: String,
    pub logits: Option<LogitVector>,
    pub confidences: ConfidenceVector,
    /// Ground-truth class index, `< C`.
    pub label: usize,
    /// Optional geometric features (e.g. distance, size) for feature binning.
    pub features: Option<Vec<f64>>,
}

impl DetectionRecord {
    /// Validates label range, logit/confidence length agreement, activation
    /// consistency when logits are present, and feature finiteness.
    pub fn new(
        id: impl Into<String>,
        logits: Option<LogitVector>,
        confidences: ConfidenceVector,
        label: usize,
        features: Option<Vec<f64>>,
    ) -> Result<Self> {
        let id = id.into();
        if label >= confidences.len() {
            return Err(Error::InvalidRecord {
                id,
                reason: format!("label {label} out of range for {} classes", confidences.len()),
            });
        }
        if let Some(z) = &logits {
            if z.len() != confidences.len() {
                return Err(Error::InvalidRecord {
                    id,
                    reason: format!("{} logits but {} confidences", z.len(), confidences.len()),
                });
            }
            if Activation::infer(z, &confidences).is_none() {
                return Err(Error::InvalidRecord {
                    id,
                    reason: "confidences match neither sigmoid(logits) nor softmax(logits)".into(),
                });
            }
        }
        if let Some(f) = &features {
            if let Some((i, &v)) = f.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidRecord {
                    id,
                    reason: format!("feature[{i}] = {v} is not finite"),
                });
            }
        }
        Ok(Self { id, logits, confidences, label, features })
    }

    /// Dominant class index and confidence of this record.
    pub fn dominant(&self) -> (usize, f64) {
        dominant(&self.confidences)
    }

    /// Whether the dominant class equals the ground-truth label.
    pub fn dominant_correct(&self) -> bool {
        self.dominant().0 == self.label
    }
}

/// An immutable collection of records sharing one class count and feature
/// dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<DetectionRecord>,
    num_classes: usize,
    class_names: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates that every record has `num_classes` confidences and that
    /// feature vectors, where present, are present everywhere with one
    /// shared length.
    pub fn new(num_classes: usize, records: Vec<DetectionRecord>) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "num_classes must be >= 2, got {num_classes}"
            )));
        }
        let mut feature_dim: Option<usize> = None;
        for (i, r) in records.iter().enumerate() {
            if r.confidences.len() != num_classes {
                return Err(Error::InvalidRecord {
                    id: r.id.clone(),
                    reason: format!(
                        "record {i} has {} classes, dataset has {num_classes}",
                        r.confidences.len()
                    ),
                });
            }
            let dim = r.features.as_ref().map(|f| f.len());
            if i == 0 {
                feature_dim = dim;
            } else if dim != feature_dim {
                return Err(Error::InvalidRecord {
                    id: r.id.clone(),
                    reason: format!(
                        "record {i} has feature dimensionality {dim:?}, dataset has {feature_dim:?}"
                    ),
                });
            }
        }
        Ok(Self { records, num_classes, class_names: None, feature_names: None })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_classes {
            return Err(Error::InvalidConfig(format!(
                "{} class names for {} classes",
                names.len(),
                self.num_classes
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if let Some(dim) = self.feature_dim() {
            if names.len() != dim {
                return Err(Error::InvalidConfig(format!(
                    "{} feature names for {dim} feature dims",
                    names.len()
                )));
            }
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    /// Rebuilds the dataset with new records, preserving class count and
    /// names. Used by calibrators and distortions.
    pub fn with_records(&self, records: Vec<DetectionRecord>) -> Result<Self> {
        let mut out = Self::new(self.num_classes, records)?;
        out.class_names = self.class_names.clone();
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    pub fn records(&self) -> &[DetectionRecord] {
        &self.records
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Shared feature dimensionality, `None` when records carry no features
    /// (or the dataset is empty).
    pub fn feature_dim(&self) -> Option<usize> {
        self.records.first().and_then(|r| r.features.as_ref().map(|f| f.len()))
    }
}
