//! Synthetic detection datasets with known calibration properties, plus
//! controlled miscalibration distortions.
//!
//! The generator draws per-class logits from a seeded Gaussian and turns
//! them into sigmoid confidences; the label draw then decides which
//! calibration condition holds by construction:
//!
//! * sigmoid-Bernoulli: records keep logits + sigmoid confidences. The
//!   dominant prediction is correct with probability equal to its own
//!   confidence, so dominant-level metrics are calibrated; wrong labels
//!   fall on a secondary class proportionally to its confidence.
//! * softmax-categorical: the sigmoid vector is normalized to a
//!   distribution q, stored as the confidences (no logits, since q is not
//!   an activation of the drawn logits), and the label is drawn from q.
//!   Every per-class entry then satisfies P(label = c | q) = q_c, so the
//!   full per-prediction metrics are calibrated too.
//!
//! Draw order per record is fixed and documented (see the rng module for
//! the primitive draws): C normals for the logits, then the label draws
//! (Bernoulli: one uniform for correctness, plus one for the secondary
//! pick only when incorrect; categorical: one uniform), then one uniform
//! per feature. Identical configs generate identical datasets, bit for
//! bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{Activation, ConfidenceVector, Dataset, DetectionRecord, LogitVector};

/// Which label-sampling regime the generator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSampling {
    SigmoidBernoulli,
    SoftmaxCategorical,
}

impl std::str::FromStr for LabelSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid-bernoulli" => Ok(LabelSampling::SigmoidBernoulli),
            "softmax-categorical" => Ok(LabelSampling::SoftmaxCategorical),
            other => Err(Error::InvalidConfig(format!(
                "unknown sampling regime '{other}' (expected sigmoid-bernoulli or softmax-categorical)"
            ))),
        }
    }
}

/// One synthetic feature dimension, drawn uniformly from [lo, hi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        let name = name.into();
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidConfig(format!(
                "feature '{name}' has invalid range [{lo}, {hi})"
            )));
        }
        Ok(Self { name, lo, hi })
    }

    /// Parses the `name:lo:hi` command-line form, e.g. `distance:0:100`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!("feature spec '{spec}' is not name:lo:hi")));
        }
        let lo: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad range start in '{spec}'")))?;
        let hi: f64 = parts[2]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad range end in '{spec}'")))?;
        Self::new(parts[0], lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub num_classes: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian the logits are drawn from.
    pub logit_scale: f64,
    pub sampling: LabelSampling,
    pub features: Vec<FeatureSpec>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            )));
        }
        if !self.logit_scale.is_finite() || self.logit_scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "logit_scale must be finite and positive, got {}",
                self.logit_scale
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.features {
            FeatureSpec::new(f.name.clone(), f.lo, f.hi)?;
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate feature '{}'", f.name)));
            }
        }
        Ok(())
    }
}

/// Generates a dataset that is calibrated by construction under the
/// configured sampling regime. Deterministic per config.
pub fn generate_calibrated(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = Rng::new(config.seed);
    let c = config.num_classes;
    let mut records = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let zs: Vec<f64> = (0..c).map(|_| config.logit_scale * rng.normal()).collect();
        let logits = LogitVector::new(zs)?;
        let p = logits.sigmoid();

        let (label, logits, confidences) = match config.sampling {
            LabelSampling::SigmoidBernoulli => {
                let (dom, p_dom) = crate::types::dominant(&p);
                let label = if rng.uniform() < p_dom {
                    dom
                } else {
                    // Among the other classes, proportional to confidence.
                    let total: f64 = p
                        .values()
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != dom)
                        .map(|(_, &v)| v)
                        .sum();
                    let mut pick = rng.uniform() * total;
                    let mut chosen = if dom == 0 { 1 } else { 0 };
                    for (j, &v) in p.values().iter().enumerate() {
                        if j == dom {
                            continue;
                        }
                        if pick < v {
                            chosen = j;
                            break;
                        }
                        pick -= v;
                    }
                    chosen
                };
                (label, Some(logits), p)
            }
            LabelSampling::SoftmaxCategorical => {
                let total: f64 = p.values().iter().sum();
                let q: Vec<f64> = p.values().iter().map(|&v| v / total).collect();
                let u = rng.uniform();
                let mut cum = 0.0;
                let mut label = c - 1;
                for (j, &v) in q.iter().enumerate() {
                    cum += v;
                    if u < cum {
                        label = j;
                        break;
                    }
                }
                (label, None, ConfidenceVector::new(q)?)
            }
        };

        let features = if config.features.is_empty() {
            None
        } else {
            Some(config.features.iter().map(|f| f.lo + rng.uniform() * (f.hi - f.lo)).collect())
        };

        records.push(DetectionRecord::new(format!("det-{i:06}"), logits, confidences, label, features)?);
    }

    let mut data = Dataset::new(c, records)?;
    if !config.features.is_empty() {
        data = data.with_feature_names(config.features.iter().map(|f| f.name.clone()).collect())?;
    }
    Ok(data)
}

/// A controlled miscalibration applied to a calibrated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distortion {
    /// Logits scaled by t_star; t_star > 1 sharpens into overconfidence.
    Temperature { t_star: f64 },
    /// Logits mapped to a * z + b.
    Affine { a: f64, b: f64 },
    /// Confidences raised to 1/kappa (renormalized when they formed a
    /// distribution); kappa > 1 inflates them.
    Sharpen { kappa: f64 },
}

impl Distortion {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distortion::Temperature { t_star } => {
                if !t_star.is_finite() || t_star <= 0.0 {
                    return Err(Error::InvalidConfig(format!("t_star must be positive, got {t_star}")));
                }
            }
            Distortion::Affine { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidConfig(format!("affine parameters must be finite, got a = {a}, b = {b}")));
                }
            }
            Distortion::Sharpen { kappa } => {
                if !kappa.is_finite() || kappa <= 0.0 {
                    return Err(Error::InvalidConfig(format!("kappa must be positive, got {kappa}")));
                }
            }
        }
        Ok(())
    }

    /// Parses the command-line forms `temperature:T`, `affine:A:B`,
    /// `sharpen:K`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::InvalidConfig(format!("bad number '{s}' in distortion '{spec}'")))
        };
        let d = match (parts[0], parts.len()) {
            ("temperature", 2) => Distortion::Temperature { t_star: num(parts[1])? },
            ("affine", 3) => Distortion::Affine { a: num(parts[1])?, b: num(parts[2])? },
            ("sharpen", 2) => Distortion::Sharpen { kappa: num(parts[1])? },
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "distortion '{spec}' is not temperature:T, affine:A:B, or sharpen:K"
                )))
            }
        };
        d.validate()?;
        Ok(d)
    }
}

/// Applies `distortion` record-wise. Ids, labels, and features are
/// untouched; logit-domain distortions re-derive confidences through the
/// record's own activation, the confidence-domain one drops logits.
pub fn distort(data: &Dataset, distortion: &Distortion) -> Result<Dataset> {
    distortion.validate()?;
    let records = data
        .records()
        .iter()
        .map(|r| match *distortion {
            Distortion::Temperature { t_star } => rescale(r, |z| z * t_star),
            Distortion::Affine { a, b } => rescale(r, |z| a * z + b),
            Distortion::Sharpen { kappa } => {
                let raw: Vec<f64> = r.confidences.values().iter().map(|&p| p.powf(1.0 / kappa)).collect();
                let sum: f64 = r.confidences.values().iter().sum();
                let mapped = if (sum - 1.0).abs() <= 1e-9 {
                    // The vector was a distribution; keep it one.
                    let new_sum: f64 = raw.iter().sum();
                    raw.iter().map(|&v| (v / new_sum).min(1.0)).collect()
                } else {
                    raw
                };
                DetectionRecord::new(
                    r.id.clone(),
                    None,
                    ConfidenceVector::new(mapped)?,
                    r.label,
                    r.features.clone(),
                )
            }
        })
        .collect::<Result<Vec<_>>>()?;
    data.with_records(records)
}

fn rescale(r: &DetectionRecord, f: impl Fn(f64) -> f64) -> Result<DetectionRecord> {
    let z = r.logits.as_ref().ok_or_else(|| {
        Error::MissingLogits(format!("record '{}' has no logits to distort", r.id))
    })?;
    let activation = Activation::infer(z, &r.confidences).ok_or_else(|| Error::InvalidRecord {
        id: r.id.clone(),
        reason: "confidences match neither activation of the logits".into(),
    })?;
    let logits = LogitVector::new(z.values().iter().map(|&v| f(v)).collect())?;
    let confidences = activation.apply(&logits);
    DetectionRecord::new(r.id.clone(), Some(logits), confidences, r.label, r.features.clone())
}
