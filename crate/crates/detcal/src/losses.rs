//! Training losses: focal / cross-entropy base terms and the binned
//! calibration-error auxiliary terms, with analytic gradients.
//!
//! The auxiliary losses ARE the metrics: their values come from the
//! metrics module on the same batch, so loss and evaluation can never
//! drift apart. Their gradients use a straight-through convention: bin
//! membership and each bin's positive count are treated as constants, and
//! only the confidence-sum path is differentiated. Away from bin borders
//! the binned value really is locally linear in each confidence, so the
//! straight-through gradient equals the true local derivative; at the
//! (measure-zero) borders we side with the left bin. sign(0) is defined
//! as 0 so an exactly calibrated batch is a stationary point.
//!
//! All batch losses are means over the batch, and gradients are reported
//! per record per class in batch order.

use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::metrics::{dece, full_dece, Denominator};
use crate::types::{ConfidenceVector, Dataset};

/// Clamp bounds applied to probabilities before logarithms.
pub const PROB_CLAMP: (f64, f64) = (1e-7, 1.0 - 1e-7);

/// The per-record classification term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLoss {
    /// Per-class binary focal loss with focusing parameter gamma.
    Focal { gamma: f64 },
    /// Categorical cross-entropy, -ln p_label.
    CrossEntropy,
}

/// The batch-level calibration term added on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxLoss {
    None,
    Dece,
    FullDece,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub base: BaseLoss,
    pub aux: AuxLoss,
    /// Weight of the auxiliary term.
    pub alpha: f64,
    /// Confidence bins used by the auxiliary term.
    pub train_bins: usize,
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if let BaseLoss::Focal { gamma } = self.base {
            if !gamma.is_finite() || gamma < 0.0 {
                return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {gamma}")));
            }
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if self.train_bins == 0 {
            return Err(Error::InvalidConfig("train_bins must be >= 1".into()));
        }
        Ok(())
    }
}

/// A evaluated batch loss: the combined value, its two parts, and the
/// gradient with respect to every confidence entry, `[record][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub base_part: f64,
    pub aux_part: f64,
    pub grad_confidences: Vec<Vec<f64>>,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-class binary focal loss of one record and its gradient with
/// respect to the confidences.
///
/// Each class is scored as an independent binary problem: q_c is p_c for
/// the true class and 1 - p_c otherwise, clamped to [`PROB_CLAMP`], and
/// the loss is sum_c -(1 - q_c)^gamma * ln(q_c). gamma = 0 reduces
/// exactly to summed binary cross-entropy. Clamped entries get gradient
/// 0: that is the true derivative of the clamped function.
pub fn focal_loss(conf: &ConfidenceVector, label: usize, gamma: f64) -> (f64, Vec<f64>) {
    assert!(label < conf.len(), "label {label} out of range for {} classes", conf.len());
    let mut value = 0.0;
    let mut grad = vec![0.0; conf.len()];
    for (c, &p) in conf.values().iter().enumerate() {
        let is_true = c == label;
        let q_raw = if is_true { p } else { 1.0 - p };
        let q = q_raw.clamp(PROB_CLAMP.0, PROB_CLAMP.1);
        let focus = (1.0 - q).powf(gamma);
        value += -focus * q.ln();
        if q == q_raw {
            // d/dq of -(1-q)^g ln q, then dq/dp = +-1.
            let dq = gamma * (1.0 - q).powf(gamma - 1.0) * q.ln() - focus / q;
            grad[c] = if is_true { dq } else { -dq };
        }
    }
    (value, grad)
}

/// Categorical cross-entropy -ln p_label of one record and its gradient.
pub fn cross_entropy_loss(conf: &ConfidenceVector, label: usize) -> (f64, Vec<f64>) {
    assert!(label < conf.len(), "label {label} out of range for {} classes", conf.len());
    let p_raw = conf.values()[label];
    let p = p_raw.clamp(PROB_CLAMP.0, PROB_CLAMP.1);
    let mut grad = vec![0.0; conf.len()];
    if p == p_raw {
        grad[label] = -1.0 / p;
    }
    (-p.ln(), grad)
}

/// Per-bin sign(confidence_sum - positive_count) lookup built from a
/// metric report's bins.
fn bin_signs(bins: &[crate::metrics::BinStat], total_bins: usize) -> Vec<f64> {
    let mut signs = vec![0.0; total_bins];
    for b in bins {
        signs[b.index] = sign(b.confidence_sum - b.positive_count as f64);
    }
    signs
}

/// Binned calibration error of the dominant predictions as a loss: the
/// value is exactly the K=1 detection calibration error at `bins`, and
/// the straight-through gradient puts sign(sum - positives)/N on each
/// record's dominant confidence, 0 on the others.
pub fn aux_dece(batch: &Dataset, bins: usize) -> Result<(f64, Vec<Vec<f64>>)> {
    let scheme = BinningScheme::confidence_only(bins)?;
    let report = dece(batch, &scheme)?;
    let signs = bin_signs(&report.bins, scheme.total_bins());
    let n = batch.len() as f64;
    let grads = batch
        .records()
        .iter()
        .map(|r| {
            let mut g = vec![0.0; batch.num_classes()];
            let (class, confidence) = r.dominant();
            g[class] = signs[scheme.bin_confidence(confidence)] / n;
            g
        })
        .collect();
    Ok((report.value, grads))
}

/// Binned calibration error over all C per-class confidences as a loss:
/// the value is exactly the full calibration error at `bins`, and every
/// entry gets the straight-through gradient sign(sum - positives)/D of
/// its bin, where D is the chosen denominator.
pub fn aux_full_dece(batch: &Dataset, bins: usize, denominator: Denominator) -> Result<(f64, Vec<Vec<f64>>)> {
    let scheme = BinningScheme::confidence_only(bins)?;
    let report = full_dece(batch, &scheme, denominator)?;
    let signs = bin_signs(&report.bins, scheme.total_bins());
    let d = report.total_count as f64;
    let grads = batch
        .records()
        .iter()
        .map(|r| {
            r.confidences
                .values()
                .iter()
                .map(|&c| signs[scheme.bin_confidence(c)] / d)
                .collect()
        })
        .collect();
    Ok((report.value, grads))
}

/// Mean base loss plus `alpha` times the auxiliary term, with the
/// combined per-confidence gradient. The full-mode auxiliary term uses
/// the per-prediction denominator.
pub fn combined_loss(batch: &Dataset, config: &LossConfig) -> Result<LossValue> {
    config.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = batch.len() as f64;
    let mut base_sum = 0.0;
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(batch.len());
    for r in batch.records() {
        let (v, mut g) = match config.base {
            BaseLoss::Focal { gamma } => focal_loss(&r.confidences, r.label, gamma),
            BaseLoss::CrossEntropy => cross_entropy_loss(&r.confidences, r.label),
        };
        base_sum += v;
        for gi in &mut g {
            *gi /= n;
        }
        grads.push(g);
    }
    let base_part = base_sum / n;

    let aux = match config.aux {
        AuxLoss::None => None,
        AuxLoss::Dece => Some(aux_dece(batch, config.train_bins)?),
        AuxLoss::FullDece => Some(aux_full_dece(batch, config.train_bins, Denominator::Predictions)?),
    };
    let aux_part = match aux {
        Some((value, aux_grads)) => {
            for (g, ag) in grads.iter_mut().zip(&aux_grads) {
                for (gi, &agi) in g.iter_mut().zip(ag) {
                    *gi += config.alpha * agi;
                }
            }
            value
        }
        None => 0.0,
    };

    Ok(LossValue {
        total: base_part + config.alpha * aux_part,
        base_part,
        aux_part,
        grad_confidences: grads,
    })
}
