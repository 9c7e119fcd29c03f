//! Desk-scale training harness: a tiny softmax classifier on a seeded
//! Gaussian-mixture task, for demonstrating the train-time effect of the
//! binned calibration losses against a plain focal baseline.
//!
//! Everything here is deliberately small and deterministic: plain SGD
//! with a fixed learning rate, fixed batch order, exact backpropagation
//! through the two layers. The auxiliary-loss gradients from the losses
//! module enter at the softmax output and flow back by the chain rule.
//! Identical configs and seeds reproduce identical weights, bit for bit.

use crate::error::{Error, Result};
use crate::losses::{combined_loss, LossConfig};
use crate::metrics::{ece, full_dece, Denominator};
use crate::binning::BinningScheme;
use crate::rng::Rng;
use crate::types::{ConfidenceVector, Dataset, DetectionRecord, LogitVector};

/// Confidence bins used for held-out evaluation (training-time bins come
/// from the loss config).
pub const EVAL_BINS: usize = 25;

/// A 2-D labeled point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub xs: Vec<[f64; 2]>,
    pub ys: Vec<usize>,
}

impl LabeledPoints {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Even indices left, odd indices right. The generator interleaves
    /// classes round-robin, so both halves stay class-balanced.
    pub fn split_half(&self) -> (LabeledPoints, LabeledPoints) {
        let mut a = LabeledPoints { xs: Vec::new(), ys: Vec::new() };
        let mut b = LabeledPoints { xs: Vec::new(), ys: Vec::new() };
        for i in 0..self.len() {
            let out = if i % 2 == 0 { &mut a } else { &mut b };
            out.xs.push(self.xs[i]);
            out.ys.push(self.ys[i]);
        }
        (a, b)
    }
}

/// `num_classes` Gaussian clusters at fixed positions on a circle of
/// radius 3, labels assigned round-robin (balanced within 1), spread
/// controlled by `overlap`. Deterministic per seed.
pub fn make_mixture_data(num_classes: usize, n: usize, overlap: f64, seed: u64) -> Result<LabeledPoints> {
    if num_classes < 2 {
        return Err(Error::InvalidConfig(format!("num_classes must be >= 2, got {num_classes}")));
    }
    if n < 1 {
        return Err(Error::InvalidConfig("n must be >= 1".into()));
    }
    if !overlap.is_finite() || overlap <= 0.0 {
        return Err(Error::InvalidConfig(format!("overlap must be positive, got {overlap}")));
    }
    let mut rng = Rng::new(seed);
    let centers: Vec<[f64; 2]> = (0..num_classes)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / num_classes as f64;
            [3.0 * angle.cos(), 3.0 * angle.sin()]
        })
        .collect();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % num_classes;
        let c = centers[label];
        xs.push([c[0] + overlap * rng.normal(), c[1] + overlap * rng.normal()]);
        ys.push(label);
    }
    Ok(LabeledPoints { xs, ys })
}

/// One hidden layer (tanh), softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyClassifier {
    input_dim: usize,
    hidden_dim: usize,
    num_classes: usize,
    /// Row-major [hidden][input].
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// Row-major [class][hidden].
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl ToyClassifier {
    /// Seeded initialization: weights from a Gaussian scaled by
    /// 1/sqrt(fan-in), biases zero.
    pub fn new(input_dim: usize, hidden_dim: usize, num_classes: usize, seed: u64) -> Result<Self> {
        if input_dim < 1 || hidden_dim < 1 {
            return Err(Error::InvalidConfig("layer dimensions must be >= 1".into()));
        }
        if num_classes < 2 {
            return Err(Error::InvalidConfig(format!("num_classes must be >= 2, got {num_classes}")));
        }
        let mut rng = Rng::new(seed);
        let s1 = 1.0 / (input_dim as f64).sqrt();
        let w1 = (0..hidden_dim * input_dim).map(|_| s1 * rng.normal()).collect();
        let s2 = 1.0 / (hidden_dim as f64).sqrt();
        let w2 = (0..num_classes * hidden_dim).map(|_| s2 * rng.normal()).collect();
        Ok(Self {
            input_dim,
            hidden_dim,
            num_classes,
            w1,
            b1: vec![0.0; hidden_dim],
            w2,
            b2: vec![0.0; num_classes],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// All weights and biases in one flat vector, for reproducibility
    /// checks.
    pub fn flat_weights(&self) -> Vec<f64> {
        let mut v = self.w1.clone();
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.extend_from_slice(&self.b2);
        v
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden_dim)
            .map(|j| {
                let mut a = self.b1[j];
                for i in 0..self.input_dim {
                    a += self.w1[j * self.input_dim + i] * x[i];
                }
                a.tanh()
            })
            .collect()
    }

    fn output_logits(&self, h: &[f64]) -> Vec<f64> {
        (0..self.num_classes)
            .map(|k| {
                let mut z = self.b2[k];
                for j in 0..self.hidden_dim {
                    z += self.w2[k * self.hidden_dim + j] * h[j];
                }
                z
            })
            .collect()
    }

    /// Softmax class probabilities for one input. Errors only when the
    /// weights have gone non-finite.
    pub fn predict(&self, x: &[f64]) -> Result<ConfidenceVector> {
        assert_eq!(x.len(), self.input_dim);
        let h = self.hidden(x);
        Ok(LogitVector::new(self.output_logits(&h))?.softmax())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Seeds the weight initialization.
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        if self.epochs < 1 || self.batch_size < 1 {
            return Err(Error::InvalidConfig("epochs and batch_size must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Loss parts (means over the epoch's batches) and held-out quality
/// after each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub base_part: f64,
    pub aux_part: f64,
    pub holdout_accuracy: f64,
    pub holdout_ece: f64,
    pub holdout_full_dece: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub classifier: ToyClassifier,
    pub log: Vec<EpochLog>,
}

/// The classifier's predictions over a point cloud as a detection
/// dataset (softmax confidences, no logits, no features).
pub fn predictions_dataset(clf: &ToyClassifier, points: &LabeledPoints) -> Result<Dataset> {
    let records = points
        .xs
        .iter()
        .zip(&points.ys)
        .enumerate()
        .map(|(i, (x, &y))| DetectionRecord::new(format!("pt-{i:06}"), None, clf.predict(x)?, y, None))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(clf.num_classes, records)
}

/// Fraction of records whose dominant prediction is the label.
pub fn accuracy(data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    data.records().iter().filter(|r| r.dominant_correct()).count() as f64 / data.len() as f64
}

/// Trains with plain SGD in fixed batch order and logs held-out metrics
/// after every epoch. Deterministic given config and data. Non-finite
/// losses or weights abort with a divergence diagnostic.
pub fn train(
    classifier: ToyClassifier,
    train_data: &LabeledPoints,
    holdout: &LabeledPoints,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_data.is_empty() || holdout.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut clf = classifier;
    let c = clf.num_classes;
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut base_sum = 0.0;
        let mut aux_sum = 0.0;
        let mut batches = 0.0;
        for (batch_idx, batch_start) in (0..train_data.len()).step_by(config.batch_size).enumerate() {
            let end = (batch_start + config.batch_size).min(train_data.len());
            let xs = &train_data.xs[batch_start..end];
            let ys = &train_data.ys[batch_start..end];

            // Forward pass, keeping hidden activations for backprop.
            let mut hs = Vec::with_capacity(xs.len());
            let mut ps = Vec::with_capacity(xs.len());
            let mut records = Vec::with_capacity(xs.len());
            for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
                let h = clf.hidden(x);
                let logits = LogitVector::new(clf.output_logits(&h)).map_err(|_| Error::Diverged {
                    epoch,
                    batch: batch_idx,
                    loss: f64::NAN,
                })?;
                let p = logits.softmax();
                records.push(DetectionRecord::new(format!("b{i}"), None, p.clone(), y, None)?);
                hs.push(h);
                ps.push(p);
            }
            let batch = Dataset::new(c, records)?;
            let loss = combined_loss(&batch, &config.loss)?;
            if !loss.total.is_finite() {
                return Err(Error::Diverged { epoch, batch: batch_idx, loss: loss.total });
            }
            base_sum += loss.base_part;
            aux_sum += loss.aux_part;
            batches += 1.0;

            // Backprop. Loss gradients already carry the 1/N batch mean,
            // so weight gradients are plain sums over the batch.
            let mut gw1 = vec![0.0; clf.w1.len()];
            let mut gb1 = vec![0.0; clf.b1.len()];
            let mut gw2 = vec![0.0; clf.w2.len()];
            let mut gb2 = vec![0.0; clf.b2.len()];
            for (i, x) in xs.iter().enumerate() {
                let h = &hs[i];
                let p = ps[i].values();
                let dp = &loss.grad_confidences[i];
                // Softmax backward: dz_k = p_k (dp_k - sum_c dp_c p_c).
                let dot: f64 = dp.iter().zip(p).map(|(a, b)| a * b).sum();
                let dz: Vec<f64> = (0..c).map(|k| p[k] * (dp[k] - dot)).collect();
                let mut dh = vec![0.0; clf.hidden_dim];
                for k in 0..c {
                    gb2[k] += dz[k];
                    for j in 0..clf.hidden_dim {
                        gw2[k * clf.hidden_dim + j] += dz[k] * h[j];
                        dh[j] += dz[k] * clf.w2[k * clf.hidden_dim + j];
                    }
                }
                for j in 0..clf.hidden_dim {
                    let da = (1.0 - h[j] * h[j]) * dh[j];
                    gb1[j] += da;
                    for l in 0..clf.input_dim {
                        gw1[j * clf.input_dim + l] += da * x[l];
                    }
                }
            }
            let lr = config.learning_rate;
            for (w, g) in clf.w1.iter_mut().zip(&gw1) {
                *w -= lr * g;
            }
            for (w, g) in clf.b1.iter_mut().zip(&gb1) {
                *w -= lr * g;
            }
            for (w, g) in clf.w2.iter_mut().zip(&gw2) {
                *w -= lr * g;
            }
            for (w, g) in clf.b2.iter_mut().zip(&gb2) {
                *w -= lr * g;
            }
        }

        // Non-finite weights can surface here as invalid logits: that is
        // divergence too, just caught one step later.
        let held = predictions_dataset(&clf, holdout).map_err(|e| match e {
            Error::InvalidVector(_) => Error::Diverged { epoch, batch: 0, loss: f64::NAN },
            other => other,
        })?;
        let scheme = BinningScheme::confidence_only(EVAL_BINS)?;
        log.push(EpochLog {
            epoch,
            base_part: base_sum / batches,
            aux_part: aux_sum / batches,
            holdout_accuracy: accuracy(&held),
            holdout_ece: ece(&held, EVAL_BINS)?.value,
            holdout_full_dece: full_dece(&held, &scheme, Denominator::Predictions)?.value,
        });
    }

    Ok(TrainOutcome { classifier: clf, log })
}
