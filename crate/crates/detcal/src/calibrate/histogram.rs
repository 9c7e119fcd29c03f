//! Histogram binning: per-bin empirical positive rates as replacements.

use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::types::{Dataset, PredictionMode};

use super::confidence_pairs;

/// Equal-width confidence bins with one output value per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramMap {
    outputs: Vec<f64>,
    pub fit_mode: PredictionMode,
}

impl HistogramMap {
    pub fn new(outputs: Vec<f64>, fit_mode: PredictionMode) -> Result<Self> {
        let m = Self { outputs, fit_mode };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outputs.is_empty() {
            return Err(Error::InvalidConfig("histogram map needs at least 1 bin".into()));
        }
        for (i, &v) in self.outputs.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("bin output[{i}] = {v} not in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// The output value of the bin `c` falls in (same interval convention
    /// as the metrics: left-closed, top bin closed).
    pub fn map(&self, c: f64) -> f64 {
        let scheme = BinningScheme::confidence_only(self.outputs.len()).expect("validated non-empty");
        self.outputs[scheme.bin_confidence(c)]
    }
}

/// Fits one output per confidence bin: the empirical positive rate of the
/// fit pairs landing there, or the bin center for bins no pair reaches.
pub fn fit_histogram(data: &Dataset, num_bins: usize, mode: PredictionMode) -> Result<HistogramMap> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scheme = BinningScheme::confidence_only(num_bins)?;
    let mut counts = vec![0u64; num_bins];
    let mut positives = vec![0u64; num_bins];
    for (c, hit) in confidence_pairs(data, mode) {
        let bin = scheme.bin_confidence(c);
        counts[bin] += 1;
        positives[bin] += u64::from(hit);
    }
    let outputs = (0..num_bins)
        .map(|b| {
            if counts[b] > 0 {
                positives[b] as f64 / counts[b] as f64
            } else {
                (b as f64 + 0.5) / num_bins as f64
            }
        })
        .collect();
    HistogramMap::new(outputs, mode)
}
