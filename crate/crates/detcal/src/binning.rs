//! Equal-width binning over confidence and optional geometric features.
//!
//! A scheme always has a confidence dimension over `[0, 1]` and may add
//! feature dimensions with explicit ranges. The joint bin of a record is
//! the cartesian product cell; flat indices are row-major with confidence
//! as the leading dimension.
//!
//! Bins are left-closed, right-open, except the top bin of each dimension
//! which is closed so the range maximum (confidence 1.0 in particular)
//! stays in range. Feature values outside `[lo, hi]` clamp to the edge
//! bins; confidence is validated elsewhere and cannot leave `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Dataset;

/// Index of `v` among `bins` equal-width cells over `[lo, hi]`, clamped.
#[inline]
fn cell(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let raw = ((v - lo) * bins as f64 / (hi - lo)).floor();
    if raw < 0.0 {
        0
    } else {
        (raw as usize).min(bins - 1)
    }
}

/// One feature dimension of a binning scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDim {
    /// Matched against the dataset's feature names; falls back to position.
    pub name: String,
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

impl FeatureDim {
    pub fn new(name: impl Into<String>, bins: usize, lo: f64, hi: f64) -> Result<Self> {
        let name = name.into();
        if bins == 0 {
            return Err(Error::InvalidScheme(format!("feature '{name}' has 0 bins")));
        }
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidScheme(format!(
                "feature '{name}' has invalid range [{lo}, {hi})"
            )));
        }
        Ok(Self { name, bins, lo, hi })
    }

    /// Parses the `name:bins:lo:hi` form used on the command line,
    /// e.g. `distance:4:0:100`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidScheme(format!(
                "feature spec '{spec}' is not name:bins:lo:hi"
            )));
        }
        let bins: usize = parts[1]
            .parse()
            .map_err(|_| Error::InvalidScheme(format!("bad bin count in '{spec}'")))?;
        let lo: f64 = parts[2]
            .parse()
            .map_err(|_| Error::InvalidScheme(format!("bad range start in '{spec}'")))?;
        let hi: f64 = parts[3]
            .parse()
            .map_err(|_| Error::InvalidScheme(format!("bad range end in '{spec}'")))?;
        Self::new(parts[0], bins, lo, hi)
    }
}

/// Joint equal-width binning: one confidence dimension plus zero or more
/// feature dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningScheme {
    confidence_bins: usize,
    features: Vec<FeatureDim>,
}

impl BinningScheme {
    pub fn new(confidence_bins: usize, features: Vec<FeatureDim>) -> Result<Self> {
        if confidence_bins == 0 {
            return Err(Error::InvalidScheme("confidence needs at least 1 bin".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::InvalidScheme(format!("duplicate feature '{}'", f.name)));
            }
        }
        Ok(Self { confidence_bins, features })
    }

    /// Scheme with only the confidence dimension.
    pub fn confidence_only(confidence_bins: usize) -> Result<Self> {
        Self::new(confidence_bins, Vec::new())
    }

    pub fn confidence_bins(&self) -> usize {
        self.confidence_bins
    }

    pub fn features(&self) -> &[FeatureDim] {
        &self.features
    }

    /// Number of binning dimensions K (confidence included).
    pub fn num_dims(&self) -> usize {
        1 + self.features.len()
    }

    /// Total joint bin count, the product over all dimensions.
    pub fn total_bins(&self) -> usize {
        self.features.iter().fold(self.confidence_bins, |acc, f| acc * f.bins)
    }

    /// Bin of a confidence value along the leading dimension.
    pub fn bin_confidence(&self, c: f64) -> usize {
        cell(c, 0.0, 1.0, self.confidence_bins)
    }

    /// Bin of a value along feature dimension `k` (clamped to range).
    pub fn bin_feature(&self, k: usize, v: f64) -> usize {
        let f = &self.features[k];
        cell(v, f.lo, f.hi, f.bins)
    }

    /// Flat row-major joint index. `feature_values` must supply one value
    /// per feature dimension of the scheme, in scheme order.
    pub fn bin_index(&self, confidence: f64, feature_values: &[f64]) -> Result<usize> {
        if feature_values.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                got: feature_values.len(),
            });
        }
        let mut idx = self.bin_confidence(confidence);
        for (k, &v) in feature_values.iter().enumerate() {
            idx = idx * self.features[k].bins + self.bin_feature(k, v);
        }
        Ok(idx)
    }

    /// Per-dimension indices of a flat index (inverse of [`bin_index`]).
    ///
    /// [`bin_index`]: BinningScheme::bin_index
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut rev = Vec::with_capacity(self.num_dims());
        for f in self.features.iter().rev() {
            rev.push(flat % f.bins);
            flat /= f.bins;
        }
        rev.push(flat);
        rev.reverse();
        rev
    }

    /// Maps each scheme feature to its column in the dataset's feature
    /// vectors: by name when the dataset names its features, by position
    /// otherwise. Errors when a name is unknown or a position is out of
    /// range.
    pub fn resolve_columns(&self, dataset: &Dataset) -> Result<Vec<usize>> {
        if self.features.is_empty() {
            return Ok(Vec::new());
        }
        let dim = dataset.feature_dim().ok_or_else(|| {
            Error::FeatureMismatch("scheme has feature dimensions but records carry no features".into())
        })?;
        let names = dataset.feature_names();
        self.features
            .iter()
            .enumerate()
            .map(|(pos, f)| {
                if let Some(names) = names {
                    if let Some(col) = names.iter().position(|n| n == &f.name) {
                        return Ok(col);
                    }
                }
                if pos < dim {
                    Ok(pos)
                } else {
                    Err(Error::FeatureMismatch(format!(
                        "feature '{}' not found by name and position {pos} exceeds dimensionality {dim}",
                        f.name
                    )))
                }
            })
            .collect()
    }
}
