//! Isotonic regression via pool-adjacent-violators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, PredictionMode};

use super::confidence_pairs;

/// A non-decreasing step function over confidences, stored as the pooled
/// PAVA blocks: `breakpoints[i]` is the smallest input of block i and
/// `values[i]` its fitted output (the block's mean target).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicMap {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    pub fit_mode: PredictionMode,
}

impl IsotonicMap {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, fit_mode: PredictionMode) -> Result<Self> {
        let m = Self { breakpoints, values, fit_mode };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() || self.breakpoints.len() != self.values.len() {
            return Err(Error::InvalidConfig(format!(
                "isotonic map needs matching non-empty breakpoints/values, got {}/{}",
                self.breakpoints.len(),
                self.values.len()
            )));
        }
        for w in self.breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "breakpoints must increase strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("value[{i}] = {v} not in [0, 1]")));
            }
            if i > 0 && v < self.values[i - 1] {
                return Err(Error::InvalidConfig(format!(
                    "values must be non-decreasing, got {} then {v}",
                    self.values[i - 1]
                )));
            }
        }
        Ok(())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Step-function lookup: the value of the largest breakpoint <= `c`;
    /// inputs below the first breakpoint take the first value.
    pub fn map(&self, c: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&bp| bp <= c);
        self.values[idx.saturating_sub(1)]
    }
}

/// Fits the unique non-decreasing least-squares map from the fit pairs of
/// `mode`: pairs are sorted by confidence, exact confidence ties merge
/// into one weighted point with the averaged target, and pool-adjacent-
/// violators pools blocks until the block means are non-decreasing.
pub fn fit_isotonic(data: &Dataset, mode: PredictionMode) -> Result<IsotonicMap> {
    let mut pairs = confidence_pairs(data, mode);
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "isotonic fit needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    // (confidence, target sum, weight) with exact ties pre-merged.
    let mut points: Vec<(f64, f64, f64)> = Vec::with_capacity(pairs.len());
    for (c, hit) in pairs {
        let t = f64::from(hit);
        match points.last_mut() {
            Some(last) if last.0 == c => {
                last.1 += t;
                last.2 += 1.0;
            }
            _ => points.push((c, t, 1.0)),
        }
    }

    // PAVA blocks: (first confidence, target sum, weight). A new point
    // starts its own block; while the last two blocks violate order (the
    // later mean is below the earlier), they pool.
    let mut blocks: Vec<(f64, f64, f64)> = Vec::with_capacity(points.len());
    for (c, sum, w) in points {
        blocks.push((c, sum, w));
        while blocks.len() >= 2 {
            let last = blocks[blocks.len() - 1];
            let prev = blocks[blocks.len() - 2];
            if last.1 / last.2 < prev.1 / prev.2 {
                blocks.pop();
                let top = blocks.last_mut().expect("two blocks were present");
                top.1 += last.1;
                top.2 += last.2;
            } else {
                break;
            }
        }
    }

    let breakpoints = blocks.iter().map(|b| b.0).collect();
    let values = blocks.iter().map(|b| (b.1 / b.2).clamp(0.0, 1.0)).collect();
    IsotonicMap::new(breakpoints, values, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ConfidenceVector, DetectionRecord};
    use proptest::prelude::*;

    /// One dominant-mode fit pair per (confidence, hit) input.
    fn pair_dataset(pairs: &[(f64, bool)]) -> Dataset {
        let records = pairs
            .iter()
            .enumerate()
            .map(|(i, &(c, hit))| {
                // Dominant class is 0 at confidence c; hit decides the label.
                let second = (c - 0.1).max(0.0);
                let v = ConfidenceVector::new(vec![c, second]).unwrap();
                DetectionRecord::new(format!("p{i}"), None, v, usize::from(!hit), None).unwrap()
            })
            .collect();
        Dataset::new(2, records).unwrap()
    }

    fn fit_pairs(pairs: &[(f64, bool)]) -> IsotonicMap {
        fit_isotonic(&pair_dataset(pairs), PredictionMode::Dominant).unwrap()
    }

    #[test]
    fn monotone_targets_need_no_pooling() {
        let m = fit_pairs(&[(0.2, false), (0.5, true)]);
        assert_eq!(m.breakpoints(), &[0.2, 0.5]);
        assert_eq!(m.values(), &[0.0, 1.0]);
    }

    #[test]
    fn violating_prefix_pools_to_its_mean() {
        let m = fit_pairs(&[(0.1, true), (0.2, false), (0.3, true)]);
        assert!((m.map(0.1) - 0.5).abs() < 1e-15);
        assert!((m.map(0.2) - 0.5).abs() < 1e-15);
        assert!((m.map(0.3) - 1.0).abs() < 1e-15);
        assert_eq!(m.breakpoints().len(), 2);
    }

    #[test]
    fn step_lookup_conventions() {
        let m = IsotonicMap::new(vec![0.2, 0.8], vec![0.1, 0.9], PredictionMode::Dominant).unwrap();
        assert_eq!(m.map(0.5), 0.1, "between breakpoints takes the left value");
        assert_eq!(m.map(0.05), 0.1, "below the first breakpoint clamps low");
        assert_eq!(m.map(0.8), 0.9, "an exact breakpoint takes its own value");
        assert_eq!(m.map(0.95), 0.9);
    }

    #[test]
    fn exact_confidence_ties_merge_before_pooling() {
        let m = fit_pairs(&[(0.5, true), (0.5, false), (0.7, true)]);
        assert_eq!(m.breakpoints(), &[0.5, 0.7]);
        assert!((m.values()[0] - 0.5).abs() < 1e-15);
        assert!((m.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_violations_pool_to_global_mean() {
        let m = fit_pairs(&[(0.1, true), (0.5, true), (0.9, false), (0.95, false)]);
        assert_eq!(m.breakpoints(), &[0.1]);
        assert!((m.values()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn too_few_pairs_is_an_error() {
        let err = fit_isotonic(&pair_dataset(&[(0.5, true)]), PredictionMode::Dominant);
        assert!(matches!(err, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn full_mode_fits_on_every_class_entry() {
        // One record, two classes: dominant mode has 1 pair (error), full
        // mode has 2 and fits.
        let v = ConfidenceVector::new(vec![0.8, 0.3]).unwrap();
        let r = DetectionRecord::new("a", None, v, 0, None).unwrap();
        let data = Dataset::new(2, vec![r]).unwrap();
        assert!(fit_isotonic(&data, PredictionMode::Dominant).is_err());
        let m = fit_isotonic(&data, PredictionMode::Full).unwrap();
        assert_eq!(m.fit_mode, PredictionMode::Full);
        assert_eq!(m.breakpoints(), &[0.3, 0.8]);
        assert_eq!(m.values(), &[0.0, 1.0]);
    }

    /// Mean-squared error of a monotone candidate against the fit pairs.
    fn sse(pairs: &[(f64, bool)], m: &IsotonicMap) -> f64 {
        pairs
            .iter()
            .map(|&(c, hit)| {
                let d = m.map(c) - f64::from(hit);
                d * d
            })
            .sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn fitted_values_are_non_decreasing(raw in proptest::collection::vec((0u8..=100, any::<bool>()), 2..40)) {
            let pairs: Vec<(f64, bool)> = raw.iter().map(|&(c, h)| (c as f64 / 100.0, h)).collect();
            let m = fit_pairs(&pairs);
            m.validate().unwrap();
            prop_assert!(m.values().windows(2).all(|w| w[1] >= w[0]));
        }

        // PAVA is the least-squares optimum among monotone step maps; any
        // constant map (a valid monotone competitor) must do no better.
        #[test]
        fn beats_every_constant_fit(raw in proptest::collection::vec((0u8..=100, any::<bool>()), 2..40)) {
            let pairs: Vec<(f64, bool)> = raw.iter().map(|&(c, h)| (c as f64 / 100.0, h)).collect();
            let m = fit_pairs(&pairs);
            let fitted = sse(&pairs, &m);
            for k in 0..=20 {
                let c = IsotonicMap::new(vec![0.0], vec![k as f64 / 20.0], PredictionMode::Dominant).unwrap();
                prop_assert!(fitted <= sse(&pairs, &c) + 1e-9);
            }
        }
    }
}
