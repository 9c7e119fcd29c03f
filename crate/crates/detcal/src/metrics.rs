//! Calibration error metrics over matched detections.
//!
//! All three metrics reduce to one bin-level formula. Each consumed entry
//! contributes its confidence to its bin's confidence sum and, when its
//! prediction is right, one to the bin's positive count; the metric is
//!
//! ```text
//! value = sum_b |positive_count_b - confidence_sum_b| / total_count
//! ```
//!
//! They differ in which entries they consume and how they bin them:
//!
//! * ECE: the dominant prediction of each record, confidence bins only.
//!   "Positive" means the dominant class equals the label.
//! * D-ECE: the dominant prediction again, but binned jointly over
//!   confidence and geometric features. With no feature dimensions it
//!   equals ECE on the same data.
//! * Full D-ECE: all C per-class confidences of each record. Entry (n, c)
//!   is positive when record n's label is c. The denominator is either
//!   every consumed entry (C*N, per-prediction average) or the record
//!   count (N, per-detection average).
//!
//! Every report retains its per-bin sums, so the headline value can be
//! recomputed from the report alone; [`MetricReport::recompute`] is that
//! check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::binning::BinningScheme;
use crate::error::{Error, Result};
use crate::types::{Dataset, PredictionMode};

/// Which calibration metric a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Ece,
    Dece,
    FullDece,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Ece => write!(f, "ece"),
            Metric::Dece => write!(f, "dece"),
            Metric::FullDece => write!(f, "full-dece"),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ece" => Ok(Metric::Ece),
            "dece" => Ok(Metric::Dece),
            "full-dece" => Ok(Metric::FullDece),
            other => Err(Error::InvalidConfig(format!("unknown metric '{other}'"))),
        }
    }
}

/// Normalization of Full D-ECE: average over all C*N per-class predictions
/// or over the N detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Denominator {
    Predictions,
    Detections,
}

impl std::fmt::Display for Denominator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Denominator::Predictions => write!(f, "predictions"),
            Denominator::Detections => write!(f, "detections"),
        }
    }
}

impl std::str::FromStr for Denominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predictions" => Ok(Denominator::Predictions),
            "detections" => Ok(Denominator::Detections),
            other => Err(Error::InvalidConfig(format!("unknown denominator '{other}'"))),
        }
    }
}

/// Aggregates of one non-empty joint bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    /// Flat row-major index into the scheme's joint bins.
    pub index: usize,
    /// Entries that fell in this bin.
    pub count: u64,
    pub confidence_sum: f64,
    /// Entries whose prediction was right (see module docs per metric).
    pub positive_count: u64,
}

impl BinStat {
    pub fn mean_confidence(&self) -> f64 {
        self.confidence_sum / self.count as f64
    }

    /// Accuracy (ECE) or precision (D-ECE / Full D-ECE) of the bin.
    pub fn positive_rate(&self) -> f64 {
        self.positive_count as f64 / self.count as f64
    }
}

/// A metric value together with everything needed to re-derive it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub mode: PredictionMode,
    /// Set only for Full D-ECE.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub denominator: Option<Denominator>,
    pub value: f64,
    pub scheme: BinningScheme,
    /// Records in the evaluated dataset.
    pub num_records: u64,
    /// Normalizing denominator of the metric. Equals the summed bin counts
    /// except under the per-detection denominator, where bins count C*N
    /// entries but the average is taken over N.
    pub total_count: u64,
    /// Non-empty bins in ascending flat-index order.
    pub bins: Vec<BinStat>,
}

impl MetricReport {
    /// Re-derives the headline value from the stored bins. Equals `value`
    /// bit for bit: both run the same summation in the same order.
    pub fn recompute(&self) -> f64 {
        let sum: f64 = self
            .bins
            .iter()
            .map(|b| (b.positive_count as f64 - b.confidence_sum).abs())
            .sum();
        sum / self.total_count as f64
    }
}

#[derive(Default, Clone, Copy)]
struct Cell {
    count: u64,
    confidence_sum: f64,
    positive_count: u64,
}

/// Bin accumulator; dense vector for ordinary schemes, tree map when the
/// joint bin count is too large to allocate up front.
enum Cells {
    Dense(Vec<Cell>),
    Sparse(BTreeMap<usize, Cell>),
}

const DENSE_LIMIT: usize = 1 << 20;

impl Cells {
    fn new(total_bins: usize) -> Self {
        if total_bins <= DENSE_LIMIT {
            Cells::Dense(vec![Cell::default(); total_bins])
        } else {
            Cells::Sparse(BTreeMap::new())
        }
    }

    fn add(&mut self, index: usize, confidence: f64, positive: bool) {
        let cell = match self {
            Cells::Dense(v) => &mut v[index],
            Cells::Sparse(m) => m.entry(index).or_default(),
        };
        cell.count += 1;
        cell.confidence_sum += confidence;
        cell.positive_count += u64::from(positive);
    }

    fn into_stats(self) -> Vec<BinStat> {
        let make = |(index, c): (usize, Cell)| BinStat {
            index,
            count: c.count,
            confidence_sum: c.confidence_sum,
            positive_count: c.positive_count,
        };
        match self {
            Cells::Dense(v) => v
                .into_iter()
                .enumerate()
                .filter(|(_, c)| c.count > 0)
                .map(make)
                .collect(),
            Cells::Sparse(m) => m.into_iter().map(make).collect(),
        }
    }
}

fn accumulate(data: &Dataset, scheme: &BinningScheme, mode: PredictionMode) -> Result<Vec<BinStat>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let columns = scheme.resolve_columns(data)?;
    let mut cells = Cells::new(scheme.total_bins());
    let mut feature_values = vec![0.0; columns.len()];
    for record in data.records() {
        if !columns.is_empty() {
            let feats = record.features.as_ref().expect("dataset validated feature presence");
            for (slot, &col) in feature_values.iter_mut().zip(&columns) {
                *slot = feats[col];
            }
        }
        match mode {
            PredictionMode::Dominant => {
                let (class, confidence) = record.dominant();
                let index = scheme.bin_index(confidence, &feature_values)?;
                cells.add(index, confidence, class == record.label);
            }
            PredictionMode::Full => {
                for (class, &confidence) in record.confidences.values().iter().enumerate() {
                    let index = scheme.bin_index(confidence, &feature_values)?;
                    cells.add(index, confidence, class == record.label);
                }
            }
        }
    }
    Ok(cells.into_stats())
}

fn report_value(bins: &[BinStat], total_count: u64) -> f64 {
    let sum: f64 = bins
        .iter()
        .map(|b| (b.positive_count as f64 - b.confidence_sum).abs())
        .sum();
    sum / total_count as f64
}

/// Expected calibration error of the dominant predictions over `bins`
/// equal-width confidence bins.
pub fn ece(data: &Dataset, bins: usize) -> Result<MetricReport> {
    let scheme = BinningScheme::confidence_only(bins)?;
    let stats = accumulate(data, &scheme, PredictionMode::Dominant)?;
    let total = data.len() as u64;
    Ok(MetricReport {
        metric: Metric::Ece,
        mode: PredictionMode::Dominant,
        denominator: None,
        value: report_value(&stats, total),
        scheme,
        num_records: data.len() as u64,
        total_count: total,
        bins: stats,
    })
}

/// Detection calibration error: dominant predictions, binned jointly over
/// confidence and the scheme's feature dimensions. With a confidence-only
/// scheme this equals [`ece`] on the same data.
pub fn dece(data: &Dataset, scheme: &BinningScheme) -> Result<MetricReport> {
    let stats = accumulate(data, scheme, PredictionMode::Dominant)?;
    let total = data.len() as u64;
    Ok(MetricReport {
        metric: Metric::Dece,
        mode: PredictionMode::Dominant,
        denominator: None,
        value: report_value(&stats, total),
        scheme: scheme.clone(),
        num_records: data.len() as u64,
        total_count: total,
        bins: stats,
    })
}

/// Full detection calibration error: every per-class confidence of every
/// record is an entry, binned like [`dece`]. `denominator` picks whether
/// the bin deviations are averaged over all C*N entries or over the N
/// records.
pub fn full_dece(data: &Dataset, scheme: &BinningScheme, denominator: Denominator) -> Result<MetricReport> {
    let stats = accumulate(data, scheme, PredictionMode::Full)?;
    let total = match denominator {
        Denominator::Predictions => (data.len() * data.num_classes()) as u64,
        Denominator::Detections => data.len() as u64,
    };
    Ok(MetricReport {
        metric: Metric::FullDece,
        mode: PredictionMode::Full,
        denominator: Some(denominator),
        value: report_value(&stats, total),
        scheme: scheme.clone(),
        num_records: data.len() as u64,
        total_count: total,
        bins: stats,
    })
}

/// One confidence bin of a reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub bin: usize,
    /// Midpoint of the bin's confidence interval.
    pub center: f64,
    pub count: u64,
    pub mean_confidence: f64,
    /// Fraction of the bin's entries whose prediction was right.
    pub positive_rate: f64,
}

/// Per-bin points of a reliability diagram over `bins` confidence bins.
/// Dominant mode plots accuracy of the argmax prediction; full mode plots
/// per-class precision over all C entries per record. Empty bins are
/// omitted.
pub fn reliability(data: &Dataset, bins: usize, mode: PredictionMode) -> Result<Vec<ReliabilityPoint>> {
    let scheme = BinningScheme::confidence_only(bins)?;
    let stats = accumulate(data, &scheme, mode)?;
    Ok(stats
        .into_iter()
        .map(|b| ReliabilityPoint {
            bin: b.index,
            center: (b.index as f64 + 0.5) / bins as f64,
            count: b.count,
            mean_confidence: b.mean_confidence(),
            positive_rate: b.positive_rate(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::FeatureDim;
    use crate::types::{ConfidenceVector, DetectionRecord};

    fn record(id: &str, confs: &[f64], label: usize, features: Option<Vec<f64>>) -> DetectionRecord {
        DetectionRecord::new(id, None, ConfidenceVector::new(confs.to_vec()).unwrap(), label, features).unwrap()
    }

    /// Two records whose dominant confidences share the top of two bins:
    /// 0.6 (correct) and 0.8 (wrong), so |1 - 1.4| / 2 = 0.2.
    #[test]
    fn ece_two_record_example() {
        let data = Dataset::new(2, vec![
            record("a", &[0.6, 0.3], 0, None),
            record("b", &[0.8, 0.1], 1, None),
        ]).unwrap();
        let r = ece(&data, 2).unwrap();
        assert!((r.value - 0.2).abs() < 1e-12, "got {}", r.value);
        assert_eq!(r.bins.len(), 1);
        assert_eq!(r.bins[0].index, 1);
        assert_eq!(r.bins[0].count, 2);
        assert_eq!(r.bins[0].positive_count, 1);
    }

    /// Bin-level perfect calibration: in the top half, confidences sum to
    /// 3.0 with 3 of 4 correct, so the deviation vanishes.
    #[test]
    fn ece_zero_when_bins_are_calibrated() {
        let data = Dataset::new(2, vec![
            record("a", &[0.6, 0.0], 0, None),
            record("b", &[0.7, 0.0], 0, None),
            record("c", &[0.8, 0.0], 0, None),
            record("d", &[0.9, 0.0], 1, None),
        ]).unwrap();
        let r = ece(&data, 1).unwrap();
        assert!(r.value.abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn ece_uses_dominant_not_label_confidence() {
        // Dominant is class 0 at 0.9; the label-1 confidence must not leak in.
        let data = Dataset::new(2, vec![record("a", &[0.9, 0.1], 1, None)]).unwrap();
        let r = ece(&data, 1).unwrap();
        assert!((r.value - 0.9).abs() < 1e-12);
    }

    #[test]
    fn dece_joint_binning_example() {
        // Near and far detections at the same confidence 0.8, distance bins
        // [0,50) and [50,100). Near: correct. Far: wrong.
        // Near bin |1 - 0.8| = 0.2, far bin |0 - 0.8| = 0.8, over 2 records.
        let scheme = BinningScheme::new(1, vec![FeatureDim::new("distance", 2, 0.0, 100.0).unwrap()]).unwrap();
        let data = Dataset::new(2, vec![
            record("near", &[0.8, 0.1], 0, Some(vec![10.0])),
            record("far", &[0.8, 0.1], 1, Some(vec![90.0])),
        ]).unwrap();
        let r = dece(&data, &scheme).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12, "got {}", r.value);
        assert_eq!(r.bins.len(), 2);
        // Confidence-only at the same bin count would see one perfect bin.
        let flat = dece(&data, &BinningScheme::confidence_only(1).unwrap()).unwrap();
        assert!((flat.value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn dece_with_confidence_only_scheme_equals_ece() {
        let mut records = Vec::new();
        for i in 0..50 {
            let c = 0.02 + 0.019 * i as f64;
            records.push(record(&format!("r{i}"), &[c, 1.0 - c], (i % 3 == 0) as usize, None));
        }
        let data = Dataset::new(2, records).unwrap();
        let a = ece(&data, 10).unwrap();
        let b = dece(&data, &BinningScheme::confidence_only(10).unwrap()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits(), "identical accumulation path");
        assert_eq!(a.bins, b.bins);
    }

    #[test]
    fn full_dece_counts_every_class_entry() {
        // Two C=2 records, one bin. Entries: 0.9, 0.1, 0.9, 0.1.
        // Positives: record a label 0 -> entry (a,0); record b label 1 -> (b,1).
        // confidence_sum = 2.0, positive_count = 2, so the value is 0 under
        // either denominator.
        let data = Dataset::new(2, vec![
            record("a", &[0.9, 0.1], 0, None),
            record("b", &[0.9, 0.1], 1, None),
        ]).unwrap();
        let scheme = BinningScheme::confidence_only(1).unwrap();
        let r = full_dece(&data, &scheme, Denominator::Predictions).unwrap();
        assert_eq!(r.bins[0].count, 4);
        assert_eq!(r.bins[0].positive_count, 2);
        assert!((r.bins[0].confidence_sum - 2.0).abs() < 1e-12);
        assert!(r.value.abs() < 1e-12);
    }

    #[test]
    fn full_dece_two_bin_example() {
        // Records [0.9, 0.1] with label 0 and [0.9, 0.1] with label 1, two
        // confidence bins. Top bin: entries 0.9, 0.9, one positive ->
        // |1 - 1.8| = 0.8. Bottom bin: entries 0.1, 0.1, one positive ->
        // |1 - 0.2| = 0.8. Per-prediction: 1.6 / 4 = 0.4.
        let data = Dataset::new(2, vec![
            record("a", &[0.9, 0.1], 0, None),
            record("b", &[0.9, 0.1], 1, None),
        ]).unwrap();
        let scheme = BinningScheme::confidence_only(2).unwrap();
        let r = full_dece(&data, &scheme, Denominator::Predictions).unwrap();
        assert!((r.value - 0.4).abs() < 1e-12, "got {}", r.value);
        // Per-detection divides by N = 2 instead of C*N = 4.
        let d = full_dece(&data, &scheme, Denominator::Detections).unwrap();
        assert!((d.value - 0.8).abs() < 1e-12, "got {}", d.value);
        assert_eq!(d.total_count, 2);
        assert_eq!(d.bins.iter().map(|b| b.count).sum::<u64>(), 4);
    }

    #[test]
    fn full_dece_denominators_scale_by_class_count() {
        let mut records = Vec::new();
        for i in 0..30 {
            let a = 0.03 * i as f64 + 0.05;
            records.push(record(&format!("r{i}"), &[a, 1.0 - a, 0.5], i % 3, None));
        }
        let data = Dataset::new(3, records).unwrap();
        let scheme = BinningScheme::confidence_only(10).unwrap();
        let p = full_dece(&data, &scheme, Denominator::Predictions).unwrap();
        let d = full_dece(&data, &scheme, Denominator::Detections).unwrap();
        assert!((d.value - 3.0 * p.value).abs() < 1e-12);
    }

    #[test]
    fn recompute_matches_value_exactly() {
        let mut records = Vec::new();
        for i in 0..40 {
            let a = (0.021 * i as f64 + 0.07).min(1.0);
            records.push(record(&format!("r{i}"), &[a, 1.0 - a], i % 2, Some(vec![i as f64])));
        }
        let data = Dataset::new(2, records).unwrap();
        let scheme = BinningScheme::new(7, vec![FeatureDim::new("d", 3, 0.0, 40.0).unwrap()]).unwrap();
        for report in [
            ece(&data, 13).unwrap(),
            dece(&data, &scheme).unwrap(),
            full_dece(&data, &scheme, Denominator::Predictions).unwrap(),
            full_dece(&data, &scheme, Denominator::Detections).unwrap(),
        ] {
            assert_eq!(report.recompute().to_bits(), report.value.to_bits(), "{}", report.metric);
        }
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let data = Dataset::new(2, Vec::new()).unwrap();
        assert!(matches!(ece(&data, 10), Err(Error::EmptyDataset)));
        let scheme = BinningScheme::confidence_only(10).unwrap();
        assert!(matches!(dece(&data, &scheme), Err(Error::EmptyDataset)));
        assert!(matches!(
            full_dece(&data, &scheme, Denominator::Predictions),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn feature_scheme_on_featureless_data_is_an_error() {
        let data = Dataset::new(2, vec![record("a", &[0.6, 0.4], 0, None)]).unwrap();
        let scheme = BinningScheme::new(5, vec![FeatureDim::new("d", 2, 0.0, 1.0).unwrap()]).unwrap();
        assert!(matches!(dece(&data, &scheme), Err(Error::FeatureMismatch(_))));
    }

    #[test]
    fn named_feature_columns_resolve_out_of_order() {
        // Dataset features are [size, distance]; scheme asks for distance.
        let data = Dataset::new(2, vec![
            record("a", &[0.8, 0.1], 0, Some(vec![5.0, 90.0])),
            record("b", &[0.8, 0.1], 1, Some(vec![5.0, 10.0])),
        ]).unwrap()
        .with_feature_names(vec!["size".into(), "distance".into()]).unwrap();
        let scheme = BinningScheme::new(1, vec![FeatureDim::new("distance", 2, 0.0, 100.0).unwrap()]).unwrap();
        let r = dece(&data, &scheme).unwrap();
        // 90.0 and 10.0 land in different bins; positional fallback would
        // read size = 5.0 for both and merge them.
        assert_eq!(r.bins.len(), 2);
    }

    #[test]
    fn bin_counts_cover_all_entries() {
        let mut records = Vec::new();
        for i in 0..25 {
            let a = 0.039 * i as f64 + 0.01;
            records.push(record(&format!("r{i}"), &[a, 1.0 - a, 0.3, 0.2], i % 4, None));
        }
        let data = Dataset::new(4, records).unwrap();
        let r = ece(&data, 10).unwrap();
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<u64>(), 25);
        let scheme = BinningScheme::confidence_only(10).unwrap();
        let f = full_dece(&data, &scheme, Denominator::Predictions).unwrap();
        assert_eq!(f.bins.iter().map(|b| b.count).sum::<u64>(), 100);
        assert!(f.bins.windows(2).all(|w| w[0].index < w[1].index), "bins sorted");
    }

    #[test]
    fn reliability_points_full_mode() {
        let data = Dataset::new(2, vec![
            record("a", &[0.9, 0.1], 0, None),
            record("b", &[0.9, 0.1], 1, None),
        ]).unwrap();
        let pts = reliability(&data, 2, PredictionMode::Full).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0].center - 0.25).abs() < 1e-15);
        assert!((pts[0].mean_confidence - 0.1).abs() < 1e-12);
        assert!((pts[0].positive_rate - 0.5).abs() < 1e-15);
        assert_eq!(pts[0].count, 2);
        assert!((pts[1].center - 0.75).abs() < 1e-15);
        assert!((pts[1].mean_confidence - 0.9).abs() < 1e-12);
        assert!((pts[1].positive_rate - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reliability_dominant_mode_tracks_accuracy() {
        let data = Dataset::new(2, vec![
            record("a", &[0.9, 0.1], 0, None),
            record("b", &[0.9, 0.1], 1, None),
        ]).unwrap();
        let pts = reliability(&data, 2, PredictionMode::Dominant).unwrap();
        // Both dominant entries sit in the top bin; one is correct.
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].count, 2);
        assert!((pts[0].positive_rate - 0.5).abs() < 1e-15);
    }

    #[test]
    fn report_serializes_round_trip() {
        let data = Dataset::new(2, vec![
            record("a", &[0.6, 0.3], 0, None),
            record("b", &[0.8, 0.1], 1, None),
        ]).unwrap();
        let r = ece(&data, 5).unwrap();
        let json = serde_json::to_string_pretty(&r).unwrap();
        let back: MetricReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.recompute().to_bits(), back.value.to_bits());
    }
}
