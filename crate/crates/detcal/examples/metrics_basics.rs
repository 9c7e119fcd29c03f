//! Computes all three calibration metrics on a tiny hand-built dataset
//! and shows how a stored report replays its own value from the bins.
//!
//! Run with: cargo run --example metrics_basics

use detcal::{dece, ece, full_dece, BinningScheme, ConfidenceVector, Dataset, Denominator, DetectionRecord, FeatureDim};

fn record(id: &str, confs: Vec<f64>, label: usize, distance: f64) -> DetectionRecord {
    DetectionRecord::new(id, None, ConfidenceVector::new(confs).unwrap(), label, Some(vec![distance])).unwrap()
}

fn main() -> detcal::Result<()> {
    let data = Dataset::new(
        2,
        vec![
            record("near-hit", vec![0.9, 0.1], 0, 12.0),
            record("near-miss", vec![0.8, 0.2], 1, 25.0),
            record("far-hit", vec![0.7, 0.3], 0, 80.0),
            record("far-miss", vec![0.6, 0.4], 1, 95.0),
        ],
    )?
    .with_feature_names(vec!["distance".into()])?;

    // Dominant confidence against dominant correctness, 5 confidence bins.
    let report = ece(&data, 5)?;
    println!("ece           = {:.6}  ({} bins occupied)", report.value, report.bins.len());

    // Same statistic, but binned jointly over confidence and distance.
    let scheme = BinningScheme::new(5, vec![FeatureDim::new("distance", 2, 0.0, 100.0)?])?;
    let report = dece(&data, &scheme)?;
    println!("dece          = {:.6}  ({} bins occupied)", report.value, report.bins.len());

    // Every class entry participates, positives are label matches.
    for denominator in [Denominator::Predictions, Denominator::Detections] {
        let report = full_dece(&data, &scheme, denominator)?;
        println!("full-dece     = {:.6}  (per {denominator})", report.value);
    }

    // Reports are self-verifying: the value is recomputable from the bins.
    let report = ece(&data, 5)?;
    assert_eq!(report.value.to_bits(), report.recompute().to_bits());
    println!("report value replays bit-identically from its bins");
    Ok(())
}
