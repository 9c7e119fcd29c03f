//! Repairs an affine logit distortion with isotonic regression fitted in
//! full mode, where every class entry is a training pair, not just the
//! dominant one. Temperature scaling cannot express this fix; a monotone
//! step map can.
//!
//! Run with: cargo run --example isotonic_full_repair

use detcal::calibrate::fit_isotonic;
use detcal::synth::{distort, generate_calibrated, Distortion, LabelSampling, SynthConfig};
use detcal::{calibrate_dataset, full_dece, BinningScheme, Calibrator, Denominator, PredictionMode};

fn main() -> detcal::Result<()> {
    let config = SynthConfig {
        n: 50_000,
        num_classes: 3,
        seed: 23,
        logit_scale: 2.0,
        sampling: LabelSampling::SigmoidBernoulli,
        features: Vec::new(),
    };
    let skew = distort(&generate_calibrated(&config)?, &Distortion::Affine { a: 2.0, b: 0.5 })?;
    let scheme = BinningScheme::confidence_only(25)?;

    let before = full_dece(&skew, &scheme, Denominator::Predictions)?.value;
    let map = fit_isotonic(&skew, PredictionMode::Full)?;
    println!("fitted a monotone step map with {} segments", map.values().len());

    let repaired = calibrate_dataset(&skew, &Calibrator::Isotonic(map))?;
    let after = full_dece(&repaired, &scheme, Denominator::Predictions)?.value;
    println!("full-dece: {before:.4} -> {after:.4}");

    // A few probe points show the learned inverse of the distortion.
    let map = fit_isotonic(&skew, PredictionMode::Full)?;
    println!("\ninput  mapped");
    for c in [0.05, 0.25, 0.5, 0.75, 0.95] {
        println!("{c:.2}   {:.4}", map.map(c));
    }
    Ok(())
}
