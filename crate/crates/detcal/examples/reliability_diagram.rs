//! Prints an ASCII reliability diagram for an overconfident model: mean
//! confidence per bin against observed positive rate.
//!
//! Run with: cargo run --example reliability_diagram

use detcal::metrics::reliability;
use detcal::synth::{distort, generate_calibrated, Distortion, LabelSampling, SynthConfig};
use detcal::{ece, PredictionMode};

fn main() -> detcal::Result<()> {
    let config = SynthConfig {
        n: 20_000,
        num_classes: 3,
        seed: 11,
        logit_scale: 2.0,
        sampling: LabelSampling::SigmoidBernoulli,
        features: Vec::new(),
    };
    let data = distort(&generate_calibrated(&config)?, &Distortion::Temperature { t_star: 2.0 })?;
    println!("ece = {:.4}\n", ece(&data, 10)?.value);

    println!("bin   conf    rate   count");
    for p in reliability(&data, 10, PredictionMode::Dominant)? {
        let bar = "#".repeat((p.positive_rate * 40.0).round() as usize);
        let tick = (p.mean_confidence * 40.0).round() as usize;
        let mut lane: Vec<char> = bar.chars().chain(std::iter::repeat(' ')).take(41).collect();
        // The | mark is the bin's mean confidence; a calibrated model
        // grows each bar exactly up to its mark.
        lane[tick] = '|';
        let lane: String = lane.into_iter().collect();
        println!("{:>3}  {:.3}   {:.3}  {:>5}  {lane}", p.bin, p.mean_confidence, p.positive_rate, p.count);
    }
    Ok(())
}
