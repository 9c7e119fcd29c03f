//! Sharpens a calibrated source with a known temperature, then recovers
//! that temperature from the labels alone and undoes the damage.
//!
//! Run with: cargo run --example temperature_recovery

use detcal::calibrate::fit_temperature;
use detcal::synth::{distort, generate_calibrated, Distortion, LabelSampling, SynthConfig};
use detcal::{calibrate_dataset, ece, Calibrator};

fn main() -> detcal::Result<()> {
    let config = SynthConfig {
        n: 50_000,
        num_classes: 3,
        seed: 17,
        logit_scale: 2.0,
        sampling: LabelSampling::SigmoidBernoulli,
        features: Vec::new(),
    };
    let calibrated = generate_calibrated(&config)?;
    let t_star = 2.5;
    let hot = distort(&calibrated, &Distortion::Temperature { t_star })?;
    println!("injected temperature: {t_star}");
    println!("ece before distortion: {:.4}", ece(&calibrated, 25)?.value);
    println!("ece after distortion:  {:.4}", ece(&hot, 25)?.value);

    let params = fit_temperature(&hot)?;
    println!("recovered temperature: {:.4}", params.temperature);

    let cooled = calibrate_dataset(&hot, &Calibrator::Temperature(params))?;
    println!("ece after calibration: {:.4}", ece(&cooled, 25)?.value);

    // Dividing logits by a positive scalar never reorders them.
    let moved = hot
        .records()
        .iter()
        .zip(cooled.records())
        .filter(|(h, c)| h.dominant().0 != c.dominant().0)
        .count();
    println!("records whose dominant class moved: {moved}");
    Ok(())
}
