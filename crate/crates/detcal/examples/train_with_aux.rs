//! Trains the toy classifier twice on the same mixture data, with and
//! without the calibration-aware auxiliary term, and compares held-out
//! accuracy and full-vector miscalibration.
//!
//! Run with: cargo run --release --example train_with_aux

use detcal::losses::{AuxLoss, BaseLoss, LossConfig};
use detcal::traindemo::{make_mixture_data, train, ToyClassifier, TrainConfig, TrainOutcome};

fn run(aux: AuxLoss, alpha: f64) -> detcal::Result<TrainOutcome> {
    let seed = 3;
    let data = make_mixture_data(3, 8_000, 1.5, seed)?;
    let (train_half, holdout) = data.split_half();
    let config = TrainConfig {
        loss: LossConfig { base: BaseLoss::Focal { gamma: 2.0 }, aux, alpha, train_bins: 15 },
        epochs: 15,
        batch_size: 64,
        learning_rate: 0.5,
        seed,
    };
    train(ToyClassifier::new(2, 32, 3, seed)?, &train_half, &holdout, &config)
}

fn main() -> detcal::Result<()> {
    let plain = run(AuxLoss::None, 0.0)?;
    let auxed = run(AuxLoss::FullDece, 1.0)?;

    println!("epoch  focal only (acc, full_dece)   with aux (acc, full_dece)");
    for (a, b) in plain.log.iter().zip(&auxed.log) {
        println!(
            "{:>5}  ({:.4}, {:.6})             ({:.4}, {:.6})",
            a.epoch, a.holdout_accuracy, a.holdout_full_dece, b.holdout_accuracy, b.holdout_full_dece
        );
    }

    let last = (plain.log.last().unwrap(), auxed.log.last().unwrap());
    println!("\nfinal full_dece: {:.6} -> {:.6}", last.0.holdout_full_dece, last.1.holdout_full_dece);
    println!("final accuracy:  {:.4} -> {:.4}", last.0.holdout_accuracy, last.1.holdout_accuracy);
    Ok(())
}
