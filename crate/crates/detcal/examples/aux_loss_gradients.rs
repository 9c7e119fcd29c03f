//! Evaluates the combined training loss on a small batch and checks one
//! straight-through gradient entry against a central finite difference.
//!
//! Run with: cargo run --example aux_loss_gradients

use detcal::losses::{combined_loss, AuxLoss, BaseLoss, LossConfig};
use detcal::{ConfidenceVector, Dataset, DetectionRecord};

fn batch(shift: f64) -> Dataset {
    let rows: [(&str, [f64; 3], usize); 4] = [
        ("a", [0.72 + shift, 0.18, 0.10], 0),
        ("b", [0.61, 0.28, 0.11], 1),
        ("c", [0.45, 0.33, 0.22], 0),
        ("d", [0.81, 0.12, 0.07], 0),
    ];
    Dataset::new(
        3,
        rows.iter()
            .map(|(id, c, y)| {
                DetectionRecord::new(*id, None, ConfidenceVector::new(c.to_vec()).unwrap(), *y, None).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

fn main() -> detcal::Result<()> {
    let config = LossConfig {
        base: BaseLoss::Focal { gamma: 2.0 },
        aux: AuxLoss::FullDece,
        alpha: 1.0,
        train_bins: 4,
    };
    let loss = combined_loss(&batch(0.0), &config)?;
    println!("total = {:.6} (base {:.6} + alpha * aux {:.6})", loss.total, loss.base_part, loss.aux_part);

    println!("\ngradients w.r.t. confidences:");
    for (i, row) in loss.grad_confidences.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|g| format!("{g:+.4}")).collect();
        println!("record {i}: [{}]", cells.join(", "));
    }

    // The aux term's gradient is a constant sign per bin occupant, so a
    // central difference at any interior point reproduces it.
    let h = 1e-6;
    let up = combined_loss(&batch(h), &config)?.total;
    let down = combined_loss(&batch(-h), &config)?.total;
    let fd = (up - down) / (2.0 * h);
    let analytic = loss.grad_confidences[0][0];
    println!("\nd total / d conf[a][0]: analytic {analytic:+.6}, finite difference {fd:+.6}");
    Ok(())
}
