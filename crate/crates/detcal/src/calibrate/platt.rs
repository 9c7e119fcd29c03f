//! Platt scaling: sigmoid of an affine transform of the logit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{sigmoid, Dataset, PredictionMode};

use super::logit_pairs;
use super::temperature::softplus;

pub const PLATT_MAX_ITERATIONS: u32 = 10_000;
pub const PLATT_GRADIENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl PlattParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "platt parameters must be finite, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// Fit outcome: the parameters plus whether the gradient criterion was met
/// within the iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattFit {
    pub params: PlattParams,
    pub converged: bool,
    pub iterations: u32,
}

/// Mean binary NLL of sigmoid(a*z + b) against the hit indicators.
fn nll(pairs: &[(f64, bool)], a: f64, b: f64) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|&(z, hit)| {
            let u = a * z + b;
            if hit {
                softplus(-u)
            } else {
                softplus(u)
            }
        })
        .sum();
    sum / pairs.len() as f64
}

/// Gradient and Hessian entries of the mean NLL at (a, b).
fn derivatives(pairs: &[(f64, bool)], a: f64, b: f64) -> (f64, f64, f64, f64, f64) {
    let n = pairs.len() as f64;
    let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(z, hit) in pairs {
        let s = sigmoid(a * z + b);
        let r = s - f64::from(hit as u8);
        ga += r * z;
        gb += r;
        let w = s * (1.0 - s);
        haa += w * z * z;
        hab += w * z;
        hbb += w;
    }
    (ga / n, gb / n, haa / n, hab / n, hbb / n)
}

/// Fits `sigmoid(a*z + b)` to the fit pairs of `mode` by minimizing mean
/// binary NLL from (a, b) = (1, 0): Newton steps while they help, damped
/// gradient steps otherwise, stopping when the gradient norm drops under
/// [`PLATT_GRADIENT_TOLERANCE`] or after [`PLATT_MAX_ITERATIONS`]. A run
/// that exhausts the budget (or stalls) reports `converged: false` with
/// the best parameters found. Deterministic.
pub fn fit_platt(data: &Dataset, mode: PredictionMode) -> Result<PlattFit> {
    let pairs = logit_pairs(data, mode)?;
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "platt fit needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    let hits = pairs.iter().filter(|(_, h)| *h).count();
    if hits == 0 || hits == pairs.len() {
        return Err(Error::DegenerateTargets(format!(
            "all {} fit pairs are {}",
            pairs.len(),
            if hits == 0 { "negative" } else { "positive" }
        )));
    }

    let (mut a, mut b) = (1.0, 0.0);
    let mut loss = nll(&pairs, a, b);
    for iter in 1..=PLATT_MAX_ITERATIONS {
        let (ga, gb, haa, hab, hbb) = derivatives(&pairs, a, b);
        if (ga * ga + gb * gb).sqrt() < PLATT_GRADIENT_TOLERANCE {
            return Ok(PlattFit { params: PlattParams::new(a, b)?, converged: true, iterations: iter - 1 });
        }

        let det = haa * hbb - hab * hab;
        let newton = if det.abs() > 1e-300 {
            let da = -(hbb * ga - hab * gb) / det;
            let db = -(haa * gb - hab * ga) / det;
            let (na, nb) = (a + da, b + db);
            let l = nll(&pairs, na, nb);
            (l.is_finite() && l < loss).then_some((na, nb, l))
        } else {
            None
        };

        if let Some((na, nb, l)) = newton {
            (a, b, loss) = (na, nb, l);
            continue;
        }

        // Newton step rejected: walk downhill with a halving step size.
        let mut eta = 1.0;
        let mut stepped = false;
        while eta > 1e-18 {
            let (na, nb) = (a - eta * ga, b - eta * gb);
            let l = nll(&pairs, na, nb);
            if l.is_finite() && l < loss {
                (a, b, loss) = (na, nb, l);
                stepped = true;
                break;
            }
            eta /= 2.0;
        }
        if !stepped {
            // No direction improves at float resolution; best-so-far.
            return Ok(PlattFit { params: PlattParams::new(a, b)?, converged: false, iterations: iter });
        }
    }
    Ok(PlattFit { params: PlattParams::new(a, b)?, converged: false, iterations: PLATT_MAX_ITERATIONS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DetectionRecord, LogitVector};

    fn sigmoid_record(id: String, zs: Vec<f64>, label: usize) -> DetectionRecord {
        let z = LogitVector::new(zs).unwrap();
        let c = z.sigmoid();
        DetectionRecord::new(id, Some(z), c, label, None).unwrap()
    }

    /// Dominant-correctness rate tracks sigmoid(z_dom) deterministically
    /// via a low-discrepancy sequence, so (a, b) = (1, 0) is near-optimal.
    fn calibrated_dataset(n: usize) -> Dataset {
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let z = -1.0 + 3.0 * (i as f64 / n as f64);
            let p = sigmoid(z);
            let correct = (i as f64 * 0.618_033_988_749).fract() < p;
            // Dominant logit must stay z, so park the other class below it.
            let label = if correct { 0 } else { 1 };
            records.push(sigmoid_record(format!("r{i}"), vec![z, z - 4.0], label));
        }
        Dataset::new(2, records).unwrap()
    }

    fn distort_affine(data: &Dataset, m: f64, c: f64) -> Dataset {
        let records: Vec<DetectionRecord> = data
            .records()
            .iter()
            .map(|r| {
                let zs: Vec<f64> = r.logits.as_ref().unwrap().values().iter().map(|z| m * z + c).collect();
                sigmoid_record(r.id.clone(), zs, r.label)
            })
            .collect();
        Dataset::new(2, records).unwrap()
    }

    #[test]
    fn calibrated_data_fits_near_identity() {
        let fit = fit_platt(&calibrated_dataset(50_000), PredictionMode::Dominant).unwrap();
        assert!(fit.converged);
        assert!((0.9..=1.1).contains(&fit.params.a), "a = {}", fit.params.a);
        assert!(fit.params.b.abs() <= 0.1, "b = {}", fit.params.b);
    }

    #[test]
    fn affine_distortion_is_inverted() {
        // Labels were drawn at scale z; logits say 2z + 1. The fit must
        // undo that: a*(2z + 1) + b = z needs a = 0.5, b = -0.5.
        let distorted = distort_affine(&calibrated_dataset(50_000), 2.0, 1.0);
        let fit = fit_platt(&distorted, PredictionMode::Dominant).unwrap();
        assert!((fit.params.a - 0.5).abs() <= 0.05, "a = {}", fit.params.a);
        assert!((fit.params.b + 0.5).abs() <= 0.05, "b = {}", fit.params.b);
    }

    /// Coarse-to-fine 2-D grid search over the NLL agrees with the
    /// Newton result.
    #[test]
    fn newton_matches_grid_oracle() {
        let data = distort_affine(&calibrated_dataset(2_000), 1.5, -0.4);
        let pairs = logit_pairs(&data, PredictionMode::Dominant).unwrap();
        let (mut ca, mut cb, mut ra, mut rb) = (0.5, 0.0, 2.0, 2.0);
        for _ in 0..12 {
            let mut best = (f64::INFINITY, ca, cb);
            for i in 0..=20 {
                for j in 0..=20 {
                    let a = ca - ra + ra * i as f64 / 10.0;
                    let b = cb - rb + rb * j as f64 / 10.0;
                    let l = nll(&pairs, a, b);
                    if l < best.0 {
                        best = (l, a, b);
                    }
                }
            }
            (ca, cb) = (best.1, best.2);
            ra /= 4.0;
            rb /= 4.0;
        }
        let fit = fit_platt(&data, PredictionMode::Dominant).unwrap();
        assert!((fit.params.a - ca).abs() < 1e-3, "a {} vs oracle {ca}", fit.params.a);
        assert!((fit.params.b - cb).abs() < 1e-3, "b {} vs oracle {cb}", fit.params.b);
        assert!(nll(&pairs, fit.params.a, fit.params.b) <= nll(&pairs, ca, cb) + 1e-12);
    }

    #[test]
    fn full_mode_consumes_secondary_logits() {
        // Secondary logits sit 4 below the dominant ones and are almost
        // always true negatives, which drags the full fit away from the
        // dominant-only fit.
        let data = calibrated_dataset(5_000);
        let dominant = fit_platt(&data, PredictionMode::Dominant).unwrap();
        let full = fit_platt(&data, PredictionMode::Full).unwrap();
        assert!(
            (dominant.params.a - full.params.a).abs() > 1e-3
                || (dominant.params.b - full.params.b).abs() > 1e-3
        );
    }

    #[test]
    fn degenerate_and_missing_inputs_error() {
        let all_correct = Dataset::new(2, vec![
            sigmoid_record("a".into(), vec![2.0, -1.0], 0),
            sigmoid_record("b".into(), vec![1.0, -1.0], 0),
        ])
        .unwrap();
        assert!(matches!(
            fit_platt(&all_correct, PredictionMode::Dominant),
            Err(Error::DegenerateTargets(_))
        ));
        let no_logits = Dataset::new(2, vec![DetectionRecord::new(
            "a",
            None,
            crate::types::ConfidenceVector::new(vec![0.7, 0.2]).unwrap(),
            0,
            None,
        )
        .unwrap()])
        .unwrap();
        assert!(matches!(
            fit_platt(&no_logits, PredictionMode::Dominant),
            Err(Error::MissingLogits(_))
        ));
    }
}
