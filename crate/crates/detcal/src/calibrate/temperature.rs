//! Temperature scaling: one scalar divisor for all logits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, PredictionMode};

use super::logit_pairs;

/// Search interval for the fitted temperature.
pub const TEMPERATURE_RANGE: (f64, f64) = (0.05, 20.0);
/// Absolute interval tolerance of the golden-section search.
pub const TEMPERATURE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureParams {
    pub temperature: f64,
}

impl TemperatureParams {
    pub fn new(temperature: f64) -> Result<Self> {
        let p = Self { temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "temperature must be finite and positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// ln(1 + e^t) without overflow; softplus(t) = -ln sigmoid(-t).
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else if t < -30.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

/// Mean binary NLL of sigmoid(z/t) against the hit indicator.
fn nll(pairs: &[(f64, bool)], t: f64) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|&(z, hit)| {
            let u = z / t;
            if hit {
                softplus(-u)
            } else {
                softplus(u)
            }
        })
        .sum();
    sum / pairs.len() as f64
}

/// Fits the temperature that minimizes the binary NLL of
/// `sigmoid(z_dom / T)` against dominant-prediction correctness, by
/// golden-section search on [`TEMPERATURE_RANGE`] down to an interval of
/// [`TEMPERATURE_TOLERANCE`]. Deterministic.
///
/// Needs logits on every record, at least 2 records, and both a correct
/// and an incorrect dominant prediction; with one-sided targets the NLL
/// is monotone in T and has no interior minimum.
pub fn fit_temperature(data: &Dataset) -> Result<TemperatureParams> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "temperature fit needs at least 2 records, got {}",
            data.len()
        )));
    }
    let pairs = logit_pairs(data, PredictionMode::Dominant)?;
    let hits = pairs.iter().filter(|(_, h)| *h).count();
    if hits == 0 || hits == pairs.len() {
        return Err(Error::DegenerateTargets(format!(
            "all {} dominant predictions are {}",
            pairs.len(),
            if hits == 0 { "incorrect" } else { "correct" }
        )));
    }

    // Golden-section search; the interval shrinks by 1/phi per step.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = TEMPERATURE_RANGE;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = nll(&pairs, c);
    let mut fd = nll(&pairs, d);
    while hi - lo > TEMPERATURE_TOLERANCE {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = nll(&pairs, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = nll(&pairs, d);
        }
    }
    TemperatureParams::new((lo + hi) / 2.0)
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

    /// Correctness carved deterministically to the calibrated rate: among
    /// records with dominant confidence p, a fraction ~p is correct. The
    /// NLL minimum then sits near T = 1.
    fn calibrated_dataset(n: usize) -> Dataset {
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let z = 0.2 + 2.0 * (i as f64 / n as f64); // dominant logit in [0.2, 2.2]
            let p = crate::types::sigmoid(z);
            let correct = (i as f64 * 0.618).fract() < p;
            let label = if correct { 0 } else { 1 };
            records.push(sigmoid_record(format!("r{i}"), vec![z, -3.0], label));
        }
        Dataset::new(2, records).unwrap()
    }

    #[test]
    fn calibrated_data_fits_near_unit_temperature() {
        let t = fit_temperature(&calibrated_dataset(20_000)).unwrap().temperature;
        assert!((0.9..=1.1).contains(&t), "got {t}");
    }

    /// Grid-search oracle at step 1e-3 agrees with golden-section within
    /// the combined tolerance.
    #[test]
    fn golden_section_matches_grid_oracle() {
        let data = calibrated_dataset(2_000);
        let pairs = logit_pairs(&data, PredictionMode::Dominant).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        let mut t = TEMPERATURE_RANGE.0;
        while t <= TEMPERATURE_RANGE.1 {
            let f = nll(&pairs, t);
            if f < best.0 {
                best = (f, t);
            }
            t += 1e-3;
        }
        let fitted = fit_temperature(&data).unwrap().temperature;
        assert!(
            (fitted - best.1).abs() < 2e-3,
            "golden-section {fitted} vs grid {}",
            best.1
        );
    }

    #[test]
    fn sharpened_logits_fit_a_matching_divisor() {
        // Labels drawn at scale z, logits stored at 2z: dividing by T = 2
        // restores the scale the labels came from.
        let base = calibrated_dataset(20_000);
        let records: Vec<DetectionRecord> = base
            .records()
            .iter()
            .map(|r| {
                let zs: Vec<f64> = r.logits.as_ref().unwrap().values().iter().map(|z| z * 2.0).collect();
                sigmoid_record(r.id.clone(), zs, r.label)
            })
            .collect();
        let sharpened = Dataset::new(2, records).unwrap();
        let t = fit_temperature(&sharpened).unwrap().temperature;
        assert!((1.8..=2.2).contains(&t), "got {t}");
    }

    #[test]
    fn degenerate_targets_are_rejected() {
        let all_correct = Dataset::new(2, vec![
            sigmoid_record("a".into(), vec![2.0, -1.0], 0),
            sigmoid_record("b".into(), vec![1.5, -1.0], 0),
        ])
        .unwrap();
        assert!(matches!(fit_temperature(&all_correct), Err(Error::DegenerateTargets(_))));
        let all_wrong = Dataset::new(2, vec![
            sigmoid_record("a".into(), vec![2.0, -1.0], 1),
            sigmoid_record("b".into(), vec![1.5, -1.0], 1),
        ])
        .unwrap();
        assert!(matches!(fit_temperature(&all_wrong), Err(Error::DegenerateTargets(_))));
    }

    #[test]
    fn single_record_is_rejected() {
        let data = Dataset::new(2, vec![sigmoid_record("a".into(), vec![2.0, -1.0], 0)]).unwrap();
        assert!(matches!(fit_temperature(&data), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn softplus_is_stable_at_extremes() {
        assert_eq!(softplus(100.0), 100.0);
        assert!(softplus(-100.0) > 0.0);
        assert!(softplus(-100.0) < 1e-40);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
