//! Independent oracles shared by the integration tests.
//!
//! The point of everything here is to NOT share aggregation code with the
//! library: binned gaps are re-derived through a hash map keyed by raw
//! per-dimension cells, the monotone regression optimum is found by
//! exhaustive partition search, and gradients are probed by central
//! differences. Bin-cell placement itself (floor with a closed top bin,
//! features clamped to edge bins) is a documented convention of the file
//! and report formats, so the oracles reproduce that convention rather
//! than inventing a second one.

use std::collections::HashMap;

use detcal::types::{ConfidenceVector, Dataset, DetectionRecord};

/// One binning dimension for the brute-force gap: `values[k]` is binned
/// into `bins` cells over `[lo, hi)`.
#[derive(Clone, Copy)]
pub struct BruteDim {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
}

fn brute_cell(v: f64, d: BruteDim) -> usize {
    let scaled = (v - d.lo) * d.bins as f64 / (d.hi - d.lo);
    let cell = scaled.floor();
    if cell < 0.0 {
        0
    } else if cell as usize >= d.bins {
        d.bins - 1
    } else {
        cell as usize
    }
}

/// Brute-force binned calibration gap. Each entry is (values, positive)
/// where `values[0]` is the confidence that accumulates into the bin's
/// sum and the remaining values are extra binning dimensions. Bins live
/// in a hash map keyed by the raw cell tuple; nothing is flattened.
pub fn brute_force_binned_gap(entries: &[(Vec<f64>, bool)], dims: &[BruteDim], total: u64) -> f64 {
    let mut cells: HashMap<Vec<usize>, (f64, u64)> = HashMap::new();
    for (values, positive) in entries {
        assert_eq!(values.len(), dims.len(), "entry/dims arity mismatch");
        let key: Vec<usize> = values.iter().zip(dims).map(|(&v, &d)| brute_cell(v, d)).collect();
        let slot = cells.entry(key).or_insert((0.0, 0));
        slot.0 += values[0];
        slot.1 += u64::from(*positive);
    }
    let mut keys: Vec<&Vec<usize>> = cells.keys().collect();
    keys.sort();
    let gap: f64 = keys
        .iter()
        .map(|k| {
            let (conf_sum, positives) = cells[*k];
            (positives as f64 - conf_sum).abs()
        })
        .sum();
    gap / total as f64
}

/// Exhaustive monotone least-squares fit for up to ~16 distinct points:
/// tied inputs are grouped into weighted points, then every consecutive
/// partition is tried and those with non-decreasing block means compete
/// on weighted squared error. The winner's per-pair fitted values are
/// returned in the order of `pairs`.
///
/// The optimum is a step function that is constant on blocks with each
/// block at its (weighted) mean, and the monotone-mean partitions include
/// the true optimum, so the minimum over them is exact.
pub fn exhaustive_monotone_fit(pairs: &[(f64, f64)]) -> Vec<f64> {
    assert!(!pairs.is_empty());
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Group exact ties: one fitted value per distinct input.
    let mut points: Vec<(f64, f64, f64)> = Vec::new(); // (input, target sum, weight)
    for &(c, y) in &sorted {
        match points.last_mut() {
            Some(last) if last.0 == c => {
                last.1 += y;
                last.2 += 1.0;
            }
            _ => points.push((c, y, 1.0)),
        }
    }
    let m = points.len();
    assert!(m <= 20, "exhaustive search is exponential; got {m} distinct points");

    let mut best_sse = f64::INFINITY;
    let mut best_values: Vec<f64> = Vec::new();
    // Bit b of `mask` set = a block boundary after point b.
    for mask in 0..(1u32 << (m - 1)) {
        let mut block_of = vec![0usize; m];
        let mut block = 0;
        for i in 0..m {
            block_of[i] = block;
            if i + 1 < m && mask & (1 << i) != 0 {
                block += 1;
            }
        }
        let blocks = block + 1;
        let mut sum = vec![0.0; blocks];
        let mut weight = vec![0.0; blocks];
        for i in 0..m {
            sum[block_of[i]] += points[i].1;
            weight[block_of[i]] += points[i].2;
        }
        let means: Vec<f64> = sum.iter().zip(&weight).map(|(s, w)| s / w).collect();
        if means.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        let mut sse = 0.0;
        for &(c, y) in &sorted {
            let p = points.iter().position(|&(pc, _, _)| pc == c).unwrap();
            let fitted = means[block_of[p]];
            sse += (fitted - y) * (fitted - y);
        }
        if sse < best_sse {
            best_sse = sse;
            best_values = pairs
                .iter()
                .map(|&(c, _)| {
                    let p = points.iter().position(|&(pc, _, _)| pc == c).unwrap();
                    means[block_of[p]]
                })
                .collect();
        }
    }
    best_values
}

/// Builds a dataset whose dominant-mode (confidence, hit) pairs are
/// exactly `pairs`: class 0 carries the confidence and stays dominant,
/// the label encodes hit (0) or miss (1).
pub fn dataset_from_pairs(pairs: &[(f64, bool)]) -> Dataset {
    let records = pairs
        .iter()
        .enumerate()
        .map(|(i, &(c, hit))| {
            let other = (c - 0.1).max(0.0);
            DetectionRecord::new(
                format!("p{i}"),
                None,
                ConfidenceVector::new(vec![c, other]).unwrap(),
                usize::from(!hit),
                None,
            )
            .unwrap()
        })
        .collect();
    Dataset::new(2, records).unwrap()
}

/// Rebuilds `data` with one confidence entry replaced, for finite
/// differences through the metrics.
pub fn perturb_confidence(data: &Dataset, record: usize, class: usize, new_value: f64) -> Dataset {
    let mut records: Vec<DetectionRecord> = data.records().to_vec();
    let r = &records[record];
    let mut values = r.confidences.values().to_vec();
    values[class] = new_value;
    records[record] = DetectionRecord::new(
        r.id.clone(),
        None,
        ConfidenceVector::new(values).unwrap(),
        r.label,
        r.features.clone(),
    )
    .unwrap();
    data.with_records(records).unwrap()
}
