//! Calibration metrics, post-hoc calibrators, and calibration-aware
//! training losses for multi-class detections.
//!
//! A detection here is a per-class confidence vector (optionally with the
//! logits behind it), a ground-truth label, and optional geometric
//! features such as distance or size. Every quantity in this crate hangs
//! off one binned identity: partition predictions into bins, and in each
//! bin compare the number of correct predictions against the sum of
//! predicted confidences. Averaging those gaps gives the metrics; pushing
//! their (sub)gradients back through the confidences gives the training
//! losses; replaying per-bin statistics gives self-verifying reports.
//!
//! What lives where:
//!
//! * [`types`]: confidence and logit vectors, records, datasets;
//! * [`binning`]: joint binning over confidence and geometric features;
//! * [`metrics`]: the dominant-prediction metric, its feature-binned
//!   variant, and the full-vector variant, plus reliability points;
//! * [`calibrate`]: temperature, affine-logit, isotonic, and histogram
//!   calibrators, with fitting and application;
//! * [`losses`]: focal and cross-entropy base losses and the binned
//!   auxiliary calibration losses with straight-through gradients;
//! * [`synth`]: a seeded generator of datasets that are calibrated by
//!   construction, plus controlled miscalibration distortions;
//! * [`traindemo`]: a tiny deterministic training harness showing the
//!   auxiliary losses at work;
//! * [`io`]: byte-deterministic file formats and the seeded split;
//! * [`cli`]: the `detcal` command-line tool built from the above.
//!
//! Determinism is a contract throughout: fixed seeds give bit-identical
//! datasets, fits, files, and training runs.

pub mod binning;
pub mod calibrate;
pub mod cli;
pub mod error;
pub mod io;
pub mod losses;
pub mod metrics;
pub(crate) mod rng;
pub mod synth;
pub mod traindemo;
pub mod types;

pub use binning::{BinningScheme, FeatureDim};
pub use calibrate::{calibrate_dataset, Calibrator};
pub use error::{Error, Result};
pub use metrics::{dece, ece, full_dece, reliability, Denominator, Metric, MetricReport};
pub use types::{ConfidenceVector, Dataset, DetectionRecord, LogitVector, PredictionMode};
