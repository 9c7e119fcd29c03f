//! Wire formats and the seeded dataset split.
//!
//! Three file kinds, all byte-deterministic:
//!
//! * detection files: JSON Lines, one header line then one record per
//!   line, floats printed at 17 significant digits so values round-trip
//!   exactly (write of read is byte-identical for files this module
//!   wrote);
//! * report files: pretty JSON with metric reports and optional
//!   reliability points plus provenance (input path, tool version, no
//!   timestamps);
//! * calibrator files: pretty JSON with the method-tagged parameters and
//!   the mode they were fitted in.
//!
//! Reading streams line by line and reports the exact line number of
//! anything malformed. NaN and infinity are rejected on both paths (JSON
//! cannot carry them, and vector validation refuses them anyway).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::Calibrator;
use crate::error::{Error, Result};
use crate::metrics::{MetricReport, ReliabilityPoint};
use crate::rng::Rng;
use crate::traindemo::EpochLog;
use crate::types::{ConfidenceVector, Dataset, DetectionRecord, LogitVector, PredictionMode};

/// Version stamped into every file this module writes.
pub const FORMAT_VERSION: u64 = 1;

fn tool_stamp() -> String {
    format!("detcal {}", env!("CARGO_PKG_VERSION"))
}

/// 17 significant digits: enough to reproduce any f64 bit pattern on read.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_float_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_float(*v));
    }
    out.push(']');
}

fn open_for_read(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::FileAccess { path: path.display().to_string(), source })
}

fn create_for_write(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::FileAccess { path: path.display().to_string(), source })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    version: u64,
    num_classes: usize,
    #[serde(default)]
    class_names: Option<Vec<String>>,
    #[serde(default)]
    feature_names: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    id: String,
    #[serde(default)]
    logits: Option<Vec<f64>>,
    confidences: Vec<f64>,
    label: usize,
    #[serde(default)]
    features: Option<Vec<f64>>,
}

/// Writes a dataset as JSON Lines: header, then one record per line.
/// Optional fields are omitted entirely rather than written as null, so
/// the encoding is canonical.
pub fn write_detections(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create_for_write(path)?);
    let mut header = format!(
        "{{\"version\":{},\"num_classes\":{}",
        FORMAT_VERSION,
        data.num_classes()
    );
    if let Some(names) = data.class_names() {
        header.push_str(",\"class_names\":");
        header.push_str(&serde_json::to_string(names)?);
    }
    if let Some(names) = data.feature_names() {
        header.push_str(",\"feature_names\":");
        header.push_str(&serde_json::to_string(names)?);
    }
    header.push('}');
    writeln!(w, "{header}")?;

    for r in data.records() {
        let mut line = String::from("{\"id\":");
        line.push_str(&serde_json::to_string(&r.id)?);
        if let Some(z) = &r.logits {
            line.push_str(",\"logits\":");
            push_float_array(&mut line, z.values());
        }
        line.push_str(",\"confidences\":");
        push_float_array(&mut line, r.confidences.values());
        line.push_str(&format!(",\"label\":{}", r.label));
        if let Some(f) = &r.features {
            line.push_str(",\"features\":");
            push_float_array(&mut line, f);
        }
        line.push('}');
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a detection file line by line. A header-only file yields an
/// empty dataset. Parse and validation failures name the 1-based line.
pub fn read_detections(path: &Path) -> Result<Dataset> {
    let reader = BufReader::new(open_for_read(path)?);
    let mut lines = reader.lines();

    let header_text = match lines.next() {
        Some(l) => l?,
        None => return Err(Error::MalformedLine { line: 1, reason: "file is empty, expected a header".into() }),
    };
    let header: HeaderLine = serde_json::from_str(&header_text)
        .map_err(|e| Error::MalformedLine { line: 1, reason: format!("bad header: {e}") })?;
    if header.version != FORMAT_VERSION {
        return Err(Error::MalformedLine {
            line: 1,
            reason: format!("unsupported version {}, expected {FORMAT_VERSION}", header.version),
        });
    }

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let text = line?;
        let raw: RecordLine = serde_json::from_str(&text)
            .map_err(|e| Error::MalformedLine { line: line_no, reason: e.to_string() })?;
        let wrap = |e: Error| Error::MalformedLine { line: line_no, reason: e.to_string() };
        let logits = raw.logits.map(LogitVector::new).transpose().map_err(wrap)?;
        let confidences = ConfidenceVector::new(raw.confidences).map_err(wrap)?;
        let record =
            DetectionRecord::new(raw.id, logits, confidences, raw.label, raw.features).map_err(wrap)?;
        if record.confidences.len() != header.num_classes {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!(
                    "record has {} classes, header says {}",
                    record.confidences.len(),
                    header.num_classes
                ),
            });
        }
        records.push(record);
    }

    let mut data = Dataset::new(header.num_classes, records)?;
    if let Some(names) = header.class_names {
        data = data.with_class_names(names)?;
    }
    if let Some(names) = header.feature_names {
        data = data.with_feature_names(names)?;
    }
    Ok(data)
}

/// Splits into calibration and evaluation halves: a seeded shuffle of the
/// indices, then alternating assignment. The first half gets the extra
/// record when the count is odd. Deterministic per seed; the two halves
/// are disjoint and jointly exhaustive.
pub fn split_dataset(data: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 records to split, got {}",
            data.len()
        )));
    }
    let mut indices: Vec<usize> = (0..data.len()).collect();
    Rng::new(seed).shuffle(&mut indices);
    let mut cal = Vec::with_capacity(data.len().div_ceil(2));
    let mut eval = Vec::with_capacity(data.len() / 2);
    for (pos, &idx) in indices.iter().enumerate() {
        let rec = data.records()[idx].clone();
        if pos % 2 == 0 {
            cal.push(rec);
        } else {
            eval.push(rec);
        }
    }
    Ok((data.with_records(cal)?, data.with_records(eval)?))
}

/// Metric reports plus provenance. `reliability` rides along when the
/// caller computed reliability points in the same pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: u64,
    /// Tool name and version that produced the file.
    pub tool: String,
    /// Path of the evaluated input, as given on the command line.
    pub input: String,
    pub reports: Vec<MetricReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub reliability: Option<Vec<ReliabilityPoint>>,
}

impl ReportFile {
    pub fn new(input: impl Into<String>, reports: Vec<MetricReport>) -> Self {
        Self {
            version: FORMAT_VERSION,
            tool: tool_stamp(),
            input: input.into(),
            reports,
            reliability: None,
        }
    }
}

/// Pretty JSON, trailing newline, no timestamps: identical inputs give
/// identical bytes.
pub fn write_report(report: &ReportFile, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create_for_write(path)?);
    let text = serde_json::to_string_pretty(report)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

/// Reads a report file and replays each report's value from its own bins;
/// a mismatch means the file was edited or truncated.
pub fn read_report(path: &Path) -> Result<ReportFile> {
    let file: ReportFile = serde_json::from_reader(BufReader::new(open_for_read(path)?))?;
    if file.version != FORMAT_VERSION {
        return Err(Error::CorruptFile(format!(
            "unsupported report version {}, expected {FORMAT_VERSION}",
            file.version
        )));
    }
    for r in &file.reports {
        if r.recompute().to_bits() != r.value.to_bits() {
            return Err(Error::CorruptFile(format!(
                "stored {} value {} does not match its bins ({})",
                r.metric,
                r.value,
                r.recompute()
            )));
        }
    }
    Ok(file)
}

/// A fitted calibrator with the mode it was fitted in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratorFile {
    pub version: u64,
    pub tool: String,
    /// Which targets the fit used (dominant-correctness or all classes).
    pub fit_mode: PredictionMode,
    pub calibrator: Calibrator,
}

impl CalibratorFile {
    pub fn new(fit_mode: PredictionMode, calibrator: Calibrator) -> Self {
        Self { version: FORMAT_VERSION, tool: tool_stamp(), fit_mode, calibrator }
    }
}

pub fn write_calibrator(file: &CalibratorFile, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create_for_write(path)?);
    let text = serde_json::to_string_pretty(file)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

/// Reads and re-validates a calibrator file; parameters from disk are
/// untrusted.
pub fn read_calibrator(path: &Path) -> Result<CalibratorFile> {
    let file: CalibratorFile = serde_json::from_reader(BufReader::new(open_for_read(path)?))?;
    if file.version != FORMAT_VERSION {
        return Err(Error::CorruptFile(format!(
            "unsupported calibrator version {}, expected {FORMAT_VERSION}",
            file.version
        )));
    }
    file.calibrator.validate()?;
    Ok(file)
}

/// Reliability points as plot-ready CSV.
pub fn write_reliability_csv(points: &[ReliabilityPoint], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create_for_write(path)?);
    writeln!(w, "bin,center,count,mean_confidence,positive_rate")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.bin,
            fmt_float(p.center),
            p.count,
            fmt_float(p.mean_confidence),
            fmt_float(p.positive_rate)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Per-epoch training log as CSV.
pub fn write_train_log_csv(log: &[EpochLog], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create_for_write(path)?);
    writeln!(w, "epoch,base_part,aux_part,holdout_accuracy,holdout_ece,holdout_full_dece")?;
    for e in log {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.epoch,
            fmt_float(e.base_part),
            fmt_float(e.aux_part),
            fmt_float(e.holdout_accuracy),
            fmt_float(e.holdout_ece),
            fmt_float(e.holdout_full_dece)
        )?;
    }
    w.flush()?;
    Ok(())
}
