//! Command-line front end.
//!
//! Human-readable summaries go to stdout; machine-readable artifacts
//! (detection files, reports, calibrators, CSV) go only to files named
//! by flags. Exit codes: 0 success, 1 usage or validation problems
//! (including unreadable paths), 2 runtime or data errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::binning::{BinningScheme, FeatureDim};
use crate::calibrate::{calibrate_dataset, fit_histogram, fit_isotonic, fit_platt, fit_temperature, Calibrator};
use crate::error::{Error, Result};
use crate::io::{
    read_calibrator, read_detections, split_dataset, write_calibrator, write_detections, write_report,
    write_reliability_csv, write_train_log_csv, CalibratorFile, ReportFile,
};
use crate::losses::{AuxLoss, BaseLoss, LossConfig};
use crate::metrics::{dece, ece, full_dece, reliability, Denominator, MetricReport};
use crate::synth::{distort, generate_calibrated, Distortion, FeatureSpec, LabelSampling, SynthConfig};
use crate::traindemo::{make_mixture_data, train, ToyClassifier, TrainConfig};
use crate::types::PredictionMode;

#[derive(Parser)]
#[command(
    name = "detcal",
    version,
    about = "Calibration metrics, post-hoc calibrators, and calibration-aware \
             training losses for multi-class detections"
)]
pub struct Cli {
    /// Seed for commands that draw random numbers or shuffle.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Confidence bins for metrics, diagrams, and histogram fitting.
    #[arg(long, global = true, default_value_t = 25)]
    bins: usize,

    /// Normalization for the full-vector metric.
    #[arg(long, global = true, value_enum, default_value_t = DenominatorArg::Predictions)]
    denominator: DenominatorArg,

    /// Output file; what it holds depends on the subcommand.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a calibrated synthetic detection file, optionally distorted.
    Simulate {
        /// Number of records.
        #[arg(long)]
        n: usize,
        /// Number of classes.
        #[arg(long, default_value_t = 3)]
        classes: usize,
        /// Spread of the underlying logits.
        #[arg(long, default_value_t = 2.0)]
        logit_scale: f64,
        /// How labels are drawn from the generated confidences.
        #[arg(long, value_enum, default_value_t = SamplingArg::SigmoidBernoulli)]
        sampling: SamplingArg,
        /// Geometric feature as `name:lo:hi`; repeat for more features.
        #[arg(long = "feature")]
        features: Vec<String>,
        /// Miscalibration to apply afterwards: `temperature:T`, `affine:A:B`,
        /// or `sharpen:K`.
        #[arg(long)]
        distort: Option<String>,
    },

    /// Shuffle a detection file into calibration and evaluation halves.
    Split {
        input: PathBuf,
        /// Where the calibration half goes.
        #[arg(long)]
        cal_output: PathBuf,
        /// Where the evaluation half goes.
        #[arg(long)]
        eval_output: PathBuf,
    },

    /// Fit a calibrator on a detection file.
    Fit {
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Fit against dominant-prediction correctness or all class entries.
        #[arg(long, value_enum, default_value_t = ModeArg::Dominant)]
        fit_mode: ModeArg,
    },

    /// Apply a fitted calibrator to a detection file.
    Apply {
        input: PathBuf,
        /// Calibrator file produced by `fit`.
        #[arg(long)]
        calibrator: PathBuf,
    },

    /// Compute calibration metrics for a detection file.
    Eval {
        input: PathBuf,
        /// Which metrics: the dominant-prediction one, the full-vector one,
        /// or both.
        #[arg(long, value_enum, default_value_t = EvalModeArg::Both)]
        mode: EvalModeArg,
        /// Extra binning dimension as `name:bins:lo:hi`; repeat for more.
        #[arg(long = "feature")]
        features: Vec<String>,
    },

    /// Reliability-diagram points for a detection file.
    Diagram {
        input: PathBuf,
        /// Bin dominant predictions only, or every class entry.
        #[arg(long, value_enum, default_value_t = ModeArg::Dominant)]
        mode: ModeArg,
    },

    /// Train a small classifier on a synthetic mixture and log calibration
    /// per epoch.
    TrainDemo {
        #[arg(long, default_value_t = 3)]
        classes: usize,
        /// Points in the mixture; half train, half held out.
        #[arg(long, default_value_t = 20000)]
        n: usize,
        /// Cluster spread; larger means harder and less separable.
        #[arg(long, default_value_t = 1.5)]
        overlap: f64,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        #[arg(long, value_enum, default_value_t = BaseArg::Focal)]
        base: BaseArg,
        /// Focusing exponent for the focal base loss.
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = AuxArg::FullDece)]
        aux: AuxArg,
        /// Weight of the auxiliary calibration loss.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Confidence bins used inside the training loss.
        #[arg(long, default_value_t = 15)]
        train_bins: usize,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Dominant,
    Full,
}

impl From<ModeArg> for PredictionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dominant => PredictionMode::Dominant,
            ModeArg::Full => PredictionMode::Full,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EvalModeArg {
    Dominant,
    Full,
    Both,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DenominatorArg {
    Predictions,
    Detections,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Predictions => Denominator::Predictions,
            DenominatorArg::Detections => Denominator::Detections,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Temperature,
    Platt,
    Isotonic,
    Histogram,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SamplingArg {
    SigmoidBernoulli,
    SoftmaxCategorical,
}

impl From<SamplingArg> for LabelSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::SigmoidBernoulli => LabelSampling::SigmoidBernoulli,
            SamplingArg::SoftmaxCategorical => LabelSampling::SoftmaxCategorical,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    Focal,
    CrossEntropy,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AuxArg {
    None,
    Dece,
    FullDece,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidScheme(_)
        | Error::FeatureMismatch(_)
        | Error::DimensionMismatch { .. }
        | Error::FileAccess { .. } => 1,
        _ => 2,
    }
}

/// Parses arguments, runs one subcommand, and returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn required_output(output: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    output
        .clone()
        .ok_or_else(|| Error::InvalidConfig(format!("this command writes {what}; pass --output <path>")))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { n, classes, logit_scale, sampling, features, distort: distort_spec } => {
            let out = required_output(&cli.output, "a detection file")?;
            cmd_simulate(n, classes, cli.seed, logit_scale, sampling, &features, distort_spec.as_deref(), &out)
        }
        Command::Split { input, cal_output, eval_output } => {
            cmd_split(&input, cli.seed, &cal_output, &eval_output)
        }
        Command::Fit { input, method, fit_mode } => {
            let out = required_output(&cli.output, "a calibrator file")?;
            cmd_fit(&input, method, fit_mode.into(), cli.bins, &out)
        }
        Command::Apply { input, calibrator } => {
            let out = required_output(&cli.output, "a detection file")?;
            cmd_apply(&input, &calibrator, &out)
        }
        Command::Eval { input, mode, features } => {
            cmd_eval(&input, mode, &features, cli.bins, cli.denominator.into(), cli.output.as_deref())
        }
        Command::Diagram { input, mode } => {
            cmd_diagram(&input, mode.into(), cli.bins, cli.output.as_deref())
        }
        Command::TrainDemo {
            classes,
            n,
            overlap,
            epochs,
            batch_size,
            learning_rate,
            base,
            gamma,
            aux,
            alpha,
            train_bins,
        } => cmd_train_demo(
            classes,
            n,
            overlap,
            cli.seed,
            epochs,
            batch_size,
            learning_rate,
            base,
            gamma,
            aux,
            alpha,
            train_bins,
            cli.output.as_deref(),
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    n: usize,
    classes: usize,
    seed: u64,
    logit_scale: f64,
    sampling: SamplingArg,
    feature_specs: &[String],
    distort_spec: Option<&str>,
    output: &Path,
) -> Result<()> {
    let features = feature_specs
        .iter()
        .map(|s| FeatureSpec::parse_spec(s))
        .collect::<Result<Vec<_>>>()?;
    let config = SynthConfig {
        n,
        num_classes: classes,
        seed,
        logit_scale,
        sampling: sampling.into(),
        features,
    };
    let mut data = generate_calibrated(&config)?;
    if let Some(spec) = distort_spec {
        let d = Distortion::parse_spec(spec)?;
        data = distort(&data, &d)?;
        println!("distorted with {spec}");
    }
    write_detections(&data, output)?;
    println!(
        "wrote {} records ({} classes) to {}",
        data.len(),
        data.num_classes(),
        output.display()
    );
    Ok(())
}

fn cmd_split(input: &Path, seed: u64, cal_output: &Path, eval_output: &Path) -> Result<()> {
    let data = read_detections(input)?;
    let (cal, eval) = split_dataset(&data, seed)?;
    write_detections(&cal, cal_output)?;
    write_detections(&eval, eval_output)?;
    println!(
        "split {} records into {} (calibration, {}) and {} (evaluation, {})",
        data.len(),
        cal.len(),
        cal_output.display(),
        eval.len(),
        eval_output.display()
    );
    Ok(())
}

fn cmd_fit(input: &Path, method: MethodArg, mode: PredictionMode, bins: usize, output: &Path) -> Result<()> {
    let data = read_detections(input)?;
    let calibrator = match method {
        MethodArg::Temperature => {
            if mode == PredictionMode::Full {
                return Err(Error::InvalidConfig(
                    "temperature fits dominant-prediction correctness only; drop --fit-mode full".into(),
                ));
            }
            let params = fit_temperature(&data)?;
            println!("temperature = {:.6}", params.temperature);
            Calibrator::Temperature(params)
        }
        MethodArg::Platt => {
            let fit = fit_platt(&data, mode)?;
            println!(
                "platt scale a = {:.6}, shift b = {:.6} ({} iterations)",
                fit.params.a, fit.params.b, fit.iterations
            );
            if !fit.converged {
                eprintln!("warning: gradient tolerance not reached; writing best parameters found");
            }
            Calibrator::Platt(fit.params)
        }
        MethodArg::Isotonic => {
            let map = fit_isotonic(&data, mode)?;
            println!("isotonic fit with {} segments", map.values().len());
            Calibrator::Isotonic(map)
        }
        MethodArg::Histogram => {
            let map = fit_histogram(&data, bins, mode)?;
            println!("histogram fit over {} bins", map.num_bins());
            Calibrator::Histogram(map)
        }
    };
    let file = CalibratorFile::new(mode, calibrator);
    write_calibrator(&file, output)?;
    println!("wrote {} calibrator to {}", file.calibrator.method(), output.display());
    Ok(())
}

fn cmd_apply(input: &Path, calibrator: &Path, output: &Path) -> Result<()> {
    let data = read_detections(input)?;
    let file = read_calibrator(calibrator)?;
    let calibrated = calibrate_dataset(&data, &file.calibrator)?;
    write_detections(&calibrated, output)?;
    println!(
        "applied {} calibrator to {} records, wrote {}",
        file.calibrator.method(),
        calibrated.len(),
        output.display()
    );
    Ok(())
}

fn build_scheme(bins: usize, feature_specs: &[String]) -> Result<BinningScheme> {
    let dims = feature_specs
        .iter()
        .map(|s| FeatureDim::parse_spec(s))
        .collect::<Result<Vec<_>>>()?;
    BinningScheme::new(bins, dims)
}

fn cmd_eval(
    input: &Path,
    mode: EvalModeArg,
    feature_specs: &[String],
    bins: usize,
    denominator: Denominator,
    output: Option<&Path>,
) -> Result<()> {
    let data = read_detections(input)?;
    let scheme = build_scheme(bins, feature_specs)?;
    let mut reports: Vec<MetricReport> = Vec::new();
    if mode == EvalModeArg::Dominant || mode == EvalModeArg::Both {
        if feature_specs.is_empty() {
            reports.push(ece(&data, bins)?);
        } else {
            reports.push(dece(&data, &scheme)?);
        }
    }
    if mode == EvalModeArg::Full || mode == EvalModeArg::Both {
        reports.push(full_dece(&data, &scheme, denominator)?);
    }

    println!(
        "{} records, {} classes, {} confidence bins ({} joint bins)",
        data.len(),
        data.num_classes(),
        bins,
        scheme.total_bins()
    );
    println!("{:<10} {:<9} {:<12} {}", "metric", "mode", "denominator", "value");
    for r in &reports {
        let denom = r.denominator.map_or("-".to_string(), |d| d.to_string());
        println!("{:<10} {:<9} {:<12} {:.6}", r.metric.to_string(), r.mode.to_string(), denom, r.value);
    }

    if let Some(path) = output {
        let file = ReportFile::new(input.display().to_string(), reports);
        write_report(&file, path)?;
        println!("wrote report to {}", path.display());
    }
    Ok(())
}

fn cmd_diagram(input: &Path, mode: PredictionMode, bins: usize, output: Option<&Path>) -> Result<()> {
    let data = read_detections(input)?;
    let points = reliability(&data, bins, mode)?;
    println!("{:<5} {:<8} {:<8} {:<16} {}", "bin", "center", "count", "mean_confidence", "positive_rate");
    for p in &points {
        println!(
            "{:<5} {:<8.4} {:<8} {:<16.6} {:.6}",
            p.bin, p.center, p.count, p.mean_confidence, p.positive_rate
        );
    }
    if let Some(path) = output {
        write_reliability_csv(&points, path)?;
        println!("wrote reliability CSV to {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train_demo(
    classes: usize,
    n: usize,
    overlap: f64,
    seed: u64,
    epochs: usize,
    batch_size: usize,
    learning_rate: f64,
    base: BaseArg,
    gamma: f64,
    aux: AuxArg,
    alpha: f64,
    train_bins: usize,
    output: Option<&Path>,
) -> Result<()> {
    let base = match base {
        BaseArg::Focal => BaseLoss::Focal { gamma },
        BaseArg::CrossEntropy => BaseLoss::CrossEntropy,
    };
    let aux = match aux {
        AuxArg::None => AuxLoss::None,
        AuxArg::Dece => AuxLoss::Dece,
        AuxArg::FullDece => AuxLoss::FullDece,
    };
    let config = TrainConfig {
        loss: LossConfig { base, aux, alpha, train_bins },
        epochs,
        batch_size,
        learning_rate,
        seed,
    };
    let data = make_mixture_data(classes, n, overlap, seed)?;
    let (train_half, holdout) = data.split_half();
    println!(
        "training on {} points, holding out {} (overlap {overlap}, seed {seed})",
        train_half.len(),
        holdout.len()
    );
    let clf = ToyClassifier::new(2, 32, classes, seed)?;
    let outcome = train(clf, &train_half, &holdout, &config)?;

    println!(
        "{:<6} {:<12} {:<12} {:<10} {:<10} {}",
        "epoch", "base", "aux", "accuracy", "ece", "full_dece"
    );
    for e in &outcome.log {
        println!(
            "{:<6} {:<12.6} {:<12.6} {:<10.4} {:<10.6} {:.6}",
            e.epoch, e.base_part, e.aux_part, e.holdout_accuracy, e.holdout_ece, e.holdout_full_dece
        );
    }
    let last = outcome.log.last().expect("at least one epoch");
    println!(
        "final: accuracy {:.4}, ece {:.6}, full_dece {:.6}",
        last.holdout_accuracy, last.holdout_ece, last.holdout_full_dece
    );
    if let Some(path) = output {
        write_train_log_csv(&outcome.log, path)?;
        println!("wrote per-epoch CSV to {}", path.display());
    }
    Ok(())
}
