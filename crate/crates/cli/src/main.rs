//! `platewise`: masks in, intake estimates out.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "platewise", version, about = "Food intake estimation from segmentation masks")]
pub struct Cli {
    /// TOML pipeline configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Report formats (comma separated); each command has its own default.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Drop redundant and clipped frames from a session.
    Prep(PrepArgs),
    /// Feature table from session masks.
    Extract(ExtractArgs),
    /// Fit per-food area-to-weight ratios against weighed ground truth.
    CalibrateAwr(SessionArgs),
    /// Cross-validated learner comparison.
    TrainEval(TrainEvalArgs),
    /// Permutation importance of the feature groups.
    Importance(ImportanceArgs),
    /// Consumed weight per session and food, compared by device.
    ReportConsumed(ConsumedArgs),
    /// Camera classification from the plate aspect ratio.
    ViewAngle(ViewAngleArgs),
    /// Synthetic data with known ground truth.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Prep(_) => "prep",
            Command::Extract(_) => "extract",
            Command::CalibrateAwr(_) => "calibrate-awr",
            Command::TrainEval(_) => "train-eval",
            Command::Importance(_) => "importance",
            Command::ReportConsumed(_) => "report-consumed",
            Command::ViewAngle(_) => "view-angle",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SessionArgs {
    /// Session manifest (repeatable).
    #[arg(long = "manifest")]
    pub manifests: Vec<PathBuf>,
    /// Directory whose subdirectories each hold a manifest.json.
    #[arg(long)]
    pub sessions_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PrepArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Container-pixel threshold as a fraction of the frame.
    #[arg(long, conflicts_with = "np_threshold_px")]
    pub np_threshold_frac: Option<f64>,
    #[arg(long)]
    pub np_threshold_px: Option<u64>,
    /// Edge band width as a fraction of the shorter frame side.
    #[arg(long, conflicts_with = "edge_width_px")]
    pub edge_width_frac: Option<f64>,
    #[arg(long)]
    pub edge_width_px: Option<u64>,
    /// Largest tolerated number of container pixels in the edge band.
    #[arg(long)]
    pub edge_overlap: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub sessions: SessionArgs,
    /// AWR table (JSON); without it the ratios are calibrated from the sessions.
    #[arg(long)]
    pub awr: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainEvalArgs {
    /// Feature table with a weight_g column.
    #[arg(long)]
    pub features: PathBuf,
    /// Learners: rf, et, gb, mlp, svr, dt, ensemble.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    /// Feature subsets: frr, frr-ft, full.
    #[arg(long, value_delimiter = ',')]
    pub subsets: Vec<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Keep all rows of a session in one fold.
    #[arg(long)]
    pub group_by_session: bool,
    /// Also fit every learner on all rows and save it here.
    #[arg(long)]
    pub save_models: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value = "rf")]
    pub model: String,
    #[arg(long, default_value = "full")]
    pub subset: String,
    /// Share of rows held out for the test-split report.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Shuffles per feature group.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Append a pure-noise column as a diagnostic.
    #[arg(long)]
    pub noise_feature: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct ConsumedArgs {
    #[command(flatten)]
    pub sessions: SessionArgs,
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub awr: Option<PathBuf>,
    /// Manual estimates: session,food,estimated_consumed_g,assessor.
    #[arg(long)]
    pub manual: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ViewAngleArgs {
    /// CSV with columns par,device.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub sessions: SessionArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    Dataset,
    Sessions,
    ViewAngle,
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "dataset")]
    pub kind: SynthKind,
    /// Samples (dataset, view-angle) or sessions.
    #[arg(long)]
    pub n: Option<usize>,
    /// Relative weight noise for datasets.
    #[arg(long)]
    pub noise: Option<f64>,
}

/// A result that breaks an internal guarantee, as opposed to bad input.
#[derive(Debug)]
pub struct InvariantViolation(pub String);

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal invariant violated: {}", self.0)
    }
}

impl std::error::Error for InvariantViolation {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use platewise::regression::RegressionError;
    use platewise::synthgen::SynthError;
    for cause in err.chain() {
        if cause.is::<InvariantViolation>()
            || matches!(cause.downcast_ref(), Some(RegressionError::NonFinitePrediction))
            || matches!(cause.downcast_ref(), Some(SynthError::Extraction { .. }))
        {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match std::panic::catch_unwind(|| commands::run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(2),
    }
}
