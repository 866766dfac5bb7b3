//! Command-line front end for the holoalign dataset pipeline.
//!
//! [`run`] takes an argv and returns the process exit status, which keeps
//! every subcommand callable from tests.

mod commands;
pub mod config;
pub mod error;
mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holoalign_core::dataset::ExpansionMode;
use holoalign_core::eval::ApMethod;
use holoalign_core::registration::Interpolation;

pub use config::PipelineConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "holoalign", version, about = "Register, tile, label and score cross-modality microscopy datasets")]
pub struct Cli {
    /// Pipeline config (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every randomized stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for per-image stages (0 = all cores).
    #[arg(long, global = true, env = "HOLOALIGN_JOBS")]
    pub jobs: Option<usize>,

    /// Where to write the machine-readable run summary.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a similarity transform from a point-pair CSV.
    Register(RegisterArgs),
    /// Resample an image through a transform into a new frame.
    Warp(WarpArgs),
    /// Carry labels into the aligned frame, optionally expanding them.
    Propagate(PropagateArgs),
    /// Cut an image and its labels into a tile grid.
    Tile(TileArgs),
    /// Cut one classification crop per labelled box.
    Crops(CropsArgs),
    /// Exclude tiles with too much pure-black area.
    Screen(ScreenArgs),
    /// Grow label boxes about their centres.
    Expand(ExpandArgs),
    /// Merge auto labels into manual labels.
    Merge(MergeArgs),
    /// Stratified train/validation/test split of labelled items.
    Split(SplitArgs),
    /// Inverse-frequency class weights.
    Weights(WeightsArgs),
    /// Seeded augmentation of labelled images.
    Augment(AugmentArgs),
    /// Score detections (mAP50) or classifications (accuracy).
    Evaluate(EvaluateArgs),
    /// Dataset arithmetic and tables.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpArg {
    Nearest,
    Bilinear,
}

impl From<InterpArg> for Interpolation {
    fn from(v: InterpArg) -> Self {
        match v {
            InterpArg::Nearest => Interpolation::Nearest,
            InterpArg::Bilinear => Interpolation::Bilinear,
        }
    }
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub transform: PathBuf,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Take the output frame size from this image.
    #[arg(long, conflicts_with_all = ["width", "height"])]
    pub like: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub interpolation: Option<InterpArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Manual,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Area,
    Side,
}

impl From<ModeArg> for ExpansionMode {
    fn from(v: ModeArg) -> Self {
        match v {
            ModeArg::Area => ExpansionMode::Area,
            ModeArg::Side => ExpansionMode::Side,
        }
    }
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    /// Normalized labels drawn on the source image.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "manual")]
    pub source: SourceArg,
    /// Map boxes through this transform instead of copying them.
    #[arg(long, requires_all = ["src_size", "dst_size"])]
    pub transform: Option<PathBuf>,
    /// Source frame as WIDTHxHEIGHT.
    #[arg(long)]
    pub src_size: Option<String>,
    /// Destination frame as WIDTHxHEIGHT.
    #[arg(long)]
    pub dst_size: Option<String>,
    #[arg(long)]
    pub expansion_factor: Option<f64>,
    #[arg(long, value_enum)]
    pub expansion_mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct TileArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "manual")]
    pub source: SourceArg,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Stem used in tile names; defaults to the image's file stem.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub tile_size: Option<usize>,
    #[arg(long)]
    pub keep_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CropsArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub crop_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Directory of tile PNGs.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Receives `kept.txt` and `excluded.txt`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "manual")]
    pub source: SourceArg,
    #[arg(long)]
    pub factor: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub manual: PathBuf,
    #[arg(long)]
    pub auto: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub iou: Option<f64>,
    /// Assign this species to every unlabelled box after merging.
    #[arg(long)]
    pub species: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Directory of label files; each file is one item.
    #[arg(long)]
    pub labels_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Three comma-separated ratios.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Comma-separated per-class counts.
    #[arg(long, value_delimiter = ',', conflicts_with = "labels_dir")]
    pub counts: Option<Vec<usize>>,
    /// Count instances from the label files in this directory.
    #[arg(long)]
    pub labels_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Detection,
    Classification,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Directory of PNG images with sibling label files.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "detection")]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 1)]
    pub draws: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ApArg {
    AllPoint,
    ElevenPoint,
}

impl From<ApArg> for ApMethod {
    fn from(v: ApArg) -> Self {
        match v {
            ApArg::AllPoint => ApMethod::AllPoint,
            ApArg::ElevenPoint => ApMethod::ElevenPoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth label files (detection mode).
    #[arg(long, requires = "det_dir", conflicts_with = "pairs")]
    pub gt_dir: Option<PathBuf>,
    /// Detection files, 6-field lines, matched to ground truth by stem.
    #[arg(long)]
    pub det_dir: Option<PathBuf>,
    /// CSV with `truth,pred` columns (classification mode).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, default_value_t = holoalign_core::eval::MAP_IOU)]
    pub iou: f64,
    #[arg(long, value_enum, default_value = "all-point")]
    pub ap_method: ApArg,
    /// Receives `eval.json` and `eval.txt`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Expansion factors from `BASELINE:EXPANDED` pairs or a manifest.
    Factors {
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Instance and split tables from a manifest.
    Tables {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Ratio between two scores or two evaluation results.
    Compare {
        #[arg(long, allow_hyphen_values = true)]
        before: String,
        #[arg(long, allow_hyphen_values = true)]
        after: String,
    },
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns 0 on success, 2 on usage errors and 1 on any other failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
