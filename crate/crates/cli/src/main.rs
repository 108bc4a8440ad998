//! `fillseg` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fillseg_core::bitplane::PlaneSelection;
use fillseg_core::emit::Format;
use fillseg_core::pipeline::{PipelineConfig, ThresholdMode, DEFAULT_MIN_REGION_PX, DEFAULT_SE_RADIUS};
use fillseg_core::regions::{Connectivity, DEFAULT_PIXEL_AREA_MM2};

/// Segment radiopaque dental fillings in panoramic radiographs.
#[derive(Debug, Parser)]
#[command(name = "fillseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one image; writes <stem>.mask.png and <stem>.report.json.
    Segment {
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the eight bit planes and the kept-plane reconstruction.
    Planes {
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "7,8")]
        keep_planes: PlaneSelection,
    },
    /// Run every registered method and print per-method mean areas.
    Compare {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Print one row per image and method instead of the means table.
        #[arg(long)]
        per_image: bool,
    },
    /// Compare report areas against a CSV of manual areas (image,manual_mm2).
    Evaluate {
        reports: PathBuf,
        ground_truth: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Directory of ground-truth masks named <image>.mask.png or
        /// <image>.pgm; adds a Dice column.
        #[arg(long)]
        gt_masks: Option<PathBuf>,
    },
    /// Segment many images (files or directories) in input order.
    Batch {
        inputs: Vec<PathBuf>,
        /// Generate N synthetic phantoms into --out and include them.
        #[arg(long, value_name = "N")]
        synth: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Registered segmentation method.
    #[arg(long, default_value = "bitplane")]
    method: String,
    /// Also write intermediate stage images.
    #[arg(long)]
    dump_stages: bool,
    /// `csv` additionally writes <stem>.regions.csv.
    #[arg(long, default_value = "json")]
    format: Format,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = DEFAULT_SE_RADIUS)]
    se_radius: usize,
    #[arg(long, default_value = "7,8")]
    keep_planes: PlaneSelection,
    /// Integer in 0..=255 or `auto` (Otsu).
    #[arg(long, default_value = "auto")]
    threshold: ThresholdMode,
    #[arg(long, default_value = "8")]
    connectivity: Connectivity,
    #[arg(long, default_value_t = DEFAULT_MIN_REGION_PX)]
    min_region_px: u64,
    /// Area of one pixel in mm².
    #[arg(long, default_value_t = DEFAULT_PIXEL_AREA_MM2)]
    pixel_area: f64,
    #[arg(long, default_value_t = fillseg_core::baselines::DEFAULT_K)]
    kmeans_k: usize,
}

impl From<&ConfigArgs> for PipelineConfig {
    fn from(a: &ConfigArgs) -> Self {
        PipelineConfig {
            se_radius: a.se_radius,
            keep_planes: a.keep_planes,
            threshold_mode: a.threshold,
            connectivity: a.connectivity,
            min_region_px: a.min_region_px,
            pixel_area_mm2: a.pixel_area,
            kmeans_k: a.kmeans_k,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_INPUT)
        }
    }
}
