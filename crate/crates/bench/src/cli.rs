//! Command-line grammar.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dualprec::Precision;
use dualprec_render::{BackendPreference, VariantKind};

/// Environment override for `--device-index`.
pub const DEVICE_INDEX_ENV: &str = "DPBENCH_DEVICE_INDEX";

#[derive(Debug, Parser)]
#[command(
    name = "dpbench",
    version,
    about = "Emulated versus native double precision: datasets, analysis and render benchmarks"
)]
pub struct Cli {
    /// TOML file whose `[subcommand]` tables pre-set flags; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Extract the points of a GLB mesh into CSV.
    Convert(ConvertArgs),
    /// Screen-space error of binary32 and df64 against binary64.
    Analyze(AnalyzeArgs),
    /// Render datasets offscreen with each pipeline variant and report timings.
    Bench(BenchArgs),
    /// Mandelbrot zoom study: images and coordinate-collapse ratios.
    Mandelbrot(MandelbrotArgs),
    /// Open an interactive window on a dataset.
    View(ViewArgs),
}

impl Command {
    pub const NAMES: [&'static str; 6] = [
        "generate",
        "convert",
        "analyze",
        "bench",
        "mandelbrot",
        "view",
    ];
}

/// A comma-separated list given as one flag value, so a later flag replaces it.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<T>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<T>, String>>()
            .and_then(|v| {
                if v.is_empty() {
                    Err("empty list".into())
                } else {
                    Ok(List(v))
                }
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Random2d,
    Mandelbulb,
    Julia,
    Menger,
    Sierpinski,
    /// The nine 3D benchmark datasets, one CSV each.
    Suite,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct GenerateArgs {
    pub generator: Generator,
    /// random2d: number of points.
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    /// random2d: RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iteration count [default: menger 3, mandelbulb 12, julia 32].
    #[arg(long)]
    pub iterations: Option<u32>,
    /// sierpinski: subdivision depth.
    #[arg(long, default_value_t = 5)]
    pub depth: u32,
    /// mandelbulb, julia: lattice samples per axis.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
    /// mandelbulb: exponent of the power map.
    #[arg(long, default_value_t = 8.0)]
    pub power: f64,
    /// menger: edge length of the root cube.
    #[arg(long, default_value_t = 1.0)]
    pub size: f64,
    /// menger: drop corners shared by neighbouring cubes.
    #[arg(long)]
    pub dedup: bool,
    /// suite: fraction of the full vertex counts, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Output CSV [default: <dataset name>.csv].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// suite: output directory.
    #[arg(long, default_value = "suite")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ConvertArgs {
    /// GLB file.
    pub input: PathBuf,
    /// Output CSV [default: input with a .csv extension].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StackKind {
    /// The identity MVP.
    Identity,
    /// A translation by (offset, offset, 0).
    Far,
    /// The viewer's framing camera for the dataset.
    Camera,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct AnalyzeArgs {
    /// Dataset (CSV, or GLB by extension).
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = StackKind::Identity)]
    pub stack: StackKind,
    /// Translation for `--stack far`.
    #[arg(long, default_value_t = 1e6)]
    pub offset: f64,
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    /// Error report CSV.
    #[arg(long, short, default_value = "analysis.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    /// Dataset files (CSV, or GLB by extension).
    pub datasets: Vec<PathBuf>,
    /// Also run the nine generated 3D datasets.
    #[arg(long)]
    pub suite: bool,
    /// Suite vertex counts are multiplied by this, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Comma-separated variants; rows are grouped in this order.
    #[arg(long, default_value = "emulated64,native64")]
    pub variants: List<VariantKind>,
    /// Frames per measurement; the median is reported.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    pub frames: u32,
    /// Report CSV.
    #[arg(long, short, default_value = "bench.csv")]
    pub out: PathBuf,
    /// Markdown tables [default: the report path with a .md extension].
    #[arg(long)]
    pub markdown: Option<PathBuf>,
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Offscreen rendering; bench never opens a window, so this is the default.
    #[arg(long)]
    pub headless: bool,
}

#[derive(Debug, Args)]
pub struct DeviceArgs {
    /// auto, vulkan or software.
    #[arg(long, default_value = "auto")]
    pub backend: BackendPreference,
    /// Physical device to use, bypassing the preference order.
    #[arg(long, env = DEVICE_INDEX_ENV)]
    pub device_index: Option<usize>,
    /// Directory of SPIR-V binaries and their SHA256SUMS.
    #[arg(long)]
    pub shader_dir: Option<PathBuf>,
    /// Enable the Vulkan validation layer.
    #[arg(long)]
    pub validation: bool,
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    /// Software backend only: report no shaderFloat64, as a device without fp64 would.
    #[arg(long)]
    pub no_fp64: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct MandelbrotArgs {
    #[arg(long, default_value_t = dualprec::precision::ZOOM_STUDY_CENTER.0)]
    pub center_re: f64,
    #[arg(long, default_value_t = dualprec::precision::ZOOM_STUDY_CENTER.1)]
    pub center_im: f64,
    /// Comma-separated half-widths of the view.
    #[arg(long, default_value = "1e-1,1e-4,1e-6")]
    pub zooms: List<f64>,
    /// Samples per axis.
    #[arg(long, default_value_t = dualprec::precision::ZOOM_STUDY_WIDTH)]
    pub width: usize,
    /// Iteration budget [default: 32 at zoom 1e-1, doubling per further decade].
    #[arg(long)]
    pub iterations: Option<u32>,
    /// Comma-separated: binary32, df64, binary64.
    #[arg(long, default_value = "binary32,binary64")]
    pub precisions: List<Precision>,
    #[arg(long, default_value = "mandelbrot")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct ViewArgs {
    /// Dataset (CSV, or GLB by extension).
    pub dataset: PathBuf,
    #[arg(long, default_value = "emulated64")]
    pub variant: VariantKind,
    /// Emulated variant multiplies in pairwise df64.
    #[arg(long)]
    pub pairwise: bool,
    #[arg(long, default_value_t = 1024)]
    pub width: u32,
    #[arg(long, default_value_t = 1024)]
    pub height: u32,
    #[arg(long, env = DEVICE_INDEX_ENV)]
    pub device_index: Option<usize>,
    #[arg(long)]
    pub shader_dir: Option<PathBuf>,
    #[arg(long)]
    pub validation: bool,
    /// Close after this many frames.
    #[arg(long)]
    pub max_frames: Option<u64>,
}
