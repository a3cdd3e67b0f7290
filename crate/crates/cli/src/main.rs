//! `cci`: batch frontend for the coverage-inequality pipeline.
//!
//! Exit codes: 0 on success, 1 on I/O failures, 2 on validation or usage
//! errors. All data outputs are byte-deterministic for fixed inputs and
//! flags; nothing in an output file depends on the clock.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

mod commands;

#[derive(Parser)]
#[command(name = "cci", version, about = "Cellular coverage inequality toolkit")]
struct Cli {
    /// Worker threads for grid computations (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print timing to standard error
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a rurality map from a city registry
    Rurality(RuralityArgs),
    /// Compute the CCI report for a rurality map and a coverage grid
    Index(IndexArgs),
    /// Write the coverage concentration curve as CSV
    Curve(CurveArgs),
    /// Collect report files into a trend CSV and SVG plot
    Trend(TrendArgs),
    /// Generate a deterministic synthetic scenario (and optional rollout)
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CrsArg {
    /// Projected coordinates in meters, Euclidean distances
    Planar,
    /// Longitude/latitude degrees, great-circle distances
    Geographic,
}

impl From<CrsArg> for cci_core::CrsMode {
    fn from(value: CrsArg) -> Self {
        match value {
            CrsArg::Planar => cci_core::CrsMode::PlanarMeters,
            CrsArg::Geographic => cci_core::CrsMode::GeographicDegrees,
        }
    }
}

#[derive(Args)]
struct RuralityArgs {
    /// City registry CSV with header name,population,x,y
    #[arg(long)]
    cities: PathBuf,

    /// ASCII grid whose geometry the output copies (values are ignored)
    #[arg(long, conflicts_with_all = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize"])]
    template: Option<PathBuf>,

    /// Grid width in cells (with --nrows/--cellsize, instead of --template)
    #[arg(long)]
    ncols: Option<usize>,

    /// Grid height in cells
    #[arg(long)]
    nrows: Option<usize>,

    /// X of the lower-left grid corner
    #[arg(long, default_value_t = 0.0)]
    xllcorner: f64,

    /// Y of the lower-left grid corner
    #[arg(long, default_value_t = 0.0)]
    yllcorner: f64,

    /// Cell edge length (meters when planar, degrees when geographic)
    #[arg(long)]
    cellsize: Option<f64>,

    /// Population thresholds, comma separated, strictly increasing
    /// [default: 200,1000,3000,30000,60000]
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<u64>>,

    /// Coordinate mode shared by the grid and the registry
    #[arg(long, value_enum, default_value_t = CrsArg::Planar)]
    crs: CrsArg,

    /// Mask grid: only cells with value 1 are computed, the rest output
    /// nodata
    #[arg(long)]
    mask: Option<PathBuf>,

    /// Output rurality ASCII grid
    #[arg(long)]
    out: PathBuf,

    /// Also write each per-threshold partial map into this directory
    #[arg(long)]
    partials_dir: Option<PathBuf>,
}

#[derive(Args)]
struct IndexArgs {
    /// Rurality ASCII grid (from the rurality subcommand)
    #[arg(long)]
    rurality: PathBuf,

    /// Binary coverage grid (1 covered, 0 uncovered, sentinel nodata)
    #[arg(long)]
    coverage: PathBuf,

    /// Optional mask grid restricting the evaluated domain
    #[arg(long)]
    mask: Option<PathBuf>,

    /// Optional population grid enabling the PCR field
    #[arg(long)]
    population: Option<PathBuf>,

    /// Output report JSON
    #[arg(long)]
    out: PathBuf,

    /// Also write the concentration curve CSV here
    #[arg(long)]
    curve: Option<PathBuf>,

    /// Epoch label recorded in the report
    #[arg(long, default_value = "unlabeled")]
    epoch_label: String,

    /// Network generation tag recorded in the report (e.g. 4G)
    #[arg(long)]
    generation_tag: Option<String>,

    /// Measurement sensitivity tag recorded in the report
    #[arg(long)]
    sensitivity_tag: Option<String>,
}

#[derive(Args)]
struct CurveArgs {
    /// Rurality ASCII grid
    #[arg(long)]
    rurality: PathBuf,

    /// Binary coverage grid
    #[arg(long)]
    coverage: PathBuf,

    /// Optional mask grid
    #[arg(long)]
    mask: Option<PathBuf>,

    /// Output curve CSV with header u,L
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrendArgs {
    /// Report JSON path; repeat once per epoch, paired with --label by
    /// position
    #[arg(long)]
    report: Vec<PathBuf>,

    /// Epoch label for the report in the same position
    #[arg(long)]
    label: Vec<String>,

    /// CSV manifest with header label,path; relative paths resolve
    /// against the manifest's directory
    #[arg(long, conflicts_with_all = ["report", "label"])]
    manifest: Option<PathBuf>,

    /// Output trend CSV
    #[arg(long)]
    csv: PathBuf,

    /// Output trend SVG plot
    #[arg(long)]
    svg: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    UrbanFirst,
    RuralFirst,
    UniformRandom,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario seed
    #[arg(long)]
    seed: u64,

    /// Grid width in cells
    #[arg(long)]
    ncols: usize,

    /// Grid height in cells
    #[arg(long)]
    nrows: usize,

    /// Number of cities to place
    #[arg(long)]
    cities: usize,

    /// Largest city population (at least 60000 so every default
    /// threshold is met)
    #[arg(long, default_value_t = 100_000)]
    max_population: u64,

    /// Directory receiving cities.csv, rurality.asc, and coverage grids
    #[arg(long)]
    out_dir: PathBuf,

    /// Also simulate a staged rollout with this many steps
    #[arg(long)]
    rollout_steps: Option<usize>,

    /// Rollout fill order
    #[arg(long, value_enum, default_value_t = StrategyArg::UrbanFirst)]
    strategy: StrategyArg,

    /// Seed for the uniform-random strategy
    #[arg(long, default_value_t = 0)]
    rollout_seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    let started = Instant::now();
    let (name, result) = match &cli.command {
        Command::Rurality(args) => ("rurality", commands::run_rurality(args)),
        Command::Index(args) => ("index", commands::run_index(args)),
        Command::Curve(args) => ("curve", commands::run_curve(args)),
        Command::Trend(args) => ("trend", commands::run_trend(args)),
        Command::Synth(args) => ("synth", commands::run_synth(args)),
    };
    match result {
        Ok(()) => {
            if cli.verbose {
                eprintln!("{name} finished in {:.3}s", started.elapsed().as_secs_f64());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 1 } else { 2 })
        }
    }
}
