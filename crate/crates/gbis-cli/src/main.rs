//! `gbis` — segment PPM images, benchmark the execution strategies, and
//! compare rendered outputs.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O error, 4 configuration
//! error (tile count too large for the image).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gbis::engine::{available_workers, run, StrategyConfig, StrategyKind};
use gbis::imaging::{read_ppm, render_labels, write_ppm, Palette};
use gbis::{Image8, Params};
use gbis_cli::bench::{run_bench, BenchSpec};
use gbis_cli::compare::{compare_partitions, partition_of_image};
use gbis_cli::svg::bar_chart;

#[derive(Parser)]
#[command(name = "gbis", version, about = "Graph-based image segmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Segment a PPM image and write the recolored result
    Segment(SegmentArgs),
    /// Time strategies over images and write a CSV (optionally an SVG chart)
    Bench(BenchArgs),
    /// Compare two rendered segmentations (identical flag + Rand index)
    Compare(CompareArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Sequential,
    Pipelined,
    Hybrid,
}

impl From<StrategyArg> for StrategyKind {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Sequential => StrategyKind::Sequential,
            StrategyArg::Pipelined => StrategyKind::Pipelined,
            StrategyArg::Hybrid => StrategyKind::Hybrid,
        }
    }
}

#[derive(Args)]
struct SegmentArgs {
    /// Input image (binary PPM, P6)
    #[arg(long)]
    input: PathBuf,
    /// Output image (binary PPM, P6)
    #[arg(long)]
    output: PathBuf,
    /// Threshold constant; merge slack is k / component_size
    #[arg(long, default_value_t = 300.0)]
    k: f64,
    /// Minimum final component size
    #[arg(long = "min-size", default_value_t = 50)]
    min_size: usize,
    /// Gaussian pre-smoothing standard deviation in pixels
    #[arg(long, default_value_t = 0.8)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Sequential)]
    strategy: StrategyArg,
    /// Tile count for the hybrid strategy
    #[arg(long, default_value_t = 4)]
    tiles: usize,
    /// Worker threads (default: available parallelism, capped at --tiles
    /// for the hybrid strategy)
    #[arg(long)]
    workers: Option<usize>,
    /// Palette seed for the recoloring
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write component count and stage timings as JSON
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Input image; repeat for several
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Strategies to time
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [StrategyArg::Sequential, StrategyArg::Pipelined, StrategyArg::Hybrid])]
    strategies: Vec<StrategyArg>,
    /// Tile counts swept by the hybrid strategy
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    tiles: Vec<usize>,
    /// Repetitions per configuration
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// CSV report path
    #[arg(long)]
    csv: PathBuf,
    /// Optional SVG bar chart of median totals
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// First rendered segmentation (PPM)
    #[arg(long)]
    a: PathBuf,
    /// Second rendered segmentation (PPM)
    #[arg(long)]
    b: PathBuf,
}

/// An error carrying its process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<gbis::Error> for CliError {
    fn from(err: gbis::Error) -> Self {
        let code = match err {
            gbis::Error::TilesTooLarge { .. } => 4,
            gbis::Error::InvalidParameter(_) => 2,
            _ => 3,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

fn read_image(path: &Path) -> Result<Image8, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    read_ppm(&bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct TimingsJson {
    smooth: f64,
    build: f64,
    sort: f64,
    threshold: f64,
    minsize: f64,
    render: f64,
    total: f64,
}

#[derive(Serialize)]
struct StatsJson {
    component_count: usize,
    timings_ms: TimingsJson,
}

fn cmd_segment(args: SegmentArgs) -> Result<(), CliError> {
    let img = read_image(&args.input)?;
    let params = Params::new(args.k, args.min_size, args.sigma)?;
    let workers = args.workers.unwrap_or_else(|| match args.strategy {
        StrategyArg::Hybrid => available_workers().min(args.tiles.max(1)),
        _ => available_workers(),
    });
    let cfg = StrategyConfig {
        kind: args.strategy.into(),
        n: args.tiles,
        workers: workers.max(1),
        seed: args.seed,
    };

    let mut result = run(&img, &params, &cfg)?;
    let t = Instant::now();
    let palette = Palette::for_labels(cfg.seed, &result.labels);
    let rendered = render_labels(&result.labels, img.width(), img.height(), &palette);
    result.timings.render_ms = t.elapsed().as_secs_f64() * 1e3;
    result.timings.total_ms += result.timings.render_ms;

    write_file(&args.output, &write_ppm(&rendered))?;

    if let Some(stats_path) = args.stats {
        let t = &result.timings;
        let stats = StatsJson {
            component_count: result.component_count,
            timings_ms: TimingsJson {
                smooth: t.smooth_ms,
                build: t.build_ms,
                sort: t.sort_ms,
                threshold: t.threshold_ms,
                minsize: t.minsize_ms,
                render: t.render_ms,
                total: t.total_ms,
            },
        };
        let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
        write_file(&stats_path, json.as_bytes())?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let mut images = Vec::new();
    for path in &args.input {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        images.push((name, read_image(path)?));
    }
    let spec = BenchSpec {
        strategies: args.strategies.iter().map(|&s| s.into()).collect(),
        tiles: args.tiles.clone(),
        runs: args.runs.max(1),
        workers: args.workers.unwrap_or_else(available_workers).max(1),
        seed: 42,
        params: Params::default(),
    };
    let report = run_bench(&images, &spec)?;
    write_file(&args.csv, report.to_csv().as_bytes())?;
    if let Some(svg_path) = args.svg {
        let chart = bar_chart("median total per configuration", &report.median_totals());
        write_file(&svg_path, chart.as_bytes())?;
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let a = read_image(&args.a)?;
    let b = read_image(&args.b)?;
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(CliError::usage(format!(
            "dimension mismatch: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let report = compare_partitions(&partition_of_image(&a), &partition_of_image(&b));
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serialize")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Commands::Segment(args) => cmd_segment(args),
        Commands::Bench(args) => cmd_bench(args),
        Commands::Compare(args) => cmd_compare(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
