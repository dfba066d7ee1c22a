//! Wall-clock benchmark harness: runs every requested configuration a
//! fixed number of times and reports per-stage milliseconds as CSV, one
//! row per run plus a median summary row per configuration.

use std::time::Instant;

use gbis::agglomerate::StageTimings;
use gbis::engine::{run, StrategyConfig, StrategyKind};
use gbis::imaging::{render_labels, Palette, RasterImage};
use gbis::{Params, Result};

pub const CSV_HEADER: &str =
    "image,width,height,strategy,n,workers,run,smooth_ms,build_ms,sort_ms,threshold_ms,minsize_ms,render_ms,total_ms";

/// One benchmark configuration: a strategy applied to one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub strategy: StrategyKind,
    pub n: usize,
    pub workers: usize,
}

impl BenchConfig {
    fn label(&self) -> String {
        match self.strategy {
            StrategyKind::Hybrid => format!("{} n={}", self.strategy.name(), self.n),
            _ => self.strategy.name().to_string(),
        }
    }
}

/// One completed run.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub config: BenchConfig,
    /// 1-based run index.
    pub run: usize,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// What to run: the cartesian product of images, strategies and (for the
/// hybrid strategy) tile counts.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub strategies: Vec<StrategyKind>,
    pub tiles: Vec<usize>,
    pub runs: usize,
    pub workers: usize,
    pub seed: u64,
    pub params: Params,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn rounded(t: &StageTimings) -> StageTimings {
    StageTimings {
        smooth_ms: round3(t.smooth_ms),
        build_ms: round3(t.build_ms),
        sort_ms: round3(t.sort_ms),
        threshold_ms: round3(t.threshold_ms),
        minsize_ms: round3(t.minsize_ms),
        render_ms: round3(t.render_ms),
        total_ms: round3(t.total_ms),
    }
}

/// Runs one configuration once, including rendering, and returns the
/// timings with the render stage and total filled in.
pub fn timed_run(
    img: &RasterImage<u8>,
    params: &Params,
    cfg: &StrategyConfig,
) -> Result<StageTimings> {
    let mut result = run(img, params, cfg)?;
    let t = Instant::now();
    let palette = Palette::for_labels(cfg.seed, &result.labels);
    let rendered = render_labels(&result.labels, img.width(), img.height(), &palette);
    std::hint::black_box(&rendered);
    result.timings.render_ms = t.elapsed().as_secs_f64() * 1e3;
    result.timings.total_ms += result.timings.render_ms;
    Ok(result.timings)
}

/// Executes the full spec. Configurations run one at a time so timings do
/// not contend with each other.
pub fn run_bench(images: &[(String, RasterImage<u8>)], spec: &BenchSpec) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for (name, img) in images {
        for &strategy in &spec.strategies {
            let tile_counts: Vec<usize> = match strategy {
                StrategyKind::Hybrid => spec.tiles.clone(),
                _ => vec![1],
            };
            for n in tile_counts {
                let workers = match strategy {
                    StrategyKind::Hybrid => spec.workers.min(n.max(1)).max(1),
                    _ => spec.workers,
                };
                let config = BenchConfig {
                    image: name.clone(),
                    width: img.width(),
                    height: img.height(),
                    strategy,
                    n,
                    workers,
                };
                let run_cfg = StrategyConfig {
                    kind: strategy,
                    n,
                    workers,
                    seed: spec.seed,
                };
                for run_idx in 1..=spec.runs {
                    let timings = timed_run(img, &spec.params, &run_cfg)?;
                    report.rows.push(BenchRow {
                        config: config.clone(),
                        run: run_idx,
                        timings: rounded(&timings),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Median of the recorded values; even counts average the middle two.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

impl BenchReport {
    /// Distinct configurations in first-appearance order.
    pub fn configs(&self) -> Vec<BenchConfig> {
        let mut configs: Vec<BenchConfig> = Vec::new();
        for row in &self.rows {
            if !configs.contains(&row.config) {
                configs.push(row.config.clone());
            }
        }
        configs
    }

    /// Per-stage medians over the completed runs of one configuration.
    pub fn median_timings(&self, config: &BenchConfig) -> StageTimings {
        let rows: Vec<&BenchRow> = self.rows.iter().filter(|r| &r.config == config).collect();
        let pick = |get: fn(&StageTimings) -> f64| {
            let mut values: Vec<f64> = rows.iter().map(|r| get(&r.timings)).collect();
            median(&mut values)
        };
        StageTimings {
            smooth_ms: pick(|t| t.smooth_ms),
            build_ms: pick(|t| t.build_ms),
            sort_ms: pick(|t| t.sort_ms),
            threshold_ms: pick(|t| t.threshold_ms),
            minsize_ms: pick(|t| t.minsize_ms),
            render_ms: pick(|t| t.render_ms),
            total_ms: pick(|t| t.total_ms),
        }
    }

    /// `(label, median total)` per configuration, chart-ready.
    pub fn median_totals(&self) -> Vec<(String, f64)> {
        self.configs()
            .iter()
            .map(|c| {
                let label = format!("{} {}", c.image, c.label());
                (label, self.median_timings(c).total_ms)
            })
            .collect()
    }

    /// The CSV document: header, run rows grouped per configuration, each
    /// group followed by its median row (`run` column = `median`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for config in self.configs() {
            for row in self.rows.iter().filter(|r| &r.config == &config) {
                out.push_str(&csv_row(&config, &row.run.to_string(), &row.timings, 3));
            }
            let medians = self.median_timings(&config);
            out.push_str(&csv_row(&config, "median", &medians, 4));
        }
        out
    }
}

fn csv_row(config: &BenchConfig, run: &str, t: &StageTimings, precision: usize) -> String {
    format!(
        "{},{},{},{},{},{},{},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$}\n",
        config.image,
        config.width,
        config.height,
        config.strategy.name(),
        config.n,
        config.workers,
        run,
        t.smooth_ms,
        t.build_ms,
        t.sort_ms,
        t.threshold_ms,
        t.minsize_ms,
        t.render_ms,
        t.total_ms,
        p = precision,
    )
}
