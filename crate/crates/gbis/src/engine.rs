//! Strategy orchestration: three execution schedules over the same
//! mathematical pipeline, with per-stage wall-clock capture.
//!
//! * sequential — each stage runs to completion before the next starts.
//! * pipelined — a two-lane band pipeline: one lane smooths 32-row bands
//!   while the other turns finished bands into sorted edge runs; forest
//!   initialization happens concurrently. The sorted runs merge into the
//!   exact list the sequential sort produces, so the output is
//!   byte-identical to sequential.
//! * hybrid — tiles are segmented in parallel, stitched across seams, and
//!   finished with a whole-image minimum-size pass over the reassembled
//!   sorted edge list.
//!
//! Every strategy's labeling is invariant under the worker count.

use std::sync::mpsc;
use std::time::{Duration, Instant};

use crate::agglomerate::{
    extract_result, minsize_pass, threshold_pass, threshold_scan, SegParams, SegmentationResult,
    StageTimings,
};
use crate::forest::ComponentForest;
use crate::graph::{build_edge_row, build_edges, edge_cmp, merge_sorted_runs, Edge, EdgeList, VertexId};
use crate::imaging::{
    gaussian_kernel, gaussian_smooth, gaussian_smooth_with_workers, horizontal_pass_row,
    vertical_pass_row, RasterImage, SmoothingParams, CHANNELS,
};
use crate::tiling::{
    assemble_full_edges, boundary_edges, make_grid, seam_diagonal_edges, stitch,
    tile_edges_unsorted, TileGrid,
};
use crate::{Real, Result};

/// Rows per pipeline band. Fixed so the band structure (and therefore the
/// output) does not depend on the worker count.
const BAND_ROWS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Sequential,
    Pipelined,
    Hybrid,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Sequential => "sequential",
            StrategyKind::Pipelined => "pipelined",
            StrategyKind::Hybrid => "hybrid",
        }
    }
}

/// Which strategy to run and with what resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Tile count; meaningful for the hybrid strategy only.
    pub n: usize,
    /// Parallelism hint, at least 1.
    pub workers: usize,
    /// Palette seed carried alongside for rendering.
    pub seed: u64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Sequential,
            n: 4,
            workers: available_workers(),
            seed: 42,
        }
    }
}

/// Number of hardware threads, at least 1.
pub fn available_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Dispatches to the configured strategy.
pub fn run<T: Real>(
    img: &RasterImage<u8>,
    params: &SegParams<T>,
    cfg: &StrategyConfig,
) -> Result<SegmentationResult> {
    match cfg.kind {
        StrategyKind::Sequential => run_sequential(img, params),
        StrategyKind::Pipelined => run_pipelined(img, params, cfg.workers),
        StrategyKind::Hybrid => run_hybrid(img, params, cfg.n, cfg.workers),
    }
}

/// The reference schedule: smooth, build, sort, threshold, minsize,
/// extract, strictly in order and single-threaded.
pub fn run_sequential<T: Real>(
    img: &RasterImage<u8>,
    params: &SegParams<T>,
) -> Result<SegmentationResult> {
    params.validate()?;
    let smoothing = SmoothingParams::new(params.sigma)?;
    let total = Instant::now();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let smoothed: RasterImage<T> = gaussian_smooth(img, &smoothing);
    timings.smooth_ms = ms(t.elapsed());

    let t = Instant::now();
    let mut edges = build_edges(&smoothed);
    timings.build_ms = ms(t.elapsed());

    let t = Instant::now();
    edges.sort();
    timings.sort_ms = ms(t.elapsed());

    let t = Instant::now();
    let mut forest = ComponentForest::init(img.pixel_count(), params.k)?;
    threshold_pass(&mut forest, &edges, params.k)?;
    timings.threshold_ms = ms(t.elapsed());

    let t = Instant::now();
    minsize_pass(&mut forest, &edges, params.min_size);
    let mut result = extract_result(&mut forest, timings);
    result.timings.minsize_ms = ms(t.elapsed());
    result.timings.total_ms = ms(total.elapsed());
    Ok(result)
}

struct SmoothSpec<T> {
    radius: usize,
    taps: Vec<T>,
}

impl<T: Real> SmoothSpec<T> {
    fn for_sigma(sigma: f64) -> Option<Self> {
        (sigma > 0.0).then(|| {
            let (radius, taps) = gaussian_kernel(sigma);
            Self {
                radius,
                taps: taps.iter().map(|&t| crate::real_from_f64(t)).collect(),
            }
        })
    }
}

/// Smooths output rows `[start, end)` of the image. Row arithmetic is
/// identical to [`gaussian_smooth`], so banded results are bitwise equal.
fn smooth_band<T: Real>(
    img: &RasterImage<u8>,
    spec: Option<&SmoothSpec<T>>,
    start: usize,
    end: usize,
) -> Vec<T> {
    let w = img.width();
    let h = img.height();
    let stride = w * CHANNELS;
    match spec {
        None => {
            let mut out = Vec::with_capacity((end - start) * stride);
            for y in start..end {
                out.extend(
                    img.row(y)
                        .iter()
                        .map(|&s| T::from_u8(s).expect("u8 fits any float")),
                );
            }
            out
        }
        Some(spec) => {
            let lo = start.saturating_sub(spec.radius);
            let hi = (end - 1 + spec.radius).min(h - 1);
            let mut mid = vec![T::zero(); (hi - lo + 1) * stride];
            for (i, row) in mid.chunks_mut(stride).enumerate() {
                horizontal_pass_row(img, &spec.taps, spec.radius, lo + i, row);
            }
            let mut out = vec![T::zero(); (end - start) * stride];
            for (i, row) in out.chunks_mut(stride).enumerate() {
                vertical_pass_row(
                    |r| &mid[(r - lo) * stride..(r - lo + 1) * stride],
                    &spec.taps,
                    spec.radius,
                    start + i,
                    h,
                    row,
                );
            }
            out
        }
    }
}

/// Consumes smoothed bands in order, emitting sorted edge runs.
struct BandConsumer<T> {
    width: usize,
    height: usize,
    /// Smoothed row `next_edge_row - 1`... more precisely the last row of
    /// the previous band, needed by the first edge row of the next band.
    carry: Option<Vec<T>>,
    next_edge_row: usize,
    runs: Vec<Vec<Edge<T>>>,
    build_ms: f64,
    sort_ms: f64,
}

impl<T: Real> BandConsumer<T> {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            carry: None,
            next_edge_row: 0,
            runs: Vec::new(),
            build_ms: 0.0,
            sort_ms: 0.0,
        }
    }

    fn consume(&mut self, start: usize, end: usize, band: Vec<T>) {
        let stride = self.width * CHANNELS;
        let row_at = |y: usize| -> &[T] {
            if y < start {
                self.carry.as_deref().expect("carry row present")
            } else {
                &band[(y - start) * stride..(y - start + 1) * stride]
            }
        };

        let t = Instant::now();
        let mut edges = Vec::new();
        while self.next_edge_row + 1 <= end - 1 {
            let y = self.next_edge_row;
            build_edge_row(y, self.width, row_at(y), Some(row_at(y + 1)), &mut edges);
            self.next_edge_row += 1;
        }
        if end == self.height {
            let y = self.height - 1;
            build_edge_row(y, self.width, row_at(y), None, &mut edges);
            self.next_edge_row = self.height;
        }
        self.build_ms += ms(t.elapsed());

        let t = Instant::now();
        edges.sort_unstable_by(edge_cmp);
        self.sort_ms += ms(t.elapsed());
        self.runs.push(edges);

        self.carry = Some(band[band.len() - stride..].to_vec());
    }

    fn finish(mut self) -> (EdgeList<T>, f64, f64) {
        debug_assert_eq!(self.next_edge_row, self.height, "all edge rows built");
        let t = Instant::now();
        let merged = merge_sorted_runs(std::mem::take(&mut self.runs));
        self.sort_ms += ms(t.elapsed());
        (EdgeList::from_sorted(merged), self.build_ms, self.sort_ms)
    }
}

fn band_bounds(height: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..height.div_ceil(BAND_ROWS)).map(move |b| {
        let start = b * BAND_ROWS;
        (start, (start + BAND_ROWS).min(height))
    })
}

/// The overlapped schedule. One lane smooths bands while the other builds
/// and sorts their edges; forest initialization overlaps the first bands.
/// Agglomeration itself is a loop-carried scan and stays sequential, so
/// the labeling is byte-identical to [`run_sequential`].
///
/// The pipeline depth is fixed at two lanes; workers beyond 2 do not
/// change the schedule. With `workers == 1` the lanes run back to back
/// over the same fixed bands, producing the same output.
pub fn run_pipelined<T: Real>(
    img: &RasterImage<u8>,
    params: &SegParams<T>,
    workers: usize,
) -> Result<SegmentationResult> {
    params.validate()?;
    SmoothingParams::new(params.sigma)?;
    let spec = SmoothSpec::for_sigma(params.sigma);
    let h = img.height();
    let total = Instant::now();

    let mut consumer = BandConsumer::new(img.width(), h);
    let mut smooth_ms = 0.0;
    let mut init_ms = 0.0;
    let mut forest = None;

    if workers >= 2 {
        std::thread::scope(|scope| -> Result<()> {
            let (tx, rx) = mpsc::sync_channel::<(usize, usize, Vec<T>)>(4);
            let spec = spec.as_ref();
            let smoother = scope.spawn(move || {
                let mut busy = 0.0;
                for (start, end) in band_bounds(h) {
                    let t = Instant::now();
                    let band = smooth_band(img, spec, start, end);
                    busy += ms(t.elapsed());
                    if tx.send((start, end, band)).is_err() {
                        break;
                    }
                }
                busy
            });

            let t = Instant::now();
            forest = Some(ComponentForest::init(img.pixel_count(), params.k)?);
            init_ms = ms(t.elapsed());

            for (start, end, band) in rx {
                consumer.consume(start, end, band);
            }
            smooth_ms = smoother.join().expect("smoother lane panicked");
            Ok(())
        })?;
    } else {
        let t = Instant::now();
        forest = Some(ComponentForest::init(img.pixel_count(), params.k)?);
        init_ms = ms(t.elapsed());
        for (start, end) in band_bounds(h) {
            let t = Instant::now();
            let band = smooth_band(img, spec.as_ref(), start, end);
            smooth_ms += ms(t.elapsed());
            consumer.consume(start, end, band);
        }
    }

    let (edges, build_ms, sort_ms) = consumer.finish();
    let mut forest = forest.expect("forest initialized");

    let t = Instant::now();
    threshold_pass(&mut forest, &edges, params.k)?;
    let threshold_ms = init_ms + ms(t.elapsed());

    let t = Instant::now();
    minsize_pass(&mut forest, &edges, params.min_size);
    let mut result = extract_result(
        &mut forest,
        StageTimings {
            smooth_ms,
            build_ms,
            sort_ms,
            threshold_ms,
            ..StageTimings::default()
        },
    );
    result.timings.minsize_ms = ms(t.elapsed());
    result.timings.total_ms = ms(total.elapsed());
    Ok(result)
}

struct TileOutcome<T> {
    tile: usize,
    edges: Vec<Edge<T>>,
    forest: ComponentForest<T>,
    build_ms: f64,
    sort_ms: f64,
    threshold_ms: f64,
}

fn process_tile<T: Real>(
    smoothed: &RasterImage<T>,
    grid: &TileGrid,
    k: T,
    tile: usize,
) -> Result<TileOutcome<T>> {
    let rect = grid.rect(tile);
    let w = smoothed.width();

    let t = Instant::now();
    let mut edges = tile_edges_unsorted(smoothed, grid, tile);
    let build_ms = ms(t.elapsed());

    let t = Instant::now();
    edges.sort_unstable_by(edge_cmp);
    let sort_ms = ms(t.elapsed());

    // Re-index into tile-local vertex ids. The mapping is monotone within
    // the tile, so the list stays sorted and the scan order is unchanged.
    let t = Instant::now();
    let to_local = |v: VertexId| {
        let (x, y) = v.to_xy(w);
        VertexId(((y - rect.y0) * rect.width + (x - rect.x0)) as u32)
    };
    let local_edges: Vec<Edge<T>> = edges
        .iter()
        .map(|e| Edge {
            a: to_local(e.a),
            b: to_local(e.b),
            weight: e.weight,
        })
        .collect();
    let mut forest = ComponentForest::init(rect.pixel_count(), k)?;
    threshold_scan(&mut forest, &local_edges, k);
    let threshold_ms = ms(t.elapsed());

    Ok(TileOutcome {
        tile,
        edges,
        forest,
        build_ms,
        sort_ms,
        threshold_ms,
    })
}

/// The tile-parallel schedule: smooth once, segment every tile's interior
/// independently (each confined to its own vertex range), stitch the
/// seams horizontally then vertically, and run the minimum-size pass over
/// the whole image's sorted edge list. Deterministic for a fixed `n`
/// regardless of `workers`.
pub fn run_hybrid<T: Real>(
    img: &RasterImage<u8>,
    params: &SegParams<T>,
    n: usize,
    workers: usize,
) -> Result<SegmentationResult> {
    params.validate()?;
    let smoothing = SmoothingParams::new(params.sigma)?;
    let grid = make_grid(img.width(), img.height(), n)?;
    let workers = workers.max(1);
    let total = Instant::now();

    let t = Instant::now();
    let smoothed: RasterImage<T> = gaussian_smooth_with_workers(img, &smoothing, workers);
    let smooth_ms = ms(t.elapsed());

    // Parallel per-tile segmentation on disjoint vertex ranges.
    let tile_count = grid.tile_count();
    let threads = workers.min(tile_count);
    let mut outcomes: Vec<Option<TileOutcome<T>>> = (0..tile_count).map(|_| None).collect();
    if threads <= 1 {
        for tile in 0..tile_count {
            outcomes[tile] = Some(process_tile(&smoothed, &grid, params.k, tile)?);
        }
    } else {
        let results = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|lane| {
                    let smoothed = &smoothed;
                    let grid = &grid;
                    let k = params.k;
                    scope.spawn(move || {
                        let mut outs = Vec::new();
                        let mut tile = lane;
                        while tile < tile_count {
                            outs.push(process_tile(smoothed, grid, k, tile));
                            tile += threads;
                        }
                        outs
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("tile worker panicked"))
                .collect::<Vec<_>>()
        });
        for outcome in results {
            let outcome = outcome?;
            let tile = outcome.tile;
            outcomes[tile] = Some(outcome);
        }
    }

    let tile_build_ms = outcomes
        .iter()
        .map(|o| o.as_ref().unwrap().build_ms)
        .fold(0.0, f64::max);
    let tile_sort_ms = outcomes
        .iter()
        .map(|o| o.as_ref().unwrap().sort_ms)
        .fold(0.0, f64::max);
    let tile_threshold_ms = outcomes
        .iter()
        .map(|o| o.as_ref().unwrap().threshold_ms)
        .fold(0.0, f64::max);

    // Single-threaded phases: adopt tile results, stitch, reassemble.
    let t = Instant::now();
    let mut forest = ComponentForest::init(img.pixel_count(), params.k)?;
    let mut tile_lists = Vec::with_capacity(tile_count);
    for (tile, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome.expect("every tile processed");
        let ids = grid.rect(tile).global_ids(img.width());
        forest.transplant(&outcome.forest, &ids);
        tile_lists.push(outcome.edges);
    }
    let transplant_ms = ms(t.elapsed());

    let t = Instant::now();
    let boundary = boundary_edges(&smoothed, &grid);
    let diagonals = seam_diagonal_edges(&smoothed, &grid);
    let boundary_build_ms = ms(t.elapsed());

    let t = Instant::now();
    stitch(&mut forest, &boundary, params.k);
    let stitch_ms = ms(t.elapsed());

    let t = Instant::now();
    let full_edges = assemble_full_edges(tile_lists, &boundary, &diagonals);
    let merge_ms = ms(t.elapsed());

    let t = Instant::now();
    minsize_pass(&mut forest, &full_edges, params.min_size);
    let mut result = extract_result(
        &mut forest,
        StageTimings {
            smooth_ms,
            build_ms: tile_build_ms + boundary_build_ms,
            sort_ms: tile_sort_ms + merge_ms,
            threshold_ms: tile_threshold_ms + transplant_ms + stitch_ms,
            ..StageTimings::default()
        },
    );
    result.timings.minsize_ms = ms(t.elapsed());
    result.timings.total_ms = ms(total.elapsed());
    Ok(result)
}
