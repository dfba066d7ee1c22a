//! Tile decomposition for the hybrid strategy: the image splits into a
//! near-square grid of `n` balanced tiles that are segmented independently,
//! then merged along the seams.
//!
//! Seam merging deliberately considers only the direct (non-diagonal)
//! neighbor across each seam: horizontal stitching compares the rightmost
//! column of the left tile with the leftmost column of the right tile, one
//! edge per row, and vertical stitching does the same with rows. The
//! diagonal adjacencies that cross a seam are skipped during stitching but
//! re-enter for the whole-image minimum-size pass.

use crate::agglomerate::threshold_scan;
use crate::forest::ComponentForest;
use crate::graph::{edge_weight, forward_neighbors, Edge, EdgeList, VertexId};
use crate::imaging::RasterImage;
use crate::{Error, Real, Result};

/// A tile's pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileRect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl TileRect {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.width && y >= self.y0 && y < self.y0 + self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Global vertex ids of the rect's pixels in local row-major order.
    pub fn global_ids(&self, image_width: usize) -> Vec<VertexId> {
        let mut ids = Vec::with_capacity(self.pixel_count());
        for y in self.y0..self.y0 + self.height {
            for x in self.x0..self.x0 + self.width {
                ids.push(VertexId::from_xy(x, y, image_width));
            }
        }
        ids
    }
}

/// A cols x rows decomposition whose tiles partition the image exactly and
/// whose widths (and heights) differ by at most one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileGrid {
    cols: usize,
    rows: usize,
    image_width: usize,
    image_height: usize,
    col_offsets: Vec<usize>,
    row_offsets: Vec<usize>,
}

impl TileGrid {
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn tile_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn image_width(&self) -> usize {
        self.image_width
    }

    pub fn image_height(&self) -> usize {
        self.image_height
    }

    /// Tile `t` in row-major tile order.
    pub fn rect(&self, t: usize) -> TileRect {
        assert!(t < self.tile_count());
        let tc = t % self.cols;
        let tr = t / self.cols;
        TileRect {
            x0: self.col_offsets[tc],
            y0: self.row_offsets[tr],
            width: self.col_offsets[tc + 1] - self.col_offsets[tc],
            height: self.row_offsets[tr + 1] - self.row_offsets[tr],
        }
    }

    pub fn rects(&self) -> impl Iterator<Item = TileRect> + '_ {
        (0..self.tile_count()).map(|t| self.rect(t))
    }

    fn col_of(&self, x: usize) -> usize {
        self.col_offsets[1..].partition_point(|&off| off <= x)
    }

    fn row_of(&self, y: usize) -> usize {
        self.row_offsets[1..].partition_point(|&off| off <= y)
    }

    /// Index of the tile containing pixel (x, y).
    pub fn tile_of(&self, x: usize, y: usize) -> usize {
        self.row_of(y) * self.cols + self.col_of(x)
    }
}

fn balanced_offsets(extent: usize, parts: usize) -> Vec<usize> {
    let base = extent / parts;
    let extra = extent % parts;
    (0..=parts).map(|i| i * base + i.min(extra)).collect()
}

/// Splits `n` into the cols x rows grid that is closest to square, wider
/// than tall. Tiles are balanced; for n > 1 every tile must be at least
/// 2x2 pixels, otherwise the request is rejected.
pub fn make_grid(width: usize, height: usize, n: usize) -> Result<TileGrid> {
    if width == 0 || height == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid needs positive dimensions and tile count, got {width}x{height} / {n}"
        )));
    }
    let mut rows = 1;
    for r in 1..=n {
        if r * r > n {
            break;
        }
        if n % r == 0 {
            rows = r;
        }
    }
    let cols = n / rows;
    if n > 1 && (width / cols < 2 || height / rows < 2) {
        return Err(Error::TilesTooLarge { n, width, height });
    }
    Ok(TileGrid {
        cols,
        rows,
        image_width: width,
        image_height: height,
        col_offsets: balanced_offsets(width, cols),
        row_offsets: balanced_offsets(height, rows),
    })
}

/// Forward-neighbor edges whose endpoints both lie inside tile `t`, with
/// global vertex ids, in the same row-major scan order as [`build_edges`].
pub(crate) fn tile_edges_unsorted<T: Real>(
    img: &RasterImage<T>,
    grid: &TileGrid,
    t: usize,
) -> Vec<Edge<T>> {
    let rect = grid.rect(t);
    let w = img.width();
    let h = img.height();
    let mut edges = Vec::new();
    for y in rect.y0..rect.y0 + rect.height {
        for x in rect.x0..rect.x0 + rect.width {
            let a = VertexId::from_xy(x, y, w);
            for (nx, ny) in forward_neighbors(x, y, w, h) {
                if rect.contains(nx, ny) {
                    let b = VertexId::from_xy(nx, ny, w);
                    edges.push(Edge {
                        a,
                        b,
                        weight: edge_weight(img, a, b),
                    });
                }
            }
        }
    }
    edges
}

/// Sorted edge list internal to tile `t`.
pub fn tile_edges<T: Real>(img: &RasterImage<T>, grid: &TileGrid, t: usize) -> EdgeList<T> {
    let mut list = EdgeList::from_edges(tile_edges_unsorted(img, grid, t));
    list.sort();
    list
}

/// The direct seam-crossing edges, grouped by seam orientation. Edges from
/// all parallel seams of one orientation form a single sorted stream.
#[derive(Debug, Clone)]
pub struct BoundaryEdges<T> {
    /// Right-neighbor pairs crossing the vertical seams.
    pub horizontal: EdgeList<T>,
    /// Down-neighbor pairs crossing the horizontal seams.
    pub vertical: EdgeList<T>,
}

pub fn boundary_edges<T: Real>(img: &RasterImage<T>, grid: &TileGrid) -> BoundaryEdges<T> {
    let w = img.width();
    let h = img.height();

    let mut horizontal = Vec::new();
    for seam_col in 1..grid.cols() {
        let x = grid.col_offsets[seam_col] - 1;
        for y in 0..h {
            let a = VertexId::from_xy(x, y, w);
            let b = VertexId::from_xy(x + 1, y, w);
            horizontal.push(Edge {
                a,
                b,
                weight: edge_weight(img, a, b),
            });
        }
    }

    let mut vertical = Vec::new();
    for seam_row in 1..grid.rows() {
        let y = grid.row_offsets[seam_row] - 1;
        for x in 0..w {
            let a = VertexId::from_xy(x, y, w);
            let b = VertexId::from_xy(x, y + 1, w);
            vertical.push(Edge {
                a,
                b,
                weight: edge_weight(img, a, b),
            });
        }
    }

    let mut horizontal = EdgeList::from_edges(horizontal);
    horizontal.sort();
    let mut vertical = EdgeList::from_edges(vertical);
    vertical.sort();
    BoundaryEdges {
        horizontal,
        vertical,
    }
}

/// Diagonal adjacencies whose endpoints lie in different tiles. These are
/// skipped during stitching but belong to the whole-image edge set, so the
/// minimum-size pass needs them.
pub fn seam_diagonal_edges<T: Real>(img: &RasterImage<T>, grid: &TileGrid) -> EdgeList<T> {
    let w = img.width();
    let h = img.height();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let home = grid.tile_of(x, y);
            for (nx, ny) in forward_neighbors(x, y, w, h) {
                if nx == x || ny == y {
                    continue; // direct neighbor, not a diagonal
                }
                if grid.tile_of(nx, ny) != home {
                    let a = VertexId::from_xy(x, y, w);
                    let b = VertexId::from_xy(nx, ny, w);
                    edges.push(Edge {
                        a,
                        b,
                        weight: edge_weight(img, a, b),
                    });
                }
            }
        }
    }
    let mut list = EdgeList::from_edges(edges);
    list.sort();
    list
}

/// Merges tile segmentations across seams with the same predicate and
/// threshold update as the threshold pass: all horizontal seam edges first,
/// then all vertical ones. Component sizes and thresholds carry over from
/// the tile passes.
pub fn stitch<T: Real>(forest: &mut ComponentForest<T>, boundary: &BoundaryEdges<T>, k: T) {
    threshold_scan(forest, boundary.horizontal.edges(), k);
    threshold_scan(forest, boundary.vertical.edges(), k);
}

/// Convenience for tests and the hybrid engine: the full sorted edge list
/// reassembled from per-tile lists plus the seam groups.
pub(crate) fn assemble_full_edges<T: Real>(
    tile_lists: Vec<Vec<Edge<T>>>,
    boundary: &BoundaryEdges<T>,
    diagonals: &EdgeList<T>,
) -> EdgeList<T> {
    let mut runs = tile_lists;
    runs.push(boundary.horizontal.edges().to_vec());
    runs.push(boundary.vertical.edges().to_vec());
    runs.push(diagonals.edges().to_vec());
    EdgeList::from_sorted(crate::graph::merge_sorted_runs(runs))
}
