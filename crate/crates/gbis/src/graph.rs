//! The weighted pixel graph: vertices are pixels, edges connect
//! 8-neighbors, weights are RGB Euclidean distances on smoothed samples.
//!
//! Each undirected adjacency is emitted exactly once by scanning the
//! forward half of the 8-neighborhood (right, down, down-right, down-left),
//! so no deduplication pass is needed.

use std::cmp::Ordering;

use crate::imaging::RasterImage;
use crate::Real;

/// A pixel's position in row-major order: `index = y * width + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn from_xy(x: usize, y: usize, width: usize) -> Self {
        Self((y * width + x) as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn to_xy(self, width: usize) -> (usize, usize) {
        (self.index() % width, self.index() / width)
    }
}

/// An undirected weighted adjacency between two 8-neighboring pixels.
/// Construction guarantees `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub a: VertexId,
    pub b: VertexId,
    pub weight: T,
}

/// Sorting key: weight ascending, ties by `(a, b)` lexicographic. Distinct
/// edges never compare equal, so the order is strict and any comparison
/// sort is deterministic.
#[inline]
pub(crate) fn edge_cmp<T: Real>(x: &Edge<T>, y: &Edge<T>) -> Ordering {
    x.weight
        .partial_cmp(&y.weight)
        .expect("edge weights are finite")
        .then_with(|| x.a.cmp(&y.a))
        .then_with(|| x.b.cmp(&y.b))
}

/// A flat edge array plus a flag recording whether it is in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList<T> {
    edges: Vec<Edge<T>>,
    sorted: bool,
}

impl<T: Real> EdgeList<T> {
    /// Wraps edges whose order is unknown.
    pub fn from_edges(edges: Vec<Edge<T>>) -> Self {
        Self {
            edges,
            sorted: false,
        }
    }

    /// Wraps a list the caller guarantees to be in `edge_cmp` order.
    pub(crate) fn from_sorted(edges: Vec<Edge<T>>) -> Self {
        debug_assert!(edges.windows(2).all(|w| edge_cmp(&w[0], &w[1]) == Ordering::Less));
        Self {
            edges,
            sorted: true,
        }
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Sorts by weight, ties by `(a, b)`. Idempotent and deterministic
    /// regardless of the input permutation.
    pub fn sort(&mut self) {
        self.edges.sort_unstable_by(edge_cmp);
        self.sorted = true;
    }

    pub fn into_edges(self) -> Vec<Edge<T>> {
        self.edges
    }
}

/// The in-bounds forward neighbors of (x, y): right, down, down-right,
/// down-left. Over a whole-image scan every undirected 8-adjacency is
/// produced exactly once, and always with the smaller row-major id first.
pub fn forward_neighbors(
    x: usize,
    y: usize,
    width: usize,
    height: usize,
) -> impl Iterator<Item = (usize, usize)> {
    debug_assert!(x < width && y < height);
    let candidates = [
        (x as isize + 1, y as isize),
        (x as isize, y as isize + 1),
        (x as isize + 1, y as isize + 1),
        (x as isize - 1, y as isize + 1),
    ];
    candidates.into_iter().filter_map(move |(nx, ny)| {
        (nx >= 0 && (nx as usize) < width && (ny as usize) < height)
            .then_some((nx as usize, ny as usize))
    })
}

/// Euclidean distance between two RGB samples.
#[inline]
pub(crate) fn rgb_distance<T: Real>(pa: &[T], pb: &[T]) -> T {
    let dr = pa[0] - pb[0];
    let dg = pa[1] - pb[1];
    let db = pa[2] - pb[2];
    (dr * dr + dg * dg + db * db).sqrt()
}

/// Euclidean distance between two pixels in RGB space.
#[inline]
pub fn edge_weight<T: Real>(img: &RasterImage<T>, a: VertexId, b: VertexId) -> T {
    let pa = img.pixel_by_id(a);
    let pb = img.pixel_by_id(b);
    rgb_distance(&pa, &pb)
}

impl<T: Copy> RasterImage<T> {
    #[inline]
    pub fn pixel_by_id(&self, v: VertexId) -> [T; 3] {
        let base = v.index() * crate::imaging::CHANNELS;
        let d = self.data();
        [d[base], d[base + 1], d[base + 2]]
    }
}

/// Number of edges the forward-neighbor scan produces for a WxH image:
/// `4WH - 3W - 3H + 2`.
pub fn edge_count_closed_form(width: usize, height: usize) -> usize {
    assert!(width >= 1 && height >= 1);
    let (w, h) = (width as i64, height as i64);
    (4 * w * h - 3 * w - 3 * h + 2) as usize
}

/// Appends the forward-neighbor edges of pixel row `y`, given that row's
/// samples and the row below (`None` for the bottom row). Candidate order
/// per pixel matches [`forward_neighbors`].
pub(crate) fn build_edge_row<T: Real>(
    y: usize,
    width: usize,
    row: &[T],
    next_row: Option<&[T]>,
    out: &mut Vec<Edge<T>>,
) {
    use crate::imaging::CHANNELS;
    fn at<T>(r: &[T], x: usize) -> &[T] {
        &r[x * CHANNELS..x * CHANNELS + CHANNELS]
    }
    for x in 0..width {
        let a = VertexId::from_xy(x, y, width);
        let pa = at(row, x);
        if x + 1 < width {
            out.push(Edge {
                a,
                b: VertexId::from_xy(x + 1, y, width),
                weight: rgb_distance(pa, at(row, x + 1)),
            });
        }
        if let Some(below) = next_row {
            out.push(Edge {
                a,
                b: VertexId::from_xy(x, y + 1, width),
                weight: rgb_distance(pa, at(below, x)),
            });
            if x + 1 < width {
                out.push(Edge {
                    a,
                    b: VertexId::from_xy(x + 1, y + 1, width),
                    weight: rgb_distance(pa, at(below, x + 1)),
                });
            }
            if x > 0 {
                out.push(Edge {
                    a,
                    b: VertexId::from_xy(x - 1, y + 1, width),
                    weight: rgb_distance(pa, at(below, x - 1)),
                });
            }
        }
    }
}

/// Builds the full edge list in a fixed row-major scan order (unsorted).
pub fn build_edges<T: Real>(img: &RasterImage<T>) -> EdgeList<T> {
    let w = img.width();
    let h = img.height();
    let mut edges = Vec::with_capacity(edge_count_closed_form(w, h));
    for y in 0..h {
        let next = (y + 1 < h).then(|| img.row(y + 1));
        build_edge_row(y, w, img.row(y), next, &mut edges);
    }
    EdgeList::from_edges(edges)
}

/// Merges lists that are each in `edge_cmp` order into one sorted list.
/// Because the order is strict and total, the result is identical to
/// sorting the concatenation.
pub(crate) fn merge_sorted_runs<T: Real>(mut runs: Vec<Vec<Edge<T>>>) -> Vec<Edge<T>> {
    runs.retain(|r| !r.is_empty());
    if runs.is_empty() {
        return Vec::new();
    }
    while runs.len() > 1 {
        let mut next = Vec::with_capacity(runs.len().div_ceil(2));
        let mut iter = runs.into_iter();
        while let Some(left) = iter.next() {
            match iter.next() {
                Some(right) => next.push(merge_two(left, right)),
                None => next.push(left),
            }
        }
        runs = next;
    }
    runs.pop().unwrap()
}

fn merge_two<T: Real>(left: Vec<Edge<T>>, right: Vec<Edge<T>>) -> Vec<Edge<T>> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut li = left.into_iter().peekable();
    let mut ri = right.into_iter().peekable();
    loop {
        match (li.peek(), ri.peek()) {
            (Some(l), Some(r)) => {
                if edge_cmp(l, r) == Ordering::Greater {
                    out.push(ri.next().unwrap());
                } else {
                    out.push(li.next().unwrap());
                }
            }
            (Some(_), None) => {
                out.extend(li);
                break;
            }
            (None, _) => {
                out.extend(ri);
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn float_image(seed: u64, w: usize, h: usize) -> RasterImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RasterImage::from_fn(w, h, |_, _, _| rng.random_range(0.0..256.0))
    }

    /// Independent adjacency count: test all pixel pairs for 8-adjacency.
    fn count_adjacencies(w: usize, h: usize) -> usize {
        let mut count = 0;
        for i in 0..w * h {
            for j in (i + 1)..w * h {
                let (xi, yi) = (i % w, i / w);
                let (xj, yj) = (j % w, j / w);
                let dx = xi.abs_diff(xj);
                let dy = yi.abs_diff(yj);
                if dx <= 1 && dy <= 1 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn interior_pixel_has_four_neighbors() {
        assert_eq!(forward_neighbors(2, 2, 5, 5).count(), 4);
    }

    #[test]
    fn bottom_right_pixel_has_none() {
        assert_eq!(forward_neighbors(4, 4, 5, 5).count(), 0);
    }

    #[test]
    fn origin_of_two_by_two() {
        let got: Vec<_> = forward_neighbors(0, 0, 2, 2).collect();
        assert_eq!(got, vec![(1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn weight_of_three_four_five() {
        let img = RasterImage::new(2, 1, vec![0.0, 0.0, 0.0, 3.0, 4.0, 0.0]).unwrap();
        assert_eq!(edge_weight(&img, VertexId(0), VertexId(1)), 5.0);
    }

    #[test]
    fn weight_of_identical_pixels_is_zero() {
        let img = RasterImage::filled(2, 1, 9.0f64);
        assert_eq!(edge_weight(&img, VertexId(0), VertexId(1)), 0.0);
    }

    #[test]
    fn weight_of_full_range() {
        let img = RasterImage::new(2, 1, vec![255.0, 255.0, 255.0, 0.0, 0.0, 0.0]).unwrap();
        let w = edge_weight(&img, VertexId(0), VertexId(1));
        assert!((w - (3.0f64 * 255.0 * 255.0).sqrt()).abs() < 1e-9);
        assert!((w - 441.6729559).abs() < 1e-6);
    }

    #[test]
    fn single_pixel_has_no_edges() {
        let img = RasterImage::filled(1, 1, 0.0f64);
        assert!(build_edges(&img).is_empty());
    }

    #[test]
    fn two_by_two_has_six_edges() {
        let img = float_image(1, 2, 2);
        let list = build_edges(&img);
        assert_eq!(list.len(), 6);
        assert_eq!(list.len(), count_adjacencies(2, 2));
    }

    #[test]
    fn closed_form_matches_construction_at_128x72() {
        // 4*128*72 - 3*128 - 3*72 + 2 = 36266
        assert_eq!(edge_count_closed_form(128, 72), 36_266);
        let img = RasterImage::filled(128, 72, 0.0f64);
        assert_eq!(build_edges(&img).len(), 36_266);
    }

    #[test]
    fn no_duplicate_pairs_and_all_adjacent() {
        let img = float_image(2, 6, 5);
        let list = build_edges(&img);
        let mut seen = std::collections::HashSet::new();
        for e in list.edges() {
            assert!(e.a < e.b);
            let (xa, ya) = e.a.to_xy(6);
            let (xb, yb) = e.b.to_xy(6);
            assert!(xa.abs_diff(xb) <= 1 && ya.abs_diff(yb) <= 1);
            assert!(seen.insert((e.a, e.b)), "duplicate {:?}", (e.a, e.b));
            assert!(!seen.contains(&(e.b, e.a)));
        }
    }

    #[test]
    fn row_builder_matches_neighbor_scan() {
        let img = float_image(17, 7, 6);
        let list = build_edges(&img);
        let mut expected = Vec::new();
        for y in 0..6 {
            for x in 0..7 {
                let a = VertexId::from_xy(x, y, 7);
                for (nx, ny) in forward_neighbors(x, y, 7, 6) {
                    let b = VertexId::from_xy(nx, ny, 7);
                    expected.push(Edge {
                        a,
                        b,
                        weight: edge_weight(&img, a, b),
                    });
                }
            }
        }
        assert_eq!(list.edges(), &expected[..]);
    }

    #[test]
    fn sort_is_idempotent() {
        let mut list = build_edges(&float_image(3, 8, 6));
        list.sort();
        let once = list.clone();
        list.sort();
        assert_eq!(once, list);
    }

    #[test]
    fn equal_weights_fall_back_to_vertex_order() {
        let img = RasterImage::filled(3, 3, 5.0f64);
        let mut list = build_edges(&img);
        list.sort();
        let pairs: Vec<_> = list.edges().iter().map(|e| (e.a, e.b)).collect();
        let mut expected = pairs.clone();
        expected.sort();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn sort_matches_comparison_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let edges: Vec<Edge<f64>> = (0..1000)
            .map(|_| {
                let a = rng.random_range(0..500u32);
                let b = a + 1 + rng.random_range(0..10u32);
                Edge {
                    a: VertexId(a),
                    b: VertexId(b),
                    weight: f64::from(rng.random_range(0..50u32)),
                }
            })
            .collect();
        let mut list = EdgeList::from_edges(edges.clone());
        list.sort();

        // Stable sort on the same key is the oracle.
        let mut expected = edges.clone();
        expected.sort_by(edge_cmp);
        assert_eq!(list.edges(), &expected[..]);

        // Permutation check: multiset equality with the input.
        let key = |e: &Edge<f64>| (e.a, e.b, e.weight.to_bits());
        let mut in_keys: Vec<_> = edges.iter().map(key).collect();
        let mut out_keys: Vec<_> = list.edges().iter().map(key).collect();
        in_keys.sort_unstable();
        out_keys.sort_unstable();
        assert_eq!(in_keys, out_keys);
    }

    #[test]
    fn merge_runs_equals_full_sort() {
        let mut list = build_edges(&float_image(7, 9, 9));
        let edges = list.edges().to_vec();
        list.sort();
        let mut runs: Vec<Vec<Edge<f64>>> = edges.chunks(37).map(|c| c.to_vec()).collect();
        for run in &mut runs {
            run.sort_unstable_by(edge_cmp);
        }
        assert_eq!(merge_sorted_runs(runs), list.edges());
    }

    proptest! {
        #[test]
        fn closed_form_holds_for_all_sizes(w in 1usize..24, h in 1usize..24) {
            prop_assert_eq!(edge_count_closed_form(w, h), count_adjacencies(w, h));
            let img = RasterImage::filled(w, h, 0.0f64);
            prop_assert_eq!(build_edges(&img).len(), edge_count_closed_form(w, h));
        }

        #[test]
        fn weight_is_symmetric(seed in 0u64..1000) {
            let img = float_image(seed, 4, 3);
            for e in build_edges(&img).edges() {
                prop_assert_eq!(edge_weight(&img, e.a, e.b), edge_weight(&img, e.b, e.a));
            }
        }
    }
}
