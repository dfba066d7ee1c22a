//! The two agglomeration passes over the weight-sorted edge list.
//!
//! The threshold pass merges two components when the current edge weight is
//! within both components' merge budgets (stored internal difference plus
//! the size-dependent slack `k / |C|`). Because edges arrive in
//! non-decreasing order, the current edge weight is simultaneously the
//! minimum weight connecting the two components and, after a merge, the
//! largest weight in the merged component's minimum spanning tree — so the
//! budget update is simply `w + k / merged_size`.
//!
//! The size pass then absorbs every component smaller than `min_size` into
//! a neighbor, scanning the same sorted list.

use crate::forest::ComponentForest;
use crate::graph::{Edge, EdgeList, VertexId};
use crate::{real_from_f64, real_from_usize, Error, Real, Result};

/// User-facing segmentation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegParams<T> {
    /// Threshold constant: slack is `k / |C|`, so larger k merges more.
    pub k: T,
    /// Minimum component size enforced by the second pass.
    pub min_size: usize,
    /// Gaussian pre-smoothing standard deviation in pixels.
    pub sigma: f64,
}

impl<T: Real> SegParams<T> {
    pub fn new(k: T, min_size: usize, sigma: f64) -> Result<Self> {
        let params = Self { k, min_size, sigma };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || self.k < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "k must be finite and non-negative, got {:?}",
                self.k
            )));
        }
        if self.min_size == 0 {
            return Err(Error::InvalidParameter(
                "min_size must be at least 1".into(),
            ));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

impl<T: Real> Default for SegParams<T> {
    fn default() -> Self {
        Self {
            k: real_from_f64(300.0),
            min_size: 50,
            sigma: 0.8,
        }
    }
}

/// Wall-clock milliseconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub smooth_ms: f64,
    pub build_ms: f64,
    pub sort_ms: f64,
    pub threshold_ms: f64,
    pub minsize_ms: f64,
    pub render_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    pub const STAGE_NAMES: [&'static str; 6] =
        ["smooth", "build", "sort", "threshold", "minsize", "render"];

    pub fn stages(&self) -> [f64; 6] {
        [
            self.smooth_ms,
            self.build_ms,
            self.sort_ms,
            self.threshold_ms,
            self.minsize_ms,
            self.render_ms,
        ]
    }

    pub fn max_stage(&self) -> f64 {
        self.stages().into_iter().fold(0.0, f64::max)
    }

    pub fn stage_sum(&self) -> f64 {
        self.stages().into_iter().sum()
    }
}

/// Final per-pixel labeling plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    /// Root label per pixel, fully path-compressed: `labels[v] == labels[labels[v]]`.
    pub labels: Vec<u32>,
    pub component_count: usize,
    pub timings: StageTimings,
}

/// Threshold-based agglomeration over a sorted edge list.
///
/// `k` is the slack constant; callers normally pass `forest.k()`.
pub fn threshold_pass<T: Real>(
    forest: &mut ComponentForest<T>,
    edges: &EdgeList<T>,
    k: T,
) -> Result<()> {
    if !edges.is_sorted() {
        return Err(Error::UnsortedEdges);
    }
    threshold_scan(forest, edges.edges(), k);
    Ok(())
}

/// The scan shared by the threshold pass and seam stitching. `edges` must
/// be in sorted order.
pub(crate) fn threshold_scan<T: Real>(forest: &mut ComponentForest<T>, edges: &[Edge<T>], k: T) {
    threshold_scan_with(forest, edges, k, |_| {});
}

pub(crate) fn threshold_scan_with<T: Real>(
    forest: &mut ComponentForest<T>,
    edges: &[Edge<T>],
    k: T,
    mut on_merge: impl FnMut(&Edge<T>),
) {
    for edge in edges {
        let ra = forest.find(edge.a);
        let rb = forest.find(edge.b);
        if ra == rb {
            continue;
        }
        let budget = forest
            .threshold_of_root(ra)
            .min(forest.threshold_of_root(rb));
        if edge.weight <= budget {
            let merged_size = forest.size_of_root(ra) + forest.size_of_root(rb);
            let new_threshold = edge.weight + k / real_from_usize::<T>(merged_size as usize);
            forest
                .join(ra, rb, new_threshold)
                .expect("find returned two distinct roots");
            on_merge(edge);
        }
    }
}

/// Size-based agglomeration: merges across any edge whose two components
/// are distinct and at least one of them is smaller than `min_size`. The
/// surviving root's threshold is carried through unchanged (it has no
/// meaning after this pass).
pub fn minsize_pass<T: Real>(
    forest: &mut ComponentForest<T>,
    edges: &EdgeList<T>,
    min_size: usize,
) {
    debug_assert!(edges.is_sorted(), "minsize pass expects a sorted edge list");
    let min_size = min_size as u32;
    for edge in edges.edges() {
        let ra = forest.find(edge.a);
        let rb = forest.find(edge.b);
        if ra == rb {
            continue;
        }
        if forest.size_of_root(ra) < min_size || forest.size_of_root(rb) < min_size {
            // join keeps the higher-ranked root (ties go to ra); carry that
            // root's threshold so the stored value merely survives.
            let carried = if forest.rank_of_root(ra) >= forest.rank_of_root(rb) {
                forest.threshold_of_root(ra)
            } else {
                forest.threshold_of_root(rb)
            };
            forest
                .join(ra, rb, carried)
                .expect("find returned two distinct roots");
        }
    }
}

/// Flattens the forest into per-pixel root labels.
pub fn extract_result<T: Real>(
    forest: &mut ComponentForest<T>,
    timings: StageTimings,
) -> SegmentationResult {
    let labels: Vec<u32> = (0..forest.len() as u32)
        .map(|v| forest.find(VertexId(v)).0)
        .collect();
    SegmentationResult {
        component_count: forest.component_count(),
        labels,
        timings,
    }
}

/// Renumbers labels by first occurrence, giving a canonical form under
/// which two labelings are equal iff they induce the same partition.
pub fn canonical_labels(labels: &[u32]) -> Vec<u32> {
    let mut remap = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = remap.len() as u32;
            *remap.entry(l).or_insert(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_edges;
    use crate::imaging::RasterImage;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    fn segment_edges(
        img: &RasterImage<f64>,
        k: f64,
        min_size: usize,
    ) -> (ComponentForest<f64>, EdgeList<f64>) {
        let mut edges = build_edges(img);
        edges.sort();
        let mut forest = ComponentForest::init(img.pixel_count(), k).unwrap();
        threshold_pass(&mut forest, &edges, k).unwrap();
        minsize_pass(&mut forest, &edges, min_size);
        (forest, edges)
    }

    fn random_float_image(seed: u64, w: usize, h: usize) -> RasterImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RasterImage::from_fn(w, h, |_, _, _| f64::from(rng.random_range(0u8..=255)))
    }

    /// Largest MST edge weight of the induced subgraph on `vertices`,
    /// computed by an independent Kruskal with its own map-based DSU.
    fn max_mst_edge(vertices: &HashSet<u32>, sorted: &EdgeList<f64>) -> f64 {
        let mut parent: HashMap<u32, u32> = vertices.iter().map(|&v| (v, v)).collect();
        fn root(parent: &mut HashMap<u32, u32>, mut v: u32) -> u32 {
            while parent[&v] != v {
                let up = parent[&parent[&v]];
                parent.insert(v, up);
                v = up;
            }
            v
        }
        let mut max_w = 0.0f64;
        for e in sorted.edges() {
            if vertices.contains(&e.a.0) && vertices.contains(&e.b.0) {
                let (ra, rb) = (root(&mut parent, e.a.0), root(&mut parent, e.b.0));
                if ra != rb {
                    parent.insert(ra, rb);
                    max_w = max_w.max(e.weight);
                }
            }
        }
        max_w
    }

    #[test]
    fn uniform_image_collapses_to_one_component() {
        let img = RasterImage::filled(6, 4, 80.0f64);
        for k in [0.0, 1.0, 300.0] {
            let (forest, _) = segment_edges(&img, k, 1);
            assert_eq!(forest.component_count(), 1, "k = {k}");
        }
    }

    #[test]
    fn zero_k_keeps_all_distinct_pixels_apart() {
        // Neighboring pixels always differ, so every weight is positive.
        let img = RasterImage::from_fn(5, 4, |x, y, c| ((x * 40 + y * 97 + c * 55) % 256) as f64);
        for y in 0..4 {
            for x in 0..5 {
                for (nx, ny) in crate::graph::forward_neighbors(x, y, 5, 4) {
                    assert_ne!(img.pixel(x, y), img.pixel(nx, ny));
                }
            }
        }
        let (forest, _) = segment_edges(&img, 0.0, 1);
        assert_eq!(forest.component_count(), 20);
    }

    #[test]
    fn equality_merges_at_the_budget() {
        // Two pixels at RGB distance exactly 5.
        let img = RasterImage::new(2, 1, vec![0.0, 0.0, 0.0, 3.0, 4.0, 0.0]).unwrap();
        let (forest, _) = segment_edges(&img, 4.9, 1);
        assert_eq!(forest.component_count(), 2);
        let (forest, _) = segment_edges(&img, 5.0, 1);
        assert_eq!(forest.component_count(), 1);
    }

    #[test]
    fn unsorted_edges_are_rejected() {
        let img = random_float_image(1, 3, 3);
        let edges = build_edges(&img);
        let mut forest = ComponentForest::init(9, 10.0).unwrap();
        assert!(matches!(
            threshold_pass(&mut forest, &edges, 10.0),
            Err(Error::UnsortedEdges)
        ));
    }

    #[test]
    fn merge_weights_are_non_decreasing() {
        let img = random_float_image(5, 8, 8);
        let mut edges = build_edges(&img);
        edges.sort();
        let mut forest = ComponentForest::init(64, 500.0).unwrap();
        let mut weights = Vec::new();
        threshold_scan_with(&mut forest, edges.edges(), 500.0, |e| weights.push(e.weight));
        assert!(!weights.is_empty());
        assert!(weights.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stored_threshold_tracks_component_mst() {
        // threshold(root) must equal maxMST(component) + k / |component|,
        // with the MST recomputed from scratch.
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = rng.random_range(2..=6);
            let h = rng.random_range(2..=6);
            let img = random_float_image(seed.wrapping_mul(77), w, h);
            let k = [10.0, 100.0, 1000.0][seed as usize % 3];
            let mut edges = build_edges(&img);
            edges.sort();
            let mut forest = ComponentForest::init(w * h, k).unwrap();
            threshold_pass(&mut forest, &edges, k).unwrap();

            let mut members: HashMap<u32, HashSet<u32>> = HashMap::new();
            for v in 0..(w * h) as u32 {
                let root = forest.find(VertexId(v));
                members.entry(root.0).or_default().insert(v);
            }
            for (root, vertices) in members {
                let stored = forest.threshold_of_root(VertexId(root));
                let expected = max_mst_edge(&vertices, &edges) + k / vertices.len() as f64;
                assert_eq!(stored, expected, "seed {seed} root {root}");
            }
        }
    }

    #[test]
    fn minsize_one_changes_nothing() {
        let img = random_float_image(9, 6, 6);
        let mut edges = build_edges(&img);
        edges.sort();
        let mut forest = ComponentForest::init(36, 50.0).unwrap();
        threshold_pass(&mut forest, &edges, 50.0).unwrap();
        let before = extract_result(&mut forest.clone(), StageTimings::default());
        minsize_pass(&mut forest, &edges, 1);
        let after = extract_result(&mut forest, StageTimings::default());
        assert_eq!(before.labels, after.labels);
    }

    #[test]
    fn minsize_above_pixel_count_forces_single_component() {
        let img = random_float_image(10, 5, 5);
        let (forest, _) = segment_edges(&img, 0.0, 25);
        assert_eq!(forest.component_count(), 1);
    }

    #[test]
    fn checkerboard_minsize_two() {
        let img = RasterImage::from_fn(4, 4, |x, y, _| if (x + y) % 2 == 0 { 0.0 } else { 255.0 });
        let (mut forest, _) = segment_edges(&img, 0.0, 2);
        let mut sizes: HashMap<u32, usize> = HashMap::new();
        for v in 0..16u32 {
            *sizes.entry(forest.find(VertexId(v)).0).or_default() += 1;
        }
        assert!(sizes.values().all(|&s| s >= 2), "{sizes:?}");

        // Naive mirror of the same scan confirms the exact partition.
        let mut edges = build_edges(&img);
        edges.sort();
        let mut naive: Vec<u32> = (0..16).collect();
        for e in edges.edges() {
            let (la, lb) = (naive[e.a.index()], naive[e.b.index()]);
            if la != lb {
                let sa = naive.iter().filter(|&&l| l == la).count();
                let sb = naive.iter().filter(|&&l| l == lb).count();
                if sa < 2 || sb < 2 {
                    for l in naive.iter_mut() {
                        if *l == lb {
                            *l = la;
                        }
                    }
                }
            }
        }
        let ours: Vec<u32> = (0..16u32).map(|v| forest.find(VertexId(v)).0).collect();
        assert_eq!(canonical_labels(&ours), canonical_labels(&naive));
    }

    #[test]
    fn passes_never_split_components() {
        let img = random_float_image(21, 7, 7);
        let mut edges = build_edges(&img);
        edges.sort();
        let mut forest = ComponentForest::init(49, 200.0).unwrap();
        threshold_pass(&mut forest, &edges, 200.0).unwrap();
        let mid: Vec<u32> = (0..49u32).map(|v| forest.find(VertexId(v)).0).collect();
        minsize_pass(&mut forest, &edges, 5);
        let end: Vec<u32> = (0..49u32).map(|v| forest.find(VertexId(v)).0).collect();
        for i in 0..49 {
            for j in 0..49 {
                if mid[i] == mid[j] {
                    assert_eq!(end[i], end[j], "minsize pass split {i} and {j}");
                }
            }
        }
    }

    #[test]
    fn extract_on_fresh_forest_is_identity() {
        let mut forest = ComponentForest::init(7, 1.0).unwrap();
        let result = extract_result(&mut forest, StageTimings::default());
        assert_eq!(result.labels, (0..7u32).collect::<Vec<_>>());
        assert_eq!(result.component_count, 7);
    }

    #[test]
    fn extract_labels_are_fully_compressed() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut forest = ComponentForest::init(30, 1.0).unwrap();
        for _ in 0..20 {
            let a = forest.find(VertexId(rng.random_range(0..30)));
            let b = forest.find(VertexId(rng.random_range(0..30)));
            if a != b {
                forest.join(a, b, 0.0).unwrap();
            }
        }
        let result = extract_result(&mut forest.clone(), StageTimings::default());
        for v in 0..30usize {
            assert_eq!(result.labels[v], result.labels[result.labels[v] as usize]);
            assert_eq!(result.labels[v], forest.find(VertexId(v as u32)).0);
        }
        let distinct: HashSet<u32> = result.labels.iter().copied().collect();
        assert_eq!(distinct.len(), result.component_count);
    }
}
