//! Partition reconstruction from rendered outputs and exact Rand index
//! computation via pair counting.

use gbis::imaging::RasterImage;
use serde::Serialize;

/// Agreement report between two labelings of the same pixel set.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionComparison {
    /// True when the two labelings induce the same partition.
    pub identical: bool,
    pub component_counts: (usize, usize),
    /// Fraction of pixel pairs on which the partitions agree, in [0, 1].
    pub rand_index: f64,
}

/// Recovers a labeling from a rendered image: pixels sharing a color share
/// a class. Valid for outputs painted with an injective palette.
pub fn partition_of_image(img: &RasterImage<u8>) -> Vec<u32> {
    let mut classes = std::collections::HashMap::new();
    (0..img.height())
        .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
        .map(|(x, y)| {
            let next = classes.len() as u32;
            *classes.entry(img.pixel(x, y)).or_insert(next)
        })
        .collect()
}

fn choose2(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

/// Exact Rand index by contingency counting. Both labelings must cover the
/// same pixels. A single-pixel input has no pairs and compares as 1.
pub fn rand_index(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same pixels");
    let n = a.len() as u64;
    let total_pairs = choose2(n);
    if total_pairs == 0 {
        return 1.0;
    }

    let mut cell: std::collections::HashMap<(u32, u32), u64> = std::collections::HashMap::new();
    let mut size_a: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    let mut size_b: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
    for (&la, &lb) in a.iter().zip(b) {
        *cell.entry((la, lb)).or_default() += 1;
        *size_a.entry(la).or_default() += 1;
        *size_b.entry(lb).or_default() += 1;
    }

    let same_both: u128 = cell.values().map(|&c| choose2(c)).sum();
    let same_a: u128 = size_a.values().map(|&c| choose2(c)).sum();
    let same_b: u128 = size_b.values().map(|&c| choose2(c)).sum();
    // Agreements: pairs together in both, plus pairs apart in both.
    let agreements = total_pairs + 2 * same_both - same_a - same_b;
    agreements as f64 / total_pairs as f64
}

pub fn compare_partitions(a: &[u32], b: &[u32]) -> PartitionComparison {
    let canon_a = gbis::agglomerate::canonical_labels(a);
    let canon_b = gbis::agglomerate::canonical_labels(b);
    let count = |labels: &[u32]| {
        labels
            .iter()
            .collect::<std::collections::HashSet<_>>()
            .len()
    };
    PartitionComparison {
        identical: canon_a == canon_b,
        component_counts: (count(a), count(b)),
        rand_index: rand_index(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partition_scores_one() {
        let labels = vec![0u32, 0, 1, 2, 1];
        let report = compare_partitions(&labels, &labels);
        assert!(report.identical);
        assert_eq!(report.rand_index, 1.0);
    }

    #[test]
    fn singletons_vs_one_cluster_on_four_pixels_scores_zero() {
        // No pair agrees: all apart in one, all together in the other.
        let singletons = vec![0u32, 1, 2, 3];
        let merged = vec![0u32, 0, 0, 0];
        assert_eq!(rand_index(&singletons, &merged), 0.0);
    }

    #[test]
    fn rand_index_is_symmetric() {
        let a = vec![0u32, 0, 1, 1, 2, 2, 2];
        let b = vec![0u32, 1, 1, 1, 2, 2, 0];
        assert_eq!(rand_index(&a, &b), rand_index(&b, &a));
    }

    #[test]
    fn known_small_value() {
        // Partitions {1,2},{3} vs {1},{2,3}: pairs (1,2) together/apart,
        // (2,3) apart/together, (1,3) apart/apart -> 1 agreement of 3.
        let a = vec![0u32, 0, 1];
        let b = vec![0u32, 1, 1];
        assert!((rand_index(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn relabeled_partitions_are_identical() {
        let a = vec![5u32, 5, 9, 9];
        let b = vec![1u32, 1, 0, 0];
        let report = compare_partitions(&a, &b);
        assert!(report.identical);
        assert_eq!(report.rand_index, 1.0);
    }

    #[test]
    fn image_partition_reconstruction() {
        let img = RasterImage::new(
            2,
            2,
            vec![10, 10, 10, 20, 20, 20, 10, 10, 10, 30, 30, 30],
        )
        .unwrap();
        assert_eq!(partition_of_image(&img), vec![0, 1, 0, 2]);
    }
}
