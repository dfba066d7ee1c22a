//! Disjoint-set forest over pixel vertices with four per-vertex attributes:
//! parent label, rank, component size and the component merge threshold.
//!
//! Size and threshold are maintained at roots only; values stored at
//! non-roots are stale by design and must be read through [`ComponentForest::find`].

use crate::graph::VertexId;
use crate::{Error, Real, Result};

#[derive(Debug, Clone)]
pub struct ComponentForest<T> {
    parent: Vec<u32>,
    rank: Vec<u8>,
    size: Vec<u32>,
    threshold: Vec<T>,
    k: T,
    components: usize,
}

impl<T: Real> ComponentForest<T> {
    /// One singleton component per vertex. Every vertex starts with rank 0,
    /// size 1 and its threshold set to the global constant `k`.
    pub fn init(vertex_count: usize, k: T) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidParameter(
                "forest needs at least one vertex".into(),
            ));
        }
        if vertex_count > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "vertex count {vertex_count} exceeds u32 range"
            )));
        }
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold constant must be finite and non-negative, got {k:?}"
            )));
        }
        Ok(Self {
            parent: (0..vertex_count as u32).collect(),
            rank: vec![0; vertex_count],
            size: vec![1; vertex_count],
            threshold: vec![k; vertex_count],
            k,
            components: vertex_count,
        })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// The threshold constant the forest was initialized with.
    pub fn k(&self) -> T {
        self.k
    }

    #[inline]
    pub fn is_root(&self, v: VertexId) -> bool {
        self.parent[v.index()] == v.0
    }

    /// Root of `v`'s component, with full path compression: every vertex on
    /// the walked path is re-parented to the root. The partition is
    /// unchanged.
    pub fn find(&mut self, v: VertexId) -> VertexId {
        let mut root = v.0;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v.0;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        VertexId(root)
    }

    /// Union by rank: the higher-ranked root survives; on a tie `ra`
    /// survives and its rank grows by one. The surviving root receives the
    /// combined size and `new_threshold`. Returns the surviving root.
    pub fn join(&mut self, ra: VertexId, rb: VertexId, new_threshold: T) -> Result<VertexId> {
        if ra == rb {
            return Err(Error::ForestContract(format!(
                "join requires two distinct roots, got {} twice",
                ra.0
            )));
        }
        if !self.is_root(ra) || !self.is_root(rb) {
            return Err(Error::ForestContract(format!(
                "join arguments must be roots: {} and {}",
                ra.0, rb.0
            )));
        }
        let survivor = if self.rank[ra.index()] >= self.rank[rb.index()] {
            if self.rank[ra.index()] == self.rank[rb.index()] {
                self.rank[ra.index()] += 1;
            }
            self.parent[rb.index()] = ra.0;
            ra
        } else {
            self.parent[ra.index()] = rb.0;
            rb
        };
        self.size[survivor.index()] = self.size[ra.index()] + self.size[rb.index()];
        self.threshold[survivor.index()] = new_threshold;
        self.components -= 1;
        Ok(survivor)
    }

    /// Number of live components (roots).
    pub fn component_count(&self) -> usize {
        self.components
    }

    /// Component size; valid only when `root` is a root.
    #[inline]
    pub fn size_of_root(&self, root: VertexId) -> u32 {
        debug_assert!(self.is_root(root));
        self.size[root.index()]
    }

    /// Stored merge threshold; valid only when `root` is a root.
    #[inline]
    pub fn threshold_of_root(&self, root: VertexId) -> T {
        debug_assert!(self.is_root(root));
        self.threshold[root.index()]
    }

    #[inline]
    pub fn rank_of_root(&self, root: VertexId) -> u8 {
        debug_assert!(self.is_root(root));
        self.rank[root.index()]
    }

    /// Copies the state of a sub-forest into this one. `to_global[local]`
    /// gives the vertex in `self` that local vertex maps to; the mapped
    /// vertices must still be untouched singletons in `self` and the
    /// mapping must be injective.
    pub fn transplant(&mut self, sub: &ComponentForest<T>, to_global: &[VertexId]) {
        assert_eq!(sub.len(), to_global.len(), "mapping covers the sub-forest");
        for local in 0..sub.len() {
            let g = to_global[local].index();
            debug_assert!(self.parent[g] == g as u32 && self.size[g] == 1);
            self.parent[g] = to_global[sub.parent[local] as usize].0;
            self.rank[g] = sub.rank[local];
            self.size[g] = sub.size[local];
            self.threshold[g] = sub.threshold[local];
        }
        self.components -= sub.len() - sub.component_count();
    }
}
