//! k-uniform hypergraphs: construction, induced subgraphs, components,
//! edge boundaries, and the text format.
//!
//! Vertices are `0..n`. Edges are stored sorted ascending internally and
//! lexicographically across the edge list, so two hypergraphs with the same
//! edge set compare equal.

mod format;
pub mod iso;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use format::{parse_hypergraph, write_hypergraph};
pub use iso::{aut_count, canonical_form, isomorphism_classes, iso, CanonicalForm, IsoReport};

use crate::error::{Error, Result};

/// Largest vertex count supported by the bitmask-based searches.
pub const MASK_LIMIT: usize = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    edges: Vec<Vec<usize>>,
    degrees: Vec<usize>,
    max_degree: usize,
    incidence: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl std::fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hypergraph")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct HypergraphRepr {
    k: usize,
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl Serialize for Hypergraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HypergraphRepr { k: self.k, n: self.n, edges: self.edges.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hypergraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = HypergraphRepr::deserialize(d)?;
        Hypergraph::build(r.k, r.n, r.edges).map_err(serde::de::Error::custom)
    }
}

impl Hypergraph {
    /// Validates and normalizes an edge list. Duplicate edges are merged.
    pub fn build<E, I>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[usize]>,
    {
        if k < 2 {
            return Err(Error::Uniformity(k));
        }
        let mut list = Vec::new();
        for e in edges {
            let e = e.as_ref();
            if e.len() != k {
                return Err(Error::InvalidEdge {
                    edge: e.to_vec(),
                    reason: format!("has {} vertices, expected {k}", e.len()),
                });
            }
            if let Some(&v) = e.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidEdge {
                    edge: e.to_vec(),
                    reason: format!("vertex {v} out of range 0..{n}"),
                });
            }
            let mut sorted = e.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge { edge: e.to_vec(), reason: "repeated vertex".into() });
            }
            list.push(sorted);
        }
        list.sort();
        list.dedup();
        Ok(Self::from_sorted(k, n, list))
    }

    fn from_sorted(k: usize, n: usize, edges: Vec<Vec<usize>>) -> Self {
        let mut degrees = vec![0; n];
        let mut incidence = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            for &v in e {
                degrees[v] += 1;
                incidence[v].push(i);
            }
            index.insert(e.clone(), i);
        }
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        Hypergraph { k, n, edges, degrees, max_degree, incidence, index }
    }

    pub fn empty(k: usize, n: usize) -> Result<Self> {
        Self::build(k, n, Vec::<Vec<usize>>::new())
    }

    /// The complete k-uniform hypergraph on `n` vertices.
    pub fn complete(k: usize, n: usize) -> Result<Self> {
        Self::build(k, n, k_subsets(n, k))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &[usize] {
        &self.edges[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Indices of the edges containing `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    /// Index of the edge with the given vertex set, in any order.
    pub fn edge_index(&self, vertices: &[usize]) -> Option<usize> {
        if vertices.windows(2).all(|w| w[0] < w[1]) {
            self.index.get(vertices).copied()
        } else {
            let mut v = vertices.to_vec();
            v.sort_unstable();
            self.index.get(&v).copied()
        }
    }

    pub fn has_edge(&self, vertices: &[usize]) -> bool {
        self.edge_index(vertices).is_some()
    }

    /// Vertices of positive degree.
    pub fn covered_vertices(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.degrees[v] > 0).collect()
    }

    pub(crate) fn require_mask_size(&self, what: &str) -> Result<()> {
        if self.n > MASK_LIMIT {
            Err(Error::param(format!("{what} supports at most {MASK_LIMIT} vertices, got {}", self.n)))
        } else {
            Ok(())
        }
    }

    /// One bitmask per edge. Requires `n ≤ 64`.
    pub(crate) fn edge_masks(&self) -> Vec<u64> {
        debug_assert!(self.n <= MASK_LIMIT);
        self.edges.iter().map(|e| e.iter().fold(0u64, |m, &v| m | (1 << v))).collect()
    }

    /// For every vertex, the mask of vertices sharing an edge with it.
    pub(crate) fn neighbour_masks(&self) -> Vec<u64> {
        debug_assert!(self.n <= MASK_LIMIT);
        let mut adj = vec![0u64; self.n];
        for e in &self.edges {
            let m = e.iter().fold(0u64, |m, &v| m | (1 << v));
            for &v in e {
                adj[v] |= m & !(1 << v);
            }
        }
        adj
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    /// Isolated vertices are singleton components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let r0 = find(&mut parent, e[0]);
            for &v in &e[1..] {
                let r = find(&mut parent, v);
                if r != r0 {
                    let (a, b) = (r.min(r0), r.max(r0));
                    parent[b] = a;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n];
        for v in 0..self.n {
            let r = find(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(v);
        }
        groups
    }

    /// Induced subhypergraph on `u`, relabeled `0..|u|` preserving order.
    pub fn induced(&self, u: &VertexSet) -> Result<Hypergraph> {
        if u.is_empty() {
            return Err(Error::param("induced subgraph of an empty vertex set"));
        }
        if let Some(&v) = u.as_slice().last() {
            if v >= self.n {
                return Err(Error::param(format!("vertex {v} out of range 0..{}", self.n)));
            }
        }
        let mut label = vec![usize::MAX; self.n];
        for (i, &v) in u.as_slice().iter().enumerate() {
            label[v] = i;
        }
        let edges: Vec<Vec<usize>> = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&v| label[v] != usize::MAX))
            .map(|e| e.iter().map(|&v| label[v]).collect())
            .collect();
        // relabeling is monotone, so sortedness is preserved
        Ok(Self::from_sorted(self.k, u.len(), edges))
    }

    /// Number of edges fully inside `u`.
    pub fn induced_edge_count(&self, u: &VertexSet) -> usize {
        let mut inside = vec![false; self.n];
        for &v in u.as_slice() {
            inside[v] = true;
        }
        self.edges.iter().filter(|e| e.iter().all(|&v| inside[v])).count()
    }

    /// Indices of the edges meeting `u` in exactly one vertex.
    pub fn edge_boundary(&self, u: &VertexSet) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &v in u.as_slice() {
            if v < self.n {
                inside[v] = true;
            }
        }
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.iter().filter(|&&v| inside[v]).count() == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// Image under the vertex permutation `perm` (`v ↦ perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Hypergraph> {
        if perm.len() != self.n {
            return Err(Error::param("permutation length differs from vertex count"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        Self::build(self.k, self.n, self.edges.iter().map(|e| e.iter().map(|&v| perm[v]).collect::<Vec<_>>()))
    }

    /// The hypergraph formed by the given edges on the vertices they cover,
    /// relabeled in increasing order. Also returns the covered vertex list.
    pub fn edge_subgraph(&self, edge_ids: &[usize]) -> (Hypergraph, Vec<usize>) {
        let mut verts: Vec<usize> = edge_ids.iter().flat_map(|&i| self.edges[i].iter().copied()).collect();
        verts.sort_unstable();
        verts.dedup();
        let mut label = vec![usize::MAX; self.n];
        for (i, &v) in verts.iter().enumerate() {
            label[v] = i;
        }
        let mut edges: Vec<Vec<usize>> =
            edge_ids.iter().map(|&i| self.edges[i].iter().map(|&v| label[v]).collect()).collect();
        edges.sort();
        edges.dedup();
        (Self::from_sorted(self.k, verts.len(), edges), verts)
    }

    /// Same hypergraph with isolated vertices dropped.
    pub fn without_isolated(&self) -> Hypergraph {
        let all: Vec<usize> = (0..self.edges.len()).collect();
        self.edge_subgraph(&all).0
    }
}

/// Sorted, duplicate-free set of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        VertexSet(vertices)
    }

    /// Validated against an ambient vertex count.
    pub fn within(vertices: Vec<usize>, n: usize) -> Result<Self> {
        let s = Self::new(vertices);
        match s.0.last() {
            Some(&v) if v >= n => Err(Error::param(format!("vertex {v} out of range 0..{n}"))),
            _ => Ok(s),
        }
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            v.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        VertexSet(v)
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &v| m | (1u64 << v))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}
