//! Value-semantic multigraphs with per-edge multiplicities.
//!
//! Graphs are either directed or undirected over a fixed, dense node set
//! `0..node_count`. Node identities are stable and meaningful: two graphs are
//! equal only as labeled multigraphs, never up to isomorphism. Self-loops are
//! rejected everywhere; the primitives cannot produce one from loop-free
//! input, so loop-freeness is a closed invariant of the whole crate.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Dense, 0-based node index. Stable for the lifetime of a graph; no
/// operation in this crate ever adds or removes nodes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId(id)
    }
}

/// Whether edges are ordered pairs or unordered pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Directed,
    Undirected,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Directed => write!(f, "directed"),
            Orientation::Undirected => write!(f, "undirected"),
        }
    }
}

/// Errors from graph construction and multiset operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    ZeroNodes,
    #[error("node {0} out of range (node count {1})")]
    NodeOutOfRange(NodeId, u32),
    #[error("self-loop {0}->{0} rejected")]
    SelfLoop(NodeId),
    #[error("edge multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("orientation mismatch: {0} vs {1}")]
    OrientationMismatch(Orientation, Orientation),
    #[error("node count mismatch: {0} vs {1}")]
    NodeCountMismatch(u32, u32),
    #[error("projection input is already undirected")]
    AlreadyUndirected,
}

/// A multiset of edges detached from any graph, e.g. the additional or excess
/// edges between two graphs. Keys follow the owning orientation's
/// normalization: unordered pairs are stored with the smaller id first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMultiset {
    orientation: Orientation,
    edges: BTreeMap<(NodeId, NodeId), u32>,
}

impl EdgeMultiset {
    /// Creates an empty multiset for the given orientation.
    pub fn empty(orientation: Orientation) -> Self {
        EdgeMultiset {
            orientation,
            edges: BTreeMap::new(),
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of distinct edges.
    pub fn distinct_len(&self) -> usize {
        self.edges.len()
    }

    /// Total number of edges, counted with multiplicity.
    pub fn total(&self) -> u64 {
        self.edges.values().map(|&m| u64::from(m)).sum()
    }

    /// Multiplicity of an edge (normalized for unordered pairs).
    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> u32 {
        let key = normalize(self.orientation, u, v);
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Distinct edges with multiplicities, in sorted key order.
    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), u32)> + '_ {
        self.edges.iter().map(|(&k, &m)| (k, m))
    }

    pub(crate) fn insert(&mut self, key: (NodeId, NodeId), mult: u32) {
        if mult > 0 {
            *self.edges.entry(key).or_insert(0) += mult;
        }
    }
}

fn normalize(orientation: Orientation, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    match orientation {
        Orientation::Directed => (u, v),
        Orientation::Undirected => {
            if u <= v {
                (u, v)
            } else {
                (v, u)
            }
        }
    }
}

/// A directed or undirected multigraph over nodes `0..node_count`.
///
/// Edges are stored as a map from the normalized node pair to its
/// multiplicity; absent pairs have multiplicity 0 and multiplicities are
/// always at least 1 for present pairs.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiGraph {
    orientation: Orientation,
    node_count: u32,
    edges: BTreeMap<(NodeId, NodeId), u32>,
}

impl fmt::Debug for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MultiGraph({}, {} nodes",
            self.orientation, self.node_count
        )?;
        for (&(u, v), &m) in &self.edges {
            if m == 1 {
                write!(f, ", {u}-{v}")?;
            } else {
                write!(f, ", {u}-{v}x{m}")?;
            }
        }
        write!(f, ")")
    }
}

impl MultiGraph {
    /// Creates an edgeless graph. Fails on an empty node set.
    pub fn new(orientation: Orientation, node_count: u32) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::ZeroNodes);
        }
        Ok(MultiGraph {
            orientation,
            node_count,
            edges: BTreeMap::new(),
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    /// All node ids of the graph, in increasing order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    fn check_node(&self, n: NodeId) -> Result<(), GraphError> {
        if n.0 >= self.node_count {
            Err(GraphError::NodeOutOfRange(n, self.node_count))
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, u: NodeId, v: NodeId) -> Result<(NodeId, NodeId), GraphError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(normalize(self.orientation, u, v))
    }

    /// Adds `mult` parallel copies of the edge `u -> v` (or `{u, v}`).
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, mult: u32) -> Result<(), GraphError> {
        if mult == 0 {
            return Err(GraphError::ZeroMultiplicity);
        }
        let key = self.check_pair(u, v)?;
        *self.edges.entry(key).or_insert(0) += mult;
        Ok(())
    }

    /// Multiplicity of the edge `u -> v` (or `{u, v}`); 0 when absent or the
    /// pair is degenerate or out of range.
    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> u32 {
        if u == v || u.0 >= self.node_count || v.0 >= self.node_count {
            return 0;
        }
        let key = normalize(self.orientation, u, v);
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Removes one copy of the edge. Returns false (graph unchanged) if the
    /// edge is absent.
    pub(crate) fn remove_edge_copy(&mut self, u: NodeId, v: NodeId) -> bool {
        if u == v || u.0 >= self.node_count || v.0 >= self.node_count {
            return false;
        }
        let key = normalize(self.orientation, u, v);
        match self.edges.get_mut(&key) {
            Some(m) if *m > 1 => {
                *m -= 1;
                true
            }
            Some(_) => {
                self.edges.remove(&key);
                true
            }
            None => false,
        }
    }

    /// Adds one copy of the edge without revalidating bounds (callers have
    /// already checked the pair).
    pub(crate) fn add_edge_copy(&mut self, u: NodeId, v: NodeId) {
        let key = normalize(self.orientation, u, v);
        *self.edges.entry(key).or_insert(0) += 1;
    }

    /// Total edge count, summed over multiplicities.
    pub fn total_edges(&self) -> u64 {
        self.edges.values().map(|&m| u64::from(m)).sum()
    }

    /// Number of distinct edges (multiplicities ignored).
    pub fn distinct_edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Distinct edges with multiplicities, in sorted key order.
    pub fn distinct_edges(&self) -> impl Iterator<Item = ((NodeId, NodeId), u32)> + '_ {
        self.edges.iter().map(|(&k, &m)| (k, m))
    }

    /// Distinct neighbors of `n` in the underlying undirected support,
    /// in increasing id order.
    pub fn support_neighbors(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        for &(u, v) in self.edges.keys() {
            if u == n {
                out.push(v);
            } else if v == n {
                out.push(u);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distinct nodes `v` such that the edge `n -> v` is present. For
    /// undirected graphs this is the same as [`support_neighbors`].
    ///
    /// [`support_neighbors`]: MultiGraph::support_neighbors
    pub fn out_neighbors(&self, n: NodeId) -> Vec<NodeId> {
        match self.orientation {
            Orientation::Undirected => self.support_neighbors(n),
            Orientation::Directed => {
                let mut out: Vec<NodeId> = self
                    .edges
                    .range((n, NodeId(0))..=(n, NodeId(u32::MAX)))
                    .map(|(&(_, v), _)| v)
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Connectivity of the underlying undirected simple graph (weak
    /// connectivity for directed graphs). A one-node graph is connected.
    pub fn is_connected(&self) -> bool {
        if self.node_count == 1 {
            return true;
        }
        let n = self.node_count as usize;
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in self.edges.keys() {
            adj[u.0 as usize].push(v.0);
            adj[v.0 as usize].push(u.0);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(x) = stack.pop() {
            for &y in &adj[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Per-edge multiset difference `self minus other`: for each distinct
    /// edge, multiplicity `max(self - other, 0)`.
    pub fn edge_diff(&self, other: &MultiGraph) -> Result<EdgeMultiset, GraphError> {
        if self.orientation != other.orientation {
            return Err(GraphError::OrientationMismatch(
                self.orientation,
                other.orientation,
            ));
        }
        if self.node_count != other.node_count {
            return Err(GraphError::NodeCountMismatch(
                self.node_count,
                other.node_count,
            ));
        }
        let mut out = EdgeMultiset::empty(self.orientation);
        for (&key, &m) in &self.edges {
            let theirs = other.edges.get(&key).copied().unwrap_or(0);
            if m > theirs {
                out.insert(key, m - theirs);
            }
        }
        Ok(out)
    }

    /// Collapses each directed edge to one undirected copy; multiplicities of
    /// anti-parallel edges add up. Fails on undirected input.
    pub fn undirected_projection(&self) -> Result<MultiGraph, GraphError> {
        if self.orientation == Orientation::Undirected {
            return Err(GraphError::AlreadyUndirected);
        }
        let mut g = MultiGraph::new(Orientation::Undirected, self.node_count)?;
        for (&(u, v), &m) in &self.edges {
            let key = normalize(Orientation::Undirected, u, v);
            *g.edges.entry(key).or_insert(0) += m;
        }
        Ok(g)
    }

    /// Injective byte serialization of the labeled multigraph: equal keys
    /// exactly when the graphs are equal (orientation, node count, and the
    /// full edge multiset). No isomorphism quotient is taken.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.edges.len() * 12);
        out.push(match self.orientation {
            Orientation::Directed => b'd',
            Orientation::Undirected => b'u',
        });
        out.extend_from_slice(&self.node_count.to_le_bytes());
        for (&(u, v), &m) in &self.edges {
            out.extend_from_slice(&u.0.to_le_bytes());
            out.extend_from_slice(&v.0.to_le_bytes());
            out.extend_from_slice(&m.to_le_bytes());
        }
        out
    }

    /// Multiset symmetric-difference size against another graph of the same
    /// shape: total copies present in exactly one of the two graphs.
    pub fn symmetric_difference_total(&self, other: &MultiGraph) -> u64 {
        let mut total = 0u64;
        for (&key, &m) in &self.edges {
            let theirs = other.edges.get(&key).copied().unwrap_or(0);
            total += u64::from(m.abs_diff(theirs));
        }
        for (&key, &m) in &other.edges {
            if !self.edges.contains_key(&key) {
                total += u64::from(m);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    fn graph(orientation: Orientation, nodes: u32, edges: &[(u32, u32, u32)]) -> MultiGraph {
        let mut g = MultiGraph::new(orientation, nodes).unwrap();
        for &(u, v, m) in edges {
            g.add_edge(n(u), n(v), m).unwrap();
        }
        g
    }

    #[test]
    fn construction_rejects_degenerate_input() {
        assert_eq!(
            MultiGraph::new(Orientation::Undirected, 0).unwrap_err(),
            GraphError::ZeroNodes
        );
        let mut g = MultiGraph::new(Orientation::Undirected, 2).unwrap();
        assert_eq!(
            g.add_edge(n(0), n(0), 1).unwrap_err(),
            GraphError::SelfLoop(n(0))
        );
        assert_eq!(
            g.add_edge(n(0), n(2), 1).unwrap_err(),
            GraphError::NodeOutOfRange(n(2), 2)
        );
        assert_eq!(
            g.add_edge(n(0), n(1), 0).unwrap_err(),
            GraphError::ZeroMultiplicity
        );
    }

    #[test]
    fn undirected_edges_normalize() {
        let g = graph(Orientation::Undirected, 3, &[(2, 1, 1)]);
        assert_eq!(g.multiplicity(n(1), n(2)), 1);
        assert_eq!(g.multiplicity(n(2), n(1)), 1);
        let d = graph(Orientation::Directed, 3, &[(2, 1, 1)]);
        assert_eq!(d.multiplicity(n(2), n(1)), 1);
        assert_eq!(d.multiplicity(n(1), n(2)), 0);
    }

    #[test]
    fn connectivity_matches_expectations() {
        let single = MultiGraph::new(Orientation::Undirected, 1).unwrap();
        assert!(single.is_connected());

        let isolated = MultiGraph::new(Orientation::Undirected, 2).unwrap();
        assert!(!isolated.is_connected());

        let path = graph(Orientation::Undirected, 3, &[(0, 1, 1), (1, 2, 1)]);
        assert!(path.is_connected());

        let weak = graph(Orientation::Directed, 3, &[(1, 0, 1), (1, 2, 1)]);
        assert!(weak.is_connected());
    }

    #[test]
    fn edge_diff_is_a_multiset_difference() {
        let gs = graph(Orientation::Undirected, 3, &[(0, 1, 1), (1, 2, 1)]);
        let gt = graph(Orientation::Undirected, 3, &[(0, 2, 1), (1, 2, 1)]);
        let plus = gt.edge_diff(&gs).unwrap();
        assert_eq!(plus.total(), 1);
        assert_eq!(plus.multiplicity(n(0), n(2)), 1);

        let same = gs.edge_diff(&gs).unwrap();
        assert!(same.is_empty());

        let a = graph(Orientation::Undirected, 2, &[(0, 1, 2)]);
        let b = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        let d = a.edge_diff(&b).unwrap();
        assert_eq!(d.multiplicity(n(0), n(1)), 1);
        assert_eq!(d.total(), 1);
    }

    #[test]
    fn edge_diff_rejects_shape_mismatch() {
        let a = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        let b = graph(Orientation::Directed, 2, &[(0, 1, 1)]);
        assert!(matches!(
            a.edge_diff(&b),
            Err(GraphError::OrientationMismatch(_, _))
        ));
        let c = graph(Orientation::Undirected, 3, &[(0, 1, 1)]);
        assert!(matches!(
            a.edge_diff(&c),
            Err(GraphError::NodeCountMismatch(2, 3))
        ));
    }

    #[test]
    fn projection_collapses_orientations() {
        let d = graph(Orientation::Directed, 2, &[(0, 1, 1)]);
        let u = d.undirected_projection().unwrap();
        assert_eq!(u.multiplicity(n(0), n(1)), 1);

        let anti = graph(Orientation::Directed, 2, &[(0, 1, 1), (1, 0, 1)]);
        let u = anti.undirected_projection().unwrap();
        assert_eq!(u.multiplicity(n(0), n(1)), 2);
        assert_eq!(u.total_edges(), anti.total_edges());

        let already = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        assert_eq!(
            already.undirected_projection().unwrap_err(),
            GraphError::AlreadyUndirected
        );
    }

    #[test]
    fn canonical_key_distinguishes_labeled_graphs() {
        let a = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        let b = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        assert_eq!(a.canonical_key(), b.canonical_key());

        let double = graph(Orientation::Undirected, 2, &[(0, 1, 2)]);
        assert_ne!(a.canonical_key(), double.canonical_key());

        let fwd = graph(Orientation::Directed, 2, &[(0, 1, 1)]);
        let bwd = graph(Orientation::Directed, 2, &[(1, 0, 1)]);
        assert_ne!(fwd.canonical_key(), bwd.canonical_key());
    }

    #[test]
    fn canonical_key_collision_free_on_small_graphs() {
        // Exhaustive over every labeled multigraph with at most 4 nodes and
        // at most 4 total edges, in both orientations.
        fn enumerate(
            budget: u32,
            pairs: &[(u32, u32)],
            idx: usize,
            current: &mut MultiGraph,
            keys: &mut std::collections::HashSet<Vec<u8>>,
            count: &mut usize,
        ) {
            if idx == pairs.len() {
                assert!(
                    keys.insert(current.canonical_key()),
                    "key collision at {current:?}"
                );
                *count += 1;
                return;
            }
            let (u, v) = pairs[idx];
            for m in 0..=budget {
                if m > 0 {
                    current.add_edge(NodeId(u), NodeId(v), m).unwrap();
                }
                enumerate(budget - m, pairs, idx + 1, current, keys, count);
                if m > 0 {
                    for _ in 0..m {
                        current.remove_edge_copy(NodeId(u), NodeId(v));
                    }
                }
            }
        }

        let mut keys = std::collections::HashSet::new();
        let mut count = 0usize;
        for orientation in [Orientation::Undirected, Orientation::Directed] {
            for node_count in 1..=4u32 {
                let mut pairs = Vec::new();
                for u in 0..node_count {
                    for v in 0..node_count {
                        if u == v {
                            continue;
                        }
                        if orientation == Orientation::Undirected && u > v {
                            continue;
                        }
                        pairs.push((u, v));
                    }
                }
                let mut current = MultiGraph::new(orientation, node_count).unwrap();
                enumerate(4, &pairs, 0, &mut current, &mut keys, &mut count);
            }
        }
        assert_eq!(keys.len(), count);
        assert!(count > 2000);
    }

    #[test]
    fn symmetric_difference_counts_copies() {
        let a = graph(Orientation::Undirected, 3, &[(0, 1, 2), (1, 2, 1)]);
        let b = graph(Orientation::Undirected, 3, &[(0, 1, 1), (0, 2, 1)]);
        assert_eq!(a.symmetric_difference_total(&b), 3);
        assert_eq!(b.symmetric_difference_total(&a), 3);
        assert_eq!(a.symmetric_difference_total(&a), 0);
    }
}
