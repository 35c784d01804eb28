//! Unit-cost undirected Steiner forest: find few distinct edges of a graph's
//! support that connect every requested node pair.
//!
//! Two solvers share the interface: a primal-dual moat-growing
//! 2-approximation with reverse-delete pruning, and an exact solver that
//! enumerates support-edge subsets by increasing size (guarded to small
//! instances) and certifies the approximation ratio in tests.
//!
//! Both are deterministic: moat growth breaks simultaneous-tight ties in
//! lexicographic edge order, and the exact solver scans subsets in
//! lexicographic order per size, so equal inputs yield equal forests.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::multigraph::{MultiGraph, NodeId, Orientation};

/// Upper bound on distinct support edges for the exact solver.
pub const EXACT_EDGE_LIMIT: usize = 20;

const TIGHT_EPS: f64 = 1e-9;

/// Errors from forest construction and the two solvers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SteinerError {
    #[error("input graph is disconnected")]
    DisconnectedInput,
    #[error("terminal {0} is invalid for this graph")]
    InvalidTerminal(NodeId),
    #[error("exact search is limited to {limit} distinct edges, instance has {edges}")]
    InstanceTooLarge { edges: usize, limit: usize },
    #[error("expected an undirected graph (take the undirected projection first)")]
    DirectedInput,
    #[error("edge set contains a self-loop or a cycle")]
    NotAForest,
}

/// Unordered node pairs to be connected, stored with the smaller id first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminalPairs {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl TerminalPairs {
    pub fn empty() -> Self {
        TerminalPairs {
            pairs: BTreeSet::new(),
        }
    }

    /// Collects and normalizes pairs; rejects degenerate pairs with equal
    /// endpoints. Duplicates collapse.
    pub fn new(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, SteinerError> {
        let mut set = BTreeSet::new();
        for (u, v) in pairs {
            if u == v {
                return Err(SteinerError::InvalidTerminal(u));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(TerminalPairs { pairs: set })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }

    /// All distinct endpoints, in increasing order.
    pub fn terminals(&self) -> BTreeSet<NodeId> {
        self.pairs.iter().flat_map(|&(u, v)| [u, v]).collect()
    }
}

/// One connected component of a [`Forest`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    /// Every node touched by the tree's edges, in increasing order.
    pub nodes: BTreeSet<NodeId>,
    /// The tree's edges, sorted.
    pub edges: Vec<(NodeId, NodeId)>,
}

/// An acyclic set of distinct undirected edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl Forest {
    pub fn empty() -> Self {
        Forest {
            edges: BTreeSet::new(),
        }
    }

    /// Builds a forest from undirected edges, normalizing endpoint order.
    /// Rejects self-loops and cycles.
    pub fn from_edges(
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, SteinerError> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(SteinerError::NotAForest);
            }
            set.insert((u.min(v), u.max(v)));
        }
        let ids: BTreeMap<NodeId, usize> = set
            .iter()
            .flat_map(|&(u, v)| [u, v])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let mut dsu = UnionFind::<usize>::new(ids.len());
        for &(u, v) in &set {
            if !dsu.union(ids[&u], ids[&v]) {
                return Err(SteinerError::NotAForest);
            }
        }
        Ok(Forest { edges: set })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Splits the forest into its connected components, ordered by smallest
    /// contained node id. Nodes not touched by any edge belong to no tree.
    pub fn trees(&self) -> Vec<Tree> {
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for &(u, v) in &self.edges {
            adjacency.entry(u).or_default().push(v);
            adjacency.entry(v).or_default().push(u);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in adjacency.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut nodes = BTreeSet::new();
            let mut stack = vec![start];
            nodes.insert(start);
            while let Some(x) = stack.pop() {
                for &y in &adjacency[&x] {
                    if nodes.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen.extend(nodes.iter().copied());
            let edges = self
                .edges
                .iter()
                .copied()
                .filter(|&(u, _)| nodes.contains(&u))
                .collect();
            out.push(Tree { nodes, edges });
        }
        out
    }
}

fn check_inputs(g: &MultiGraph, s: &TerminalPairs) -> Result<(), SteinerError> {
    if g.orientation() != Orientation::Undirected {
        return Err(SteinerError::DirectedInput);
    }
    for (u, v) in s.iter() {
        for n in [u, v] {
            if n.0 >= g.node_count() {
                return Err(SteinerError::InvalidTerminal(n));
            }
        }
    }
    Ok(())
}

fn support_edges(g: &MultiGraph) -> Vec<(NodeId, NodeId)> {
    g.distinct_edges().map(|(key, _)| key).collect()
}

fn pairs_satisfied(node_count: u32, edges: &[(NodeId, NodeId)], s: &TerminalPairs) -> bool {
    let mut dsu = UnionFind::<usize>::new(node_count as usize);
    for &(u, v) in edges {
        dsu.union(u.0 as usize, v.0 as usize);
    }
    s.iter()
        .all(|(u, v)| dsu.find(u.0 as usize) == dsu.find(v.0 as usize))
}

/// Primal-dual moat-growing 2-approximation with reverse-delete pruning.
///
/// Components containing an endpoint of a not-yet-connected pair grow
/// uniformly; an edge becomes tight once the growth charged to it reaches its
/// unit cost, and the lexicographically smallest tight edge merges its two
/// components. Reverse-delete then drops every edge whose removal keeps all
/// pairs connected, in reverse addition order, which also erases any tree
/// containing no terminal.
pub fn steiner_forest_apx(g: &MultiGraph, s: &TerminalPairs) -> Result<Forest, SteinerError> {
    check_inputs(g, s)?;
    if !g.is_connected() {
        return Err(SteinerError::DisconnectedInput);
    }
    if s.is_empty() {
        return Ok(Forest::empty());
    }

    let support = support_edges(g);
    let n = g.node_count() as usize;
    let mut dsu = UnionFind::<usize>::new(n);
    let mut load = vec![0.0f64; support.len()];
    let mut added: Vec<usize> = Vec::new();
    let mut in_forest = vec![false; support.len()];

    loop {
        let mut active = BTreeSet::new();
        for (u, v) in s.iter() {
            let (cu, cv) = (dsu.find(u.0 as usize), dsu.find(v.0 as usize));
            if cu != cv {
                active.insert(cu);
                active.insert(cv);
            }
        }
        if active.is_empty() {
            break;
        }

        let mut delta = f64::INFINITY;
        let mut rates = vec![0u32; support.len()];
        for (i, &(u, v)) in support.iter().enumerate() {
            if in_forest[i] {
                continue;
            }
            let (cu, cv) = (dsu.find(u.0 as usize), dsu.find(v.0 as usize));
            if cu == cv {
                continue;
            }
            let rate = u32::from(active.contains(&cu)) + u32::from(active.contains(&cv));
            rates[i] = rate;
            if rate > 0 {
                delta = delta.min(((1.0 - load[i]) / f64::from(rate)).max(0.0));
            }
        }
        debug_assert!(delta.is_finite(), "active components imply a crossing edge");

        // Ties are broken toward edges both of whose moats are active: those
        // merge two deficient components at once and avoid detour growth.
        let mut tight: Option<(u32, usize)> = None;
        for i in 0..support.len() {
            if rates[i] == 0 {
                continue;
            }
            load[i] += f64::from(rates[i]) * delta;
            if load[i] >= 1.0 - TIGHT_EPS && tight.is_none_or(|(r, _)| rates[i] > r) {
                tight = Some((rates[i], i));
            }
        }
        let (_, i) = tight.expect("minimum slack edge is tight after the advance");
        in_forest[i] = true;
        added.push(i);
        dsu.union(support[i].0 .0 as usize, support[i].1 .0 as usize);
    }

    let mut kept: BTreeSet<usize> = added.iter().copied().collect();
    for &i in added.iter().rev() {
        kept.remove(&i);
        let edges: Vec<_> = kept.iter().map(|&j| support[j]).collect();
        if !pairs_satisfied(g.node_count(), &edges, s) {
            kept.insert(i);
        }
    }

    let forest = Forest::from_edges(kept.iter().map(|&i| support[i]))
        .expect("moat growth only merges distinct components");
    debug_assert!(pairs_satisfied(
        g.node_count(),
        &forest.edges().collect::<Vec<_>>(),
        s
    ));
    Ok(forest)
}

/// Minimum-cardinality Steiner forest by subset enumeration, for instances
/// whose support has at most [`EXACT_EDGE_LIMIT`] distinct edges. Subsets are
/// scanned by increasing size, so the first feasible one is optimal (and
/// therefore acyclic).
pub fn steiner_forest_exact(g: &MultiGraph, s: &TerminalPairs) -> Result<Forest, SteinerError> {
    check_inputs(g, s)?;
    let support = support_edges(g);
    if support.len() > EXACT_EDGE_LIMIT {
        return Err(SteinerError::InstanceTooLarge {
            edges: support.len(),
            limit: EXACT_EDGE_LIMIT,
        });
    }
    if s.is_empty() {
        return Ok(Forest::empty());
    }
    if !pairs_satisfied(g.node_count(), &support, s) {
        return Err(SteinerError::DisconnectedInput);
    }
    for size in 0..=support.len() {
        for subset in support.iter().copied().combinations(size) {
            if pairs_satisfied(g.node_count(), &subset, s) {
                return Ok(Forest::from_edges(subset)
                    .expect("a minimum feasible edge set cannot contain a cycle"));
            }
        }
    }
    unreachable!("full support is feasible");
}
