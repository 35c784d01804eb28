//! Shared instance builders for the criterion benches.

use lgt_core::multigraph::{MultiGraph, NodeId, Orientation};
use lgt_core::steiner::TerminalPairs;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A connected random multigraph: a random parent tree over `nodes` nodes
/// plus `extra` arbitrary edges with multiplicity up to `max_mult`.
pub fn random_connected(
    seed: u64,
    orientation: Orientation,
    nodes: u32,
    extra: u32,
    max_mult: u32,
) -> MultiGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut g = MultiGraph::new(orientation, nodes).expect("node count fits");
    for v in 1..nodes {
        let u = rng.gen_range(0..v);
        let (a, b) = if orientation == Orientation::Directed && rng.gen_bool(0.5) {
            (v, u)
        } else {
            (u, v)
        };
        g.add_edge(NodeId(a), NodeId(b), 1).expect("valid edge");
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..nodes);
        let mut v = rng.gen_range(0..nodes);
        while v == u {
            v = rng.gen_range(0..nodes);
        }
        let mult = rng.gen_range(1..=max_mult);
        g.add_edge(NodeId(u), NodeId(v), mult).expect("valid edge");
    }
    g
}

/// A second connected random graph over the same node set and orientation,
/// so a pair forms a planning instance with nontrivial edge differences.
pub fn companion(seed: u64, base: &MultiGraph, extra: u32, max_mult: u32) -> MultiGraph {
    random_connected(seed, base.orientation(), base.node_count(), extra, max_mult)
}

/// Disjoint random terminal pairs over the graph's nodes.
pub fn random_pairs(seed: u64, nodes: u32, pairs: u32) -> TerminalPairs {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut ids: Vec<u32> = (0..nodes).collect();
    for i in (1..ids.len()).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    let picked = ids
        .chunks_exact(2)
        .take(pairs as usize)
        .map(|pair| (NodeId(pair[0]), NodeId(pair[1])));
    TerminalPairs::new(picked).expect("disjoint pairs are valid")
}
