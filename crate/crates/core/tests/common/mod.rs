//! Seeded random instance builders shared by the integration suites.

use lgt_core::multigraph::{MultiGraph, NodeId, Orientation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A connected multigraph on `nodes` nodes: a uniform random spanning tree
/// plus `extra` additional edges over random node pairs, each with
/// multiplicity 1..=`max_mult`. Directed edges get a random orientation.
pub fn random_connected(
    rng: &mut ChaCha8Rng,
    orientation: Orientation,
    nodes: u32,
    extra: u32,
    max_mult: u32,
) -> MultiGraph {
    let mut g = MultiGraph::new(orientation, nodes).expect("valid node count");
    for v in 1..nodes {
        let u = rng.gen_range(0..v);
        let (a, b) = if orientation == Orientation::Directed && rng.gen_bool(0.5) {
            (v, u)
        } else {
            (u, v)
        };
        g.add_edge(NodeId(a), NodeId(b), 1).expect("tree edge");
    }
    if nodes >= 2 {
        for _ in 0..extra {
            let u = rng.gen_range(0..nodes);
            let mut v = rng.gen_range(0..nodes);
            while v == u {
                v = rng.gen_range(0..nodes);
            }
            let mult = rng.gen_range(1..=max_mult);
            g.add_edge(NodeId(u), NodeId(v), mult).expect("extra edge");
        }
    }
    g
}

/// A connected multigraph over the same node set as `base`, independent of
/// `base`'s edges. Useful as a transformation target.
pub fn random_connected_like(
    rng: &mut ChaCha8Rng,
    base: &MultiGraph,
    extra: u32,
    max_mult: u32,
) -> MultiGraph {
    random_connected(rng, base.orientation(), base.node_count(), extra, max_mult)
}
