//! The four local primitives and their precondition-checked application.
//!
//! Every primitive is a command issued by an applier node `u` using only
//! references it currently holds:
//!
//! - `Introduce(u, v, w)`: u sends v a reference of w while keeping its own;
//!   creates the edge `v -> w` (undirected: `{v, w}`). `w = u` is the node
//!   introducing itself.
//! - `Delegate(u, v, w)`: u hands its reference of w over to v; removes
//!   `u -> w`, creates `v -> w`.
//! - `Fuse(u, v)`: u drops one of at least two parallel references of v.
//! - `Reverse(u, v)`: u sends v a reference of itself and deletes its own;
//!   `u -> v` becomes `v -> u`. Directed graphs only.
//!
//! Applications never disconnect a connected graph and never change the node
//! set; only introduction can grow and only fusion can shrink the total edge
//! count, each by exactly one.

use std::fmt;

use thiserror::Error;

use crate::multigraph::{EdgeMultiset, MultiGraph, NodeId, Orientation};

/// One primitive application. Variant order (then operand order) defines the
/// deterministic enumeration and trace ordering used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Primitive {
    /// u introduces w to v: creates `v -> w`, keeping `u -> w`.
    Introduce { u: NodeId, v: NodeId, w: NodeId },
    /// u delegates its reference of w to v: removes `u -> w`, creates `v -> w`.
    Delegate { u: NodeId, v: NodeId, w: NodeId },
    /// u fuses duplicate references of v: removes one copy of `u -> v`.
    Fuse { u: NodeId, v: NodeId },
    /// u reverses its reference of v: `u -> v` becomes `v -> u`.
    Reverse { u: NodeId, v: NodeId },
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Primitive::Introduce { u, v, w } => write!(f, "INTRODUCE {u} {v} {w}"),
            Primitive::Delegate { u, v, w } => write!(f, "DELEGATE {u} {v} {w}"),
            Primitive::Fuse { u, v } => write!(f, "FUSE {u} {v}"),
            Primitive::Reverse { u, v } => write!(f, "REVERSE {u} {v}"),
        }
    }
}

impl Primitive {
    pub fn introduce(u: NodeId, v: NodeId, w: NodeId) -> Self {
        Primitive::Introduce { u, v, w }
    }

    pub fn delegate(u: NodeId, v: NodeId, w: NodeId) -> Self {
        Primitive::Delegate { u, v, w }
    }

    /// Fusion command. On undirected graphs `Fuse(u, v)` and `Fuse(v, u)`
    /// are the same action; the engine and all emitters normalize to the
    /// smaller applier id.
    pub fn fuse(u: NodeId, v: NodeId) -> Self {
        Primitive::Fuse { u, v }
    }

    pub fn reverse(u: NodeId, v: NodeId) -> Self {
        Primitive::Reverse { u, v }
    }
}

/// Errors from a single primitive application.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrimitiveError {
    #[error("operand node {0} out of range (node count {1})")]
    InvalidNode(NodeId, u32),
    #[error("operand identities violate the primitive's shape: {0}")]
    IdentityViolation(&'static str),
    #[error("required operand edge {0} -> {1} is missing")]
    MissingOperandEdge(NodeId, NodeId),
    #[error("edge {0} -> {1} has multiplicity {2}, fusion needs at least 2")]
    InsufficientMultiplicity(NodeId, NodeId, u32),
    #[error("reversal applies to directed graphs only")]
    OrientationMismatch,
}

fn require_edge(g: &MultiGraph, u: NodeId, v: NodeId) -> Result<(), PrimitiveError> {
    if g.multiplicity(u, v) == 0 {
        Err(PrimitiveError::MissingOperandEdge(u, v))
    } else {
        Ok(())
    }
}

fn check_nodes(g: &MultiGraph, nodes: &[NodeId]) -> Result<(), PrimitiveError> {
    for &n in nodes {
        if n.0 >= g.node_count() {
            return Err(PrimitiveError::InvalidNode(n, g.node_count()));
        }
    }
    Ok(())
}

/// Applies one primitive, returning the successor graph. The input graph is
/// untouched; both the structural shape of the operand triple and the
/// required operand edges are checked.
pub fn apply(g: &MultiGraph, p: Primitive) -> Result<MultiGraph, PrimitiveError> {
    match p {
        Primitive::Introduce { u, v, w } => {
            check_nodes(g, &[u, v, w])?;
            if u == v {
                return Err(PrimitiveError::IdentityViolation(
                    "introduction needs u != v",
                ));
            }
            if v == w {
                return Err(PrimitiveError::IdentityViolation(
                    "introduction needs v != w",
                ));
            }
            require_edge(g, u, v)?;
            if w != u {
                require_edge(g, u, w)?;
            }
            let mut next = g.clone();
            next.add_edge_copy(v, w);
            Ok(next)
        }
        Primitive::Delegate { u, v, w } => {
            check_nodes(g, &[u, v, w])?;
            if u == v || v == w || u == w {
                return Err(PrimitiveError::IdentityViolation(
                    "delegation needs pairwise distinct u, v, w",
                ));
            }
            require_edge(g, u, v)?;
            require_edge(g, u, w)?;
            let mut next = g.clone();
            next.remove_edge_copy(u, w);
            next.add_edge_copy(v, w);
            Ok(next)
        }
        Primitive::Fuse { u, v } => {
            check_nodes(g, &[u, v])?;
            if u == v {
                return Err(PrimitiveError::IdentityViolation("fusion needs u != v"));
            }
            let mult = g.multiplicity(u, v);
            if mult < 2 {
                return Err(PrimitiveError::InsufficientMultiplicity(u, v, mult));
            }
            let mut next = g.clone();
            next.remove_edge_copy(u, v);
            Ok(next)
        }
        Primitive::Reverse { u, v } => {
            check_nodes(g, &[u, v])?;
            if u == v {
                return Err(PrimitiveError::IdentityViolation("reversal needs u != v"));
            }
            if g.orientation() != Orientation::Directed {
                return Err(PrimitiveError::OrientationMismatch);
            }
            require_edge(g, u, v)?;
            let mut next = g.clone();
            next.remove_edge_copy(u, v);
            next.add_edge_copy(v, u);
            Ok(next)
        }
    }
}

/// An initial graph plus an ordered primitive sequence. The length of the
/// computation is the number of applications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computation {
    pub initial: MultiGraph,
    pub steps: Vec<Primitive>,
}

impl Computation {
    pub fn new(initial: MultiGraph, steps: Vec<Primitive>) -> Self {
        Computation { initial, steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A replay failure: the first step whose preconditions did not hold.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("step {index} inapplicable: {source}")]
pub struct StepFailed {
    pub index: usize,
    pub source: PrimitiveError,
}

/// Folds [`apply`] over the computation's steps and returns the final graph.
pub fn replay(c: &Computation) -> Result<MultiGraph, StepFailed> {
    let mut g = c.initial.clone();
    for (index, &p) in c.steps.iter().enumerate() {
        g = apply(&g, p).map_err(|source| StepFailed { index, source })?;
    }
    Ok(g)
}

/// Errors from [`verify`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("target shape differs from the computation's initial graph")]
    ShapeMismatch,
    #[error(transparent)]
    Replay(#[from] StepFailed),
}

/// Outcome of replaying a computation against an expected target.
#[derive(Clone, Debug)]
pub struct VerificationOutcome {
    /// True when the replayed final graph equals the target exactly, as a
    /// labeled multiset of edges.
    pub reached: bool,
    /// The graph the computation actually produces.
    pub final_graph: MultiGraph,
    /// Number of applications performed.
    pub length: usize,
    /// Edges the target has that the final graph lacks.
    pub missing: EdgeMultiset,
    /// Edges the final graph has that the target lacks.
    pub surplus: EdgeMultiset,
}

/// Replays the computation and diffs the result against `target`.
pub fn verify(c: &Computation, target: &MultiGraph) -> Result<VerificationOutcome, VerifyError> {
    if c.initial.orientation() != target.orientation()
        || c.initial.node_count() != target.node_count()
    {
        return Err(VerifyError::ShapeMismatch);
    }
    let final_graph = replay(c)?;
    let missing = target.edge_diff(&final_graph).expect("shape checked");
    let surplus = final_graph.edge_diff(target).expect("shape checked");
    Ok(VerificationOutcome {
        reached: missing.is_empty() && surplus.is_empty(),
        length: c.steps.len(),
        final_graph,
        missing,
        surplus,
    })
}

/// Exactly the primitives applicable to `g`, each once, in deterministic
/// order: introductions, then delegations, fusions, and reversals, each block
/// sorted lexicographically by operand ids. Undirected fusions are emitted
/// with the smaller applier id.
pub fn enumerate_applicable(g: &MultiGraph) -> Vec<Primitive> {
    let mut out = Vec::new();
    for u in g.nodes() {
        let outs = g.out_neighbors(u);
        for &v in &outs {
            // w ranges over u itself (self-introduction) and every other
            // reference u holds; outs never contains u, so no duplicates.
            out.push(Primitive::introduce(u, v, u));
            for &w in &outs {
                if w != v {
                    out.push(Primitive::introduce(u, v, w));
                    out.push(Primitive::delegate(u, v, w));
                }
            }
        }
    }
    for ((u, v), mult) in g.distinct_edges() {
        if mult >= 2 {
            out.push(Primitive::fuse(u, v));
        }
        if g.orientation() == Orientation::Directed {
            out.push(Primitive::reverse(u, v));
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::Orientation;

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
    fn introduction_creates_the_new_edge() {
        let g = graph(Orientation::Directed, 3, &[(0, 1, 1), (0, 2, 1)]);
        let next = apply(&g, Primitive::introduce(n(0), n(1), n(2))).unwrap();
        assert_eq!(next.multiplicity(n(1), n(2)), 1);
        assert_eq!(next.multiplicity(n(0), n(1)), 1);
        assert_eq!(next.multiplicity(n(0), n(2)), 1);
        assert_eq!(next.total_edges(), g.total_edges() + 1);
    }

    #[test]
    fn delegation_moves_the_reference() {
        let g = graph(Orientation::Directed, 3, &[(0, 1, 1), (0, 2, 1)]);
        let next = apply(&g, Primitive::delegate(n(0), n(1), n(2))).unwrap();
        assert_eq!(next.multiplicity(n(0), n(2)), 0);
        assert_eq!(next.multiplicity(n(1), n(2)), 1);
        assert_eq!(next.multiplicity(n(0), n(1)), 1);
        assert_eq!(next.total_edges(), g.total_edges());
    }

    #[test]
    fn fusion_drops_one_duplicate() {
        let g = graph(Orientation::Undirected, 2, &[(0, 1, 2)]);
        let next = apply(&g, Primitive::fuse(n(0), n(1))).unwrap();
        assert_eq!(next.multiplicity(n(0), n(1)), 1);
        // Either endpoint may be named as the applier.
        let next2 = apply(&g, Primitive::fuse(n(1), n(0))).unwrap();
        assert_eq!(next2, next);
    }

    #[test]
    fn reversal_flips_one_copy() {
        let g = graph(Orientation::Directed, 2, &[(0, 1, 1)]);
        let next = apply(&g, Primitive::reverse(n(0), n(1))).unwrap();
        assert_eq!(next.multiplicity(n(0), n(1)), 0);
        assert_eq!(next.multiplicity(n(1), n(0)), 1);
    }

    #[test]
    fn self_introduction_duplicates_the_shared_edge() {
        let g = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        let next = apply(&g, Primitive::introduce(n(0), n(1), n(0))).unwrap();
        assert_eq!(next.multiplicity(n(0), n(1)), 2);
    }

    #[test]
    fn preconditions_are_enforced() {
        let g = graph(Orientation::Undirected, 3, &[(0, 1, 1)]);
        assert_eq!(
            apply(&g, Primitive::introduce(n(0), n(1), n(2))).unwrap_err(),
            PrimitiveError::MissingOperandEdge(n(0), n(2))
        );
        assert_eq!(
            apply(&g, Primitive::fuse(n(0), n(1))).unwrap_err(),
            PrimitiveError::InsufficientMultiplicity(n(0), n(1), 1)
        );
        assert_eq!(
            apply(&g, Primitive::reverse(n(0), n(1))).unwrap_err(),
            PrimitiveError::OrientationMismatch
        );
        assert!(matches!(
            apply(&g, Primitive::introduce(n(0), n(0), n(1))).unwrap_err(),
            PrimitiveError::IdentityViolation(_)
        ));
        assert!(matches!(
            apply(&g, Primitive::delegate(n(0), n(1), n(1))).unwrap_err(),
            PrimitiveError::IdentityViolation(_)
        ));
        assert!(matches!(
            apply(&g, Primitive::introduce(n(0), n(1), n(7))).unwrap_err(),
            PrimitiveError::InvalidNode(_, 3)
        ));
    }

    #[test]
    fn replay_and_verify_on_the_delegation_shortcut() {
        // Two-edge path 0-1, 1-2; delegating {0,1} from 1 to 2 yields the
        // target in a single step.
        let gs = graph(Orientation::Undirected, 3, &[(0, 1, 1), (1, 2, 1)]);
        let gt = graph(Orientation::Undirected, 3, &[(0, 2, 1), (1, 2, 1)]);
        let c = Computation::new(gs, vec![Primitive::delegate(n(1), n(2), n(0))]);
        let outcome = verify(&c, &gt).unwrap();
        assert!(outcome.reached);
        assert_eq!(outcome.length, 1);

        let empty = Computation::new(gt.clone(), vec![]);
        let outcome = verify(&empty, &gt).unwrap();
        assert!(outcome.reached);
        assert_eq!(outcome.length, 0);

        let gs2 = graph(Orientation::Undirected, 3, &[(0, 1, 1), (1, 2, 1)]);
        let stuck = Computation::new(gs2, vec![]);
        let outcome = verify(&stuck, &gt).unwrap();
        assert!(!outcome.reached);
        assert_eq!(outcome.missing.total(), 1);
        assert_eq!(outcome.surplus.total(), 1);
    }

    #[test]
    fn replay_reports_first_failing_step() {
        let g = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        let c = Computation::new(
            g,
            vec![
                Primitive::introduce(n(0), n(1), n(0)),
                Primitive::fuse(n(0), n(1)),
                Primitive::fuse(n(0), n(1)),
            ],
        );
        let err = replay(&c).unwrap_err();
        assert_eq!(err.index, 2);
        assert_eq!(
            err.source,
            PrimitiveError::InsufficientMultiplicity(n(0), n(1), 1)
        );
    }

    #[test]
    fn enumeration_lists_exactly_the_applicable_primitives() {
        let g = graph(Orientation::Undirected, 2, &[(0, 1, 1)]);
        assert_eq!(
            enumerate_applicable(&g),
            vec![
                Primitive::introduce(n(0), n(1), n(0)),
                Primitive::introduce(n(1), n(0), n(1)),
            ]
        );

        let d = graph(Orientation::Directed, 2, &[(0, 1, 1)]);
        assert_eq!(
            enumerate_applicable(&d),
            vec![
                Primitive::introduce(n(0), n(1), n(0)),
                Primitive::reverse(n(0), n(1)),
            ]
        );

        let lonely = MultiGraph::new(Orientation::Undirected, 1).unwrap();
        assert!(enumerate_applicable(&lonely).is_empty());
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        let g = graph(
            Orientation::Undirected,
            4,
            &[(0, 1, 2), (1, 2, 1), (2, 3, 1)],
        );
        let listed = enumerate_applicable(&g);
        let mut sorted = listed.clone();
        sorted.sort_unstable();
        assert_eq!(listed, sorted);
        for &p in &listed {
            assert!(apply(&g, p).is_ok(), "listed primitive {p} must apply");
        }
        // A brute scan over all operand triples finds nothing extra.
        let mut count = 0usize;
        for u in 0..4u32 {
            for v in 0..4u32 {
                for w in 0..4u32 {
                    if apply(&g, Primitive::introduce(n(u), n(v), n(w))).is_ok() {
                        count += 1;
                    }
                    if apply(&g, Primitive::delegate(n(u), n(v), n(w))).is_ok() {
                        count += 1;
                    }
                }
                if u < v && apply(&g, Primitive::fuse(n(u), n(v))).is_ok() {
                    count += 1;
                }
            }
        }
        assert_eq!(count, listed.len());
    }
}
