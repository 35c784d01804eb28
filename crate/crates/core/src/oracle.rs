//! Exact shortest-computation search over the space of labeled multigraphs.
//!
//! `opt_search` runs plain breadth-first search from the start graph,
//! branching over every applicable primitive and deduplicating states by
//! canonical key, so the first hit on the goal is a minimum-length
//! computation. `decide_k` answers the length-at-most-k question with the
//! same semantics but meets in the middle: it alternates forward expansion
//! with backward expansion over primitive preimages and prunes states that
//! provably cannot reach the other side within the remaining budget (one
//! application changes the edge multiset by at most two copies).
//!
//! Both searches confine themselves to states whose total edge count stays
//! within `max_total_edges`; introduction can inflate multiplicities without
//! bound, so some cap is required for termination. Results are exact within
//! that cap (a goal beyond it is simply unreachable), and `truncated` is set
//! only when the `max_states` memory guard stops the search early.

use std::collections::HashMap;

use thiserror::Error;

use crate::multigraph::{MultiGraph, NodeId, Orientation};
use crate::primitive::{apply, enumerate_applicable, Computation, Primitive};

/// Search guards: a memory limit and an intermediate edge-count cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_states: usize,
    pub max_total_edges: u64,
}

impl SearchLimits {
    pub const DEFAULT_MAX_STATES: usize = 5_000_000;

    /// Default limits for a start/goal pair: the larger total edge count
    /// plus slack of 4, and the standard state guard.
    pub fn defaults_for(start: &MultiGraph, goal: &MultiGraph) -> Self {
        SearchLimits {
            max_states: Self::DEFAULT_MAX_STATES,
            max_total_edges: start.total_edges().max(goal.total_edges()) + 4,
        }
    }

    pub fn with_max_states(mut self, max_states: usize) -> Self {
        self.max_states = max_states;
        self
    }

    pub fn with_edge_cap(mut self, max_total_edges: u64) -> Self {
        self.max_total_edges = max_total_edges;
        self
    }
}

/// A shortest-computation question: is there a computation from `start` to
/// `goal` of length at most `max_depth`, staying within `limits`?
#[derive(Clone, Debug)]
pub struct OracleQuery {
    pub start: MultiGraph,
    pub goal: MultiGraph,
    pub max_depth: u32,
    pub limits: SearchLimits,
}

/// Errors from query validation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("start and goal must share orientation and node count")]
    InvalidQuery,
    #[error("start graph must be connected")]
    DisconnectedStart,
}

impl OracleQuery {
    pub fn new(start: MultiGraph, goal: MultiGraph, max_depth: u32) -> Result<Self, OracleError> {
        let limits = SearchLimits::defaults_for(&start, &goal);
        Self::with_limits(start, goal, max_depth, limits)
    }

    pub fn with_limits(
        start: MultiGraph,
        goal: MultiGraph,
        max_depth: u32,
        limits: SearchLimits,
    ) -> Result<Self, OracleError> {
        if start.orientation() != goal.orientation() || start.node_count() != goal.node_count() {
            return Err(OracleError::InvalidQuery);
        }
        if !start.is_connected() {
            return Err(OracleError::DisconnectedStart);
        }
        Ok(OracleQuery {
            start,
            goal,
            max_depth,
            limits,
        })
    }

    fn validate(&self) -> Result<(), OracleError> {
        if self.start.orientation() != self.goal.orientation()
            || self.start.node_count() != self.goal.node_count()
        {
            return Err(OracleError::InvalidQuery);
        }
        if !self.start.is_connected() {
            return Err(OracleError::DisconnectedStart);
        }
        Ok(())
    }
}

/// Outcome of [`opt_search`]. `distance` and `witness` are meaningful only
/// when `found`; `explored` counts deduplicated states including the start.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub found: bool,
    pub distance: u32,
    pub witness: Computation,
    pub explored: usize,
    pub truncated: bool,
}

impl OracleResult {
    fn not_found(start: &MultiGraph, explored: usize, truncated: bool) -> Self {
        OracleResult {
            found: false,
            distance: 0,
            witness: Computation::new(start.clone(), Vec::new()),
            explored,
            truncated,
        }
    }
}

/// Outcome of [`decide_k_detailed`]: `reachable` is conservative (may be
/// false despite a solution) only when `truncated` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionOutcome {
    pub reachable: bool,
    pub explored: usize,
    pub truncated: bool,
}

/// Whether the goal lies outside the searched space regardless of depth:
/// beyond the edge cap, or disconnected (no primitive application ever
/// changes the component partition, so connectivity is invariant).
fn goal_unreachable(q: &OracleQuery) -> bool {
    q.goal.total_edges() > q.limits.max_total_edges || !q.goal.is_connected()
}

/// Breadth-first search for a shortest computation from `q.start` to
/// `q.goal` of length at most `q.max_depth`. Exact within the edge cap; the
/// witness replays to the goal in exactly `distance` steps.
pub fn opt_search(q: &OracleQuery) -> Result<OracleResult, OracleError> {
    q.validate()?;
    let goal_key = q.goal.canonical_key();
    let start_key = q.start.canonical_key();
    if start_key == goal_key {
        return Ok(OracleResult {
            found: true,
            distance: 0,
            witness: Computation::new(q.start.clone(), Vec::new()),
            explored: 1,
            truncated: false,
        });
    }
    if goal_unreachable(q) {
        return Ok(OracleResult::not_found(&q.start, 1, false));
    }

    let mut parents: HashMap<Vec<u8>, (Vec<u8>, Primitive)> = HashMap::new();
    let mut visited: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    visited.insert(start_key.clone());
    if visited.len() >= q.limits.max_states {
        return Ok(OracleResult::not_found(&q.start, visited.len(), true));
    }
    let mut frontier = vec![q.start.clone()];

    for depth in 1..=q.max_depth {
        let mut next = Vec::new();
        for g in &frontier {
            let g_key = g.canonical_key();
            for p in enumerate_applicable(g) {
                let h = apply(g, p).expect("enumerated primitives apply");
                if h.total_edges() > q.limits.max_total_edges {
                    continue;
                }
                let key = h.canonical_key();
                if !visited.insert(key.clone()) {
                    continue;
                }
                parents.insert(key.clone(), (g_key.clone(), p));
                if key == goal_key {
                    let mut steps = Vec::new();
                    let mut cursor = key;
                    while cursor != start_key {
                        let (prev, step) = parents.get(&cursor).expect("chained parent").clone();
                        steps.push(step);
                        cursor = prev;
                    }
                    steps.reverse();
                    return Ok(OracleResult {
                        found: true,
                        distance: depth,
                        witness: Computation::new(q.start.clone(), steps),
                        explored: visited.len(),
                        truncated: false,
                    });
                }
                if visited.len() >= q.limits.max_states {
                    return Ok(OracleResult::not_found(&q.start, visited.len(), true));
                }
                next.push(h);
            }
        }
        if next.is_empty() {
            return Ok(OracleResult::not_found(&q.start, visited.len(), false));
        }
        frontier = next;
    }
    Ok(OracleResult::not_found(&q.start, visited.len(), false))
}

/// True iff a computation of length at most `k` exists (within the query's
/// limits). Equivalent to `opt_search` with `max_depth = k` but searched
/// bidirectionally; a conservative false is possible only under truncation,
/// which [`decide_k_detailed`] surfaces.
pub fn decide_k(q: &OracleQuery, k: u32) -> Result<bool, OracleError> {
    Ok(decide_k_detailed(q, k)?.reachable)
}

/// Meet-in-the-middle variant of the length-at-most-k decision, with the
/// symmetric-difference lower bound as an admissible prune on both sides.
pub fn decide_k_detailed(q: &OracleQuery, k: u32) -> Result<DecisionOutcome, OracleError> {
    q.validate()?;
    if q.start.canonical_key() == q.goal.canonical_key() {
        return Ok(DecisionOutcome {
            reachable: true,
            explored: 1,
            truncated: false,
        });
    }
    if k == 0 || goal_unreachable(q) {
        return Ok(DecisionOutcome {
            reachable: false,
            explored: 1,
            truncated: false,
        });
    }

    let mut forward = Side::new(&q.start, &q.goal);
    let mut backward = Side::new(&q.goal, &q.start);

    while forward.depth + backward.depth < k
        && !forward.frontier.is_empty()
        && !backward.frontier.is_empty()
    {
        let explored = forward.dist.len() + backward.dist.len();
        if explored >= q.limits.max_states {
            return Ok(DecisionOutcome {
                reachable: false,
                explored,
                truncated: true,
            });
        }
        let met = if forward.frontier.len() <= backward.frontier.len() {
            forward.expand(k, q.limits.max_total_edges, Direction::Forward, &backward)
        } else {
            backward.expand(k, q.limits.max_total_edges, Direction::Backward, &forward)
        };
        if met {
            return Ok(DecisionOutcome {
                reachable: true,
                explored: forward.dist.len() + backward.dist.len(),
                truncated: false,
            });
        }
    }
    Ok(DecisionOutcome {
        reachable: false,
        explored: forward.dist.len() + backward.dist.len(),
        truncated: false,
    })
}

enum Direction {
    Forward,
    Backward,
}

struct Side {
    dist: HashMap<Vec<u8>, u32>,
    frontier: Vec<MultiGraph>,
    depth: u32,
    /// The other end of the overall query, for the admissible prune.
    far_end: MultiGraph,
}

impl Side {
    fn new(origin: &MultiGraph, far_end: &MultiGraph) -> Self {
        let mut dist = HashMap::new();
        dist.insert(origin.canonical_key(), 0);
        Side {
            dist,
            frontier: vec![origin.clone()],
            depth: 0,
            far_end: far_end.clone(),
        }
    }

    /// Expands one layer. Returns true when a newly inserted state already
    /// appears on the other side with a combined distance within k.
    fn expand(&mut self, k: u32, edge_cap: u64, direction: Direction, other: &Side) -> bool {
        let new_depth = self.depth + 1;
        let budget = k - new_depth;
        let mut next = Vec::new();
        for g in &std::mem::take(&mut self.frontier) {
            let successors = match direction {
                Direction::Forward => enumerate_applicable(g)
                    .into_iter()
                    .map(|p| apply(g, p).expect("enumerated primitives apply"))
                    .collect::<Vec<_>>(),
                Direction::Backward => enumerate_predecessors(g, edge_cap),
            };
            for h in successors {
                if h.total_edges() > edge_cap {
                    continue;
                }
                let lower_bound = h.symmetric_difference_total(&self.far_end).div_ceil(2);
                if lower_bound > u64::from(budget) {
                    continue;
                }
                let key = h.canonical_key();
                if self.dist.contains_key(&key) {
                    continue;
                }
                if let Some(&d_other) = other.dist.get(&key) {
                    if new_depth + d_other <= k {
                        return true;
                    }
                }
                self.dist.insert(key, new_depth);
                next.push(h);
            }
        }
        self.frontier = next;
        self.depth = new_depth;
        false
    }
}

/// All graphs from which one primitive application yields `h`, deduplicated.
/// Connectivity needs no check: no primitive changes the component
/// partition, so preimages of a connected graph are connected. Preimages
/// whose total edge count would exceed `edge_cap` are skipped.
pub fn enumerate_predecessors(h: &MultiGraph, edge_cap: u64) -> Vec<MultiGraph> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut push = |g: MultiGraph| {
        if seen.insert(g.canonical_key()) {
            out.push(g);
        }
    };
    let directed = h.orientation() == Orientation::Directed;
    let distinct: Vec<(NodeId, NodeId)> = h.distinct_edges().map(|(key, _)| key).collect();
    let nodes: Vec<NodeId> = h.nodes().collect();

    for &(a, b) in &distinct {
        let roles: &[(NodeId, NodeId)] = if directed {
            &[(a, b)]
        } else {
            &[(a, b), (b, a)]
        };
        // Introduce(u, v, w) created one copy of (v, w).
        for &(v, w) in roles {
            let mut g = h.clone();
            g.remove_edge_copy(v, w);
            let applier_exists = nodes.iter().any(|&u| {
                u != v && g.multiplicity(u, v) >= 1 && (u == w || g.multiplicity(u, w) >= 1)
            });
            if applier_exists {
                push(g);
            }
        }
        // Delegate(u, v, w) moved a copy of (u, w) to (v, w).
        for &(v, w) in roles {
            for &u in &nodes {
                if u == v || u == w || h.multiplicity(u, v) == 0 {
                    continue;
                }
                let mut g = h.clone();
                g.remove_edge_copy(v, w);
                g.add_edge_copy(u, w);
                push(g);
            }
        }
        // Fuse(a, b) removed one of at least two copies.
        if h.total_edges() < edge_cap {
            let mut g = h.clone();
            g.add_edge_copy(a, b);
            push(g);
        }
        // Reverse(b, a) turned (b, a) into (a, b).
        if directed {
            let mut g = h.clone();
            g.remove_edge_copy(a, b);
            g.add_edge_copy(b, a);
            push(g);
        }
    }
    out
}

/// Result of [`reachable_distances`]: shortest distances from one start to
/// every state reachable within the edge cap, keyed by canonical key.
#[derive(Clone, Debug)]
pub struct ReachableSet {
    pub distances: HashMap<Vec<u8>, u32>,
    pub truncated: bool,
}

impl ReachableSet {
    pub fn distance_of(&self, g: &MultiGraph) -> Option<u32> {
        self.distances.get(&g.canonical_key()).copied()
    }
}

/// Exhaustive breadth-first closure from `start` under the edge cap: the
/// distance map answers every shortest-length query from this start at once.
/// The state space is finite (bounded nodes, bounded total edges), so
/// without truncation the map is complete.
pub fn reachable_distances(
    start: &MultiGraph,
    limits: &SearchLimits,
) -> Result<ReachableSet, OracleError> {
    if !start.is_connected() {
        return Err(OracleError::DisconnectedStart);
    }
    let mut distances = HashMap::new();
    distances.insert(start.canonical_key(), 0u32);
    let mut frontier = vec![start.clone()];
    let mut depth = 0u32;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for g in &frontier {
            for p in enumerate_applicable(g) {
                let h = apply(g, p).expect("enumerated primitives apply");
                if h.total_edges() > limits.max_total_edges {
                    continue;
                }
                let key = h.canonical_key();
                if distances.contains_key(&key) {
                    continue;
                }
                distances.insert(key, depth);
                if distances.len() >= limits.max_states {
                    return Ok(ReachableSet {
                        distances,
                        truncated: true,
                    });
                }
                next.push(h);
            }
        }
        frontier = next;
    }
    Ok(ReachableSet {
        distances,
        truncated: false,
    })
}
