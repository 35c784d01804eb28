//! Two-part transformation planning between connected multigraphs.
//!
//! [`plan_ulgt`] and [`plan_dlgt`] produce a primitive sequence carrying an
//! initial graph to a target graph over the same node set. The first part
//! introduces every additional edge: a Steiner forest over the
//! additional-edge endpoints is rooted per tree, connector references travel
//! from each root to the relevant endpoints, the root introduces the missing
//! edges, and a bottom-up sweep fuses and delegates the leftover references
//! away. The second part mirrors the first on the target graph's excess
//! edges, removing them by delegation toward the roots. Directed plans
//! additionally reverse tree edges and connectors into the orientations each
//! step needs and restore the prescribed orientations afterwards.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::multigraph::{EdgeMultiset, MultiGraph, NodeId, Orientation};
use crate::primitive::{self, Computation, Primitive};
use crate::steiner::{self, Forest, TerminalPairs, Tree};

/// Errors from planning and from the rooted-tree operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("input graphs must both be connected")]
    DisconnectedInput,
    #[error("input graphs must share one node set")]
    NodeSetMismatch,
    #[error("planner requires {expected} input graphs")]
    OrientationMismatch { expected: Orientation },
    #[error("root {0} is not a node of the tree")]
    RootOutsideTree(NodeId),
    #[error("target {0} is not a node of the tree")]
    TargetOutsideTree(NodeId),
    #[error("tree edge {parent} -> {child} is missing from the graph")]
    MissingTreeEdge { parent: NodeId, child: NodeId },
    #[error("planned sequence failed to replay onto the target")]
    ReplayMismatch,
}

/// Planner switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlanOptions {
    /// Skip building a connector for a target that already holds a usable
    /// edge to its root in the prescribing graph: the initial graph during
    /// the first part, the target graph during the second. Off by default.
    pub reuse_root_edges: bool,
}

/// How connector references will be consumed by the surrounding plan: toward
/// the endpoints (the root then introduces edges between them) or from the
/// endpoints (each endpoint then delegates an excess edge to the root). Both
/// modes build the same subsequence; they differ in the new-edge allowance
/// the caller may assume, `2 * |targets|` and `|targets|` respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectMode {
    ToEndpoints,
    FromEndpoints,
}

/// A forest tree rooted at a chosen node: per-node parent, children, depth,
/// and relevance. A node is relevant when its subtree contains a target; the
/// root itself never counts as a target.
#[derive(Clone, Debug)]
pub struct RootedTree {
    root: NodeId,
    parent: BTreeMap<NodeId, NodeId>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    depth: BTreeMap<NodeId, u32>,
    targets: BTreeSet<NodeId>,
    relevant: BTreeSet<NodeId>,
}

impl RootedTree {
    pub fn new(tree: &Tree, root: NodeId, targets: &BTreeSet<NodeId>) -> Result<Self, PlanError> {
        if !tree.nodes.contains(&root) {
            return Err(PlanError::RootOutsideTree(root));
        }
        if let Some(&bad) = targets.iter().find(|t| !tree.nodes.contains(t)) {
            return Err(PlanError::TargetOutsideTree(bad));
        }
        let mut adjacency: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for &(u, v) in &tree.edges {
            adjacency.entry(u).or_default().insert(v);
            adjacency.entry(v).or_default().insert(u);
        }
        let mut parent = BTreeMap::new();
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut depth = BTreeMap::new();
        depth.insert(root, 0u32);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let d = depth[&x];
            for &y in adjacency.get(&x).into_iter().flatten() {
                if depth.contains_key(&y) {
                    continue;
                }
                depth.insert(y, d + 1);
                parent.insert(y, x);
                children.entry(x).or_default().push(y);
                queue.push_back(y);
            }
        }
        debug_assert_eq!(depth.len(), tree.nodes.len());
        let mut rooted = RootedTree {
            root,
            parent,
            children,
            depth,
            targets: BTreeSet::new(),
            relevant: BTreeSet::new(),
        };
        rooted.set_targets(targets);
        Ok(rooted)
    }

    fn set_targets(&mut self, targets: &BTreeSet<NodeId>) {
        self.targets = targets
            .iter()
            .copied()
            .filter(|&t| t != self.root)
            .collect();
        self.relevant.clear();
        for t in self.targets.clone() {
            let mut cursor = t;
            while self.relevant.insert(cursor) {
                match self.parent.get(&cursor) {
                    Some(&p) => cursor = p,
                    None => break,
                }
            }
        }
    }

    fn with_targets(&self, targets: &BTreeSet<NodeId>) -> RootedTree {
        let mut out = self.clone();
        out.set_targets(targets);
        out
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.depth.contains_key(&n)
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent.get(&n).copied()
    }

    /// Children of `n` in increasing id order.
    pub fn children(&self, n: NodeId) -> &[NodeId] {
        self.children.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn depth(&self, n: NodeId) -> Option<u32> {
        self.depth.get(&n).copied()
    }

    /// Whether the subtree at `n` (including `n`) contains a target.
    pub fn relevant(&self, n: NodeId) -> bool {
        self.relevant.contains(&n)
    }

    pub fn is_target(&self, n: NodeId) -> bool {
        self.targets.contains(&n)
    }

    /// Tree nodes in increasing id order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.depth.keys().copied()
    }

    /// `(child, parent)` pairs in increasing child order.
    fn tree_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent.iter().map(|(&c, &p)| (c, p))
    }

    /// Nodes grouped by depth, each group in increasing id order. Index 0
    /// holds the root.
    fn levels(&self) -> Vec<Vec<NodeId>> {
        let max = self.depth.values().copied().max().unwrap_or(0);
        let mut levels = vec![Vec::new(); max as usize + 1];
        for (&n, &d) in &self.depth {
            levels[d as usize].push(n);
        }
        levels
    }
}

/// Assigns each excess edge the endpoint responsible for removing it: the
/// source of a directed edge, the smaller endpoint of an undirected one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcessAnchor {
    orientation: Orientation,
    anchors: BTreeMap<(NodeId, NodeId), NodeId>,
}

impl ExcessAnchor {
    pub fn for_excess(excess: &EdgeMultiset) -> Self {
        ExcessAnchor {
            orientation: excess.orientation(),
            anchors: excess.iter().map(|((u, v), _)| ((u, v), u)).collect(),
        }
    }

    /// The anchor of a distinct excess edge, if the edge is in the set.
    pub fn anchor_of(&self, u: NodeId, v: NodeId) -> Option<NodeId> {
        let key = match self.orientation {
            Orientation::Directed => (u, v),
            Orientation::Undirected => (u.min(v), u.max(v)),
        };
        self.anchors.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((NodeId, NodeId), NodeId)> + '_ {
        self.anchors.iter().map(|(&e, &a)| (e, a))
    }
}

/// Per-step primitive tallies for one plan. The reversal fields stay zero
/// for undirected plans; `step2_tree_reversals` is the count of tree edges
/// the first part had to reorient away from the root.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub step2_intro: u64,
    pub step2_deleg: u64,
    pub step2_tree_reversals: u64,
    pub step2_connector_reversals: u64,
    pub step3_intro: u64,
    pub step4_deleg: u64,
    pub step4_fuse: u64,
    pub step4_reversals: u64,
    pub step6_intro: u64,
    pub step6_deleg: u64,
    pub step6_tree_reversals: u64,
    pub step7_deleg: u64,
    pub step7_fuse: u64,
    pub step8_deleg: u64,
    pub step8_fuse: u64,
    pub step8_reversals: u64,
}

impl StepCounts {
    /// Primitives spent introducing the additional edges.
    pub fn part1_total(&self) -> u64 {
        self.step2_intro
            + self.step2_deleg
            + self.step2_tree_reversals
            + self.step2_connector_reversals
            + self.step3_intro
            + self.step4_deleg
            + self.step4_fuse
            + self.step4_reversals
    }

    /// Primitives spent removing the excess edges.
    pub fn part2_total(&self) -> u64 {
        self.step6_intro
            + self.step6_deleg
            + self.step6_tree_reversals
            + self.step7_deleg
            + self.step7_fuse
            + self.step8_deleg
            + self.step8_fuse
            + self.step8_reversals
    }
}

/// Instance measurements the length bounds are stated against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PlanSizes {
    /// Additional edges (target minus initial), counted with multiplicity.
    pub e_plus: u64,
    /// Excess edges (initial minus target), counted with multiplicity.
    pub e_minus: u64,
    /// Edges in the Steiner forest over the additional-edge endpoints.
    pub forest_plus: usize,
    /// Edges in the Steiner forest over the excess-edge endpoints.
    pub forest_minus: usize,
}

/// Guaranteed length bounds for the two parts of a plan. Undirected parts
/// are bounded by `2F + 3E` (forest edges, difference edges with
/// multiplicity); directed parts add `2F + 4E` and `2F + E` respectively for
/// the reorientation work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanBounds {
    pub part1_len: u64,
    pub part1_bound: u64,
    pub part2_len: u64,
    pub part2_bound: u64,
    pub bounds_ok: bool,
}

/// A verified plan: the primitive sequence plus its accounting.
#[derive(Clone, Debug)]
pub struct PlanReport {
    pub computation: Computation,
    pub counts: StepCounts,
    pub sizes: PlanSizes,
    pub bounds: PlanBounds,
}

impl PlanReport {
    /// Number of primitives in the plan.
    pub fn len(&self) -> usize {
        self.computation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.computation.is_empty()
    }
}

/// Plans an undirected transformation from `gs` to `gt`.
pub fn plan_ulgt(gs: &MultiGraph, gt: &MultiGraph) -> Result<PlanReport, PlanError> {
    plan_ulgt_with(gs, gt, PlanOptions::default())
}

/// Plans an undirected transformation with explicit options.
pub fn plan_ulgt_with(
    gs: &MultiGraph,
    gt: &MultiGraph,
    options: PlanOptions,
) -> Result<PlanReport, PlanError> {
    if gs.orientation() != Orientation::Undirected || gt.orientation() != Orientation::Undirected {
        return Err(PlanError::OrientationMismatch {
            expected: Orientation::Undirected,
        });
    }
    plan(gs, gt, options)
}

/// Plans a directed transformation from `gs` to `gt`.
pub fn plan_dlgt(gs: &MultiGraph, gt: &MultiGraph) -> Result<PlanReport, PlanError> {
    plan_dlgt_with(gs, gt, PlanOptions::default())
}

/// Plans a directed transformation with explicit options.
pub fn plan_dlgt_with(
    gs: &MultiGraph,
    gt: &MultiGraph,
    options: PlanOptions,
) -> Result<PlanReport, PlanError> {
    if gs.orientation() != Orientation::Directed || gt.orientation() != Orientation::Directed {
        return Err(PlanError::OrientationMismatch {
            expected: Orientation::Directed,
        });
    }
    plan(gs, gt, options)
}

/// Gives every target a connector edge to the tree root, spending at most
/// one primitive per tree edge: the root self-introduces to its relevant
/// children; below that, targets introduce the reference to each relevant
/// child and keep their own copy, while pass-through nodes introduce to all
/// but the last relevant child and delegate their copy to it. Directed
/// graphs must already hold every tree edge oriented from parent to child.
pub fn connect_to_root(
    g: &MultiGraph,
    t: &RootedTree,
    targets: &BTreeSet<NodeId>,
    mode: ConnectMode,
) -> Result<(MultiGraph, Vec<Primitive>), PlanError> {
    if let Some(&bad) = targets.iter().find(|n| !t.contains(**n)) {
        return Err(PlanError::TargetOutsideTree(bad));
    }
    for (c, p) in t.tree_edges() {
        if g.multiplicity(p, c) == 0 {
            return Err(PlanError::MissingTreeEdge {
                parent: p,
                child: c,
            });
        }
    }
    let rooted = t.with_targets(targets);
    let mut cur = g.clone();
    let mut steps = Vec::new();
    connect(&mut cur, &rooted, &mut steps);
    let new_edges = cur.total_edges() - g.total_edges();
    let allowed = match mode {
        ConnectMode::ToEndpoints => 2 * rooted.targets.len() as u64,
        ConnectMode::FromEndpoints => rooted.targets.len() as u64,
    };
    debug_assert_eq!(new_edges, rooted.targets.len() as u64);
    debug_assert!(new_edges <= allowed);
    Ok((cur, steps))
}

fn plan(gs: &MultiGraph, gt: &MultiGraph, options: PlanOptions) -> Result<PlanReport, PlanError> {
    if gs.node_count() != gt.node_count() {
        return Err(PlanError::NodeSetMismatch);
    }
    if !gs.is_connected() || !gt.is_connected() {
        return Err(PlanError::DisconnectedInput);
    }
    let orientation = gs.orientation();
    let e_plus = gt.edge_diff(gs).expect("validated shape");
    let e_minus = gs.edge_diff(gt).expect("validated shape");

    let mut g_prime = gs.clone();
    for ((u, v), m) in e_plus.iter() {
        g_prime
            .add_edge(u, v, m)
            .expect("additional edges fit the node set");
    }

    let mut cur = gs.clone();
    let mut steps = Vec::new();
    let mut counts = StepCounts::default();

    let forest_plus = if e_plus.is_empty() {
        0
    } else {
        let setup = prepare_part(gs, &e_plus);
        for (tree, pairs) in &setup.jobs {
            run_part1_tree(
                &mut cur,
                tree,
                pairs,
                gs,
                &g_prime,
                options,
                &mut counts,
                &mut steps,
            )?;
        }
        setup.forest.edge_count()
    };
    if cur != g_prime {
        return Err(PlanError::ReplayMismatch);
    }

    let forest_minus = if e_minus.is_empty() {
        0
    } else {
        let anchors = ExcessAnchor::for_excess(&e_minus);
        let setup = prepare_part(gt, &e_minus);
        for (tree, pairs) in &setup.jobs {
            run_part2_tree(
                &mut cur,
                tree,
                pairs,
                gt,
                &anchors,
                options,
                &mut counts,
                &mut steps,
            )?;
        }
        setup.forest.edge_count()
    };
    if cur != *gt {
        return Err(PlanError::ReplayMismatch);
    }

    let computation = Computation::new(gs.clone(), steps);
    let verified = primitive::verify(&computation, gt).map_err(|_| PlanError::ReplayMismatch)?;
    if !verified.reached {
        return Err(PlanError::ReplayMismatch);
    }

    let sizes = PlanSizes {
        e_plus: e_plus.total(),
        e_minus: e_minus.total(),
        forest_plus,
        forest_minus,
    };
    let bounds = make_bounds(orientation, &counts, &sizes);
    debug_assert!(bounds.bounds_ok);
    debug_assert_eq!(
        computation.len() as u64,
        bounds.part1_len + bounds.part2_len
    );
    Ok(PlanReport {
        computation,
        counts,
        sizes,
        bounds,
    })
}

fn make_bounds(orientation: Orientation, counts: &StepCounts, sizes: &PlanSizes) -> PlanBounds {
    let fp = sizes.forest_plus as u64;
    let fm = sizes.forest_minus as u64;
    let (part1_bound, part2_bound) = match orientation {
        Orientation::Undirected => (2 * fp + 3 * sizes.e_plus, 2 * fm + 3 * sizes.e_minus),
        Orientation::Directed => (4 * fp + 7 * sizes.e_plus, 4 * fm + 4 * sizes.e_minus),
    };
    let part1_len = counts.part1_total();
    let part2_len = counts.part2_total();
    PlanBounds {
        part1_len,
        part1_bound,
        part2_len,
        part2_bound,
        bounds_ok: part1_len <= part1_bound && part2_len <= part2_bound,
    }
}

/// One planning unit: a forest tree and the difference edges it resolves,
/// each as (endpoint, endpoint, multiplicity).
type TreeJob = (Tree, Vec<(NodeId, NodeId, u32)>);

struct PartSetup {
    forest: Forest,
    jobs: Vec<TreeJob>,
}

fn prepare_part(base: &MultiGraph, edges: &EdgeMultiset) -> PartSetup {
    let pairs = TerminalPairs::new(edges.iter().map(|((u, v), _)| (u, v)))
        .expect("difference edges are never self-loops");
    let forest = match base.orientation() {
        Orientation::Undirected => steiner::steiner_forest_apx(base, &pairs),
        Orientation::Directed => {
            let projection = base.undirected_projection().expect("directed base");
            steiner::steiner_forest_apx(&projection, &pairs)
        }
    }
    .expect("validated connected input with in-range terminals");
    let trees = forest.trees();
    let mut node_tree: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (i, tree) in trees.iter().enumerate() {
        for &node in &tree.nodes {
            node_tree.insert(node, i);
        }
    }
    let mut buckets: Vec<Vec<(NodeId, NodeId, u32)>> = vec![Vec::new(); trees.len()];
    for ((u, v), m) in edges.iter() {
        let i = *node_tree.get(&u).expect("terminal joined to a forest tree");
        debug_assert_eq!(node_tree.get(&v), Some(&i));
        buckets[i].push((u, v, m));
    }
    PartSetup {
        forest,
        jobs: trees.into_iter().zip(buckets).collect(),
    }
}

/// Picks the tree node with the most tree-neighbors among the terminal-edge
/// endpoints, breaking ties toward the smallest id.
fn select_root(tree: &Tree, endpoints: &BTreeSet<NodeId>) -> NodeId {
    let mut adjacency: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &(u, v) in &tree.edges {
        adjacency.entry(u).or_default().insert(v);
        adjacency.entry(v).or_default().insert(u);
    }
    let mut best = *tree.nodes.iter().next().expect("trees are never empty");
    let mut best_score = 0usize;
    for &n in &tree.nodes {
        let score = adjacency
            .get(&n)
            .map(|ns| ns.iter().filter(|c| endpoints.contains(c)).count())
            .unwrap_or(0);
        if score > best_score {
            best = n;
            best_score = score;
        }
    }
    best
}

fn emit(cur: &mut MultiGraph, steps: &mut Vec<Primitive>, p: Primitive) {
    *cur = primitive::apply(cur, p).expect("planner emitted an applicable primitive");
    steps.push(p);
}

fn fuse_prim(orientation: Orientation, x: NodeId, root: NodeId) -> Primitive {
    match orientation {
        Orientation::Directed => Primitive::fuse(x, root),
        Orientation::Undirected => Primitive::fuse(x.min(root), x.max(root)),
    }
}

#[derive(Default)]
struct ConnectTally {
    intro: u64,
    deleg: u64,
}

fn connect(cur: &mut MultiGraph, rooted: &RootedTree, steps: &mut Vec<Primitive>) -> ConnectTally {
    let mut tally = ConnectTally::default();
    let root = rooted.root();
    for (d, level) in rooted.levels().iter().enumerate() {
        for &x in level {
            let relevant_children: Vec<NodeId> = rooted
                .children(x)
                .iter()
                .copied()
                .filter(|&c| rooted.relevant(c))
                .collect();
            if d == 0 {
                for &c in &relevant_children {
                    emit(cur, steps, Primitive::introduce(root, c, root));
                    tally.intro += 1;
                }
            } else if rooted.relevant(x) && !relevant_children.is_empty() {
                if rooted.is_target(x) {
                    for &c in &relevant_children {
                        emit(cur, steps, Primitive::introduce(x, c, root));
                        tally.intro += 1;
                    }
                } else {
                    let (&last, rest) = relevant_children.split_last().expect("nonempty");
                    for &c in rest {
                        emit(cur, steps, Primitive::introduce(x, c, root));
                        tally.intro += 1;
                    }
                    emit(cur, steps, Primitive::delegate(x, last, root));
                    tally.deleg += 1;
                }
            }
        }
    }
    tally
}

/// Total surplus that will pass through each node during the sweep: the
/// node's own surplus plus everything below it.
fn subtree_arrivals(rooted: &RootedTree, surplus: &BTreeMap<NodeId, u64>) -> BTreeMap<NodeId, u64> {
    let mut arriving: BTreeMap<NodeId, u64> = BTreeMap::new();
    for level in rooted.levels().iter().skip(1).rev() {
        for &x in level {
            let total =
                surplus.get(&x).copied().unwrap_or(0) + arriving.get(&x).copied().unwrap_or(0);
            arriving.insert(x, total);
            let p = rooted.parent(x).expect("non-root node");
            if p != rooted.root() {
                *arriving.entry(p).or_insert(0) += total;
            }
        }
    }
    arriving
}

/// Reorients tree edges upward where the sweep will need them: a delegating
/// node needs its parent edge pointing up, and a root child fusing surplus
/// copies needs one upward non-surplus copy as the fusion floor. At a root
/// child every surplus copy sits on the root pair already pointing up, so
/// the floor exists exactly when the upward count exceeds the surplus.
fn fix_upward(
    cur: &mut MultiGraph,
    rooted: &RootedTree,
    surplus: &BTreeMap<NodeId, u64>,
    tally: &mut u64,
    steps: &mut Vec<Primitive>,
) {
    let arriving = subtree_arrivals(rooted, surplus);
    let root = rooted.root();
    for (c, p) in rooted.tree_edges() {
        if arriving.get(&c).copied().unwrap_or(0) == 0 {
            continue;
        }
        let flip = if p == root {
            u64::from(cur.multiplicity(c, p)) == surplus.get(&c).copied().unwrap_or(0)
        } else {
            cur.multiplicity(c, p) == 0
        };
        if flip {
            emit(cur, steps, Primitive::reverse(p, c));
            *tally += 1;
        }
    }
}

/// Bottom-up cleanup: each node fuses its surplus copies down to one and
/// delegates the survivor to its parent; children of the root fuse
/// everything against the prescribed copy of their root edge.
fn sweep(
    cur: &mut MultiGraph,
    rooted: &RootedTree,
    mut surplus: BTreeMap<NodeId, u64>,
    steps: &mut Vec<Primitive>,
) -> (u64, u64) {
    let orientation = cur.orientation();
    let root = rooted.root();
    let mut fuses = 0u64;
    let mut delegs = 0u64;
    for level in rooted.levels().iter().skip(1).rev() {
        for &x in level {
            let s = surplus.get(&x).copied().unwrap_or(0);
            if s == 0 {
                continue;
            }
            let p = rooted.parent(x).expect("non-root node");
            if p == root {
                for _ in 0..s {
                    emit(cur, steps, fuse_prim(orientation, x, root));
                }
                fuses += s;
            } else {
                for _ in 0..(s - 1) {
                    emit(cur, steps, fuse_prim(orientation, x, root));
                }
                fuses += s - 1;
                emit(cur, steps, Primitive::delegate(x, p, root));
                delegs += 1;
                *surplus.entry(p).or_insert(0) += 1;
            }
        }
    }
    (fuses, delegs)
}

/// Reverses tree-pair copies until both orientations match the prescribed
/// multiplicities. The sweep conserves each tree pair's copy total, so the
/// two loops always terminate at equality.
fn restore_orientations(
    cur: &mut MultiGraph,
    rooted: &RootedTree,
    prescription: &MultiGraph,
    tally: &mut u64,
    steps: &mut Vec<Primitive>,
) {
    for (c, p) in rooted.tree_edges() {
        while cur.multiplicity(c, p) > prescription.multiplicity(c, p) {
            emit(cur, steps, Primitive::reverse(c, p));
            *tally += 1;
        }
        while cur.multiplicity(p, c) > prescription.multiplicity(p, c) {
            emit(cur, steps, Primitive::reverse(p, c));
            *tally += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_part1_tree(
    cur: &mut MultiGraph,
    tree: &Tree,
    pairs: &[(NodeId, NodeId, u32)],
    gs: &MultiGraph,
    g_prime: &MultiGraph,
    options: PlanOptions,
    counts: &mut StepCounts,
    steps: &mut Vec<Primitive>,
) -> Result<(), PlanError> {
    let orientation = cur.orientation();
    let directed = orientation == Orientation::Directed;
    let endpoints: BTreeSet<NodeId> = pairs.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    let root = select_root(tree, &endpoints);

    let mut targets = endpoints;
    targets.remove(&root);
    // Heads of root-sourced additional edges keep their connector pointing at
    // the root: the self-introduction realizing such an edge consumes exactly
    // that orientation and leaves a root-to-head copy for later steps.
    let needs_unreversed: BTreeSet<NodeId> = if directed {
        pairs
            .iter()
            .filter(|&&(u, _, _)| u == root)
            .map(|&(_, v, _)| v)
            .collect()
    } else {
        BTreeSet::new()
    };

    let plain = RootedTree::new(tree, root, &BTreeSet::new())?;
    let reused: BTreeSet<NodeId> = if options.reuse_root_edges {
        targets
            .iter()
            .copied()
            .filter(|&x| {
                if directed && needs_unreversed.contains(&x) {
                    // Root children may lose one upward copy to the
                    // downward-orientation pass; keep a spare in that case.
                    if plain.parent(x) == Some(root) && gs.multiplicity(root, x) == 0 {
                        gs.multiplicity(x, root) >= 2
                    } else {
                        gs.multiplicity(x, root) >= 1
                    }
                } else if directed {
                    gs.multiplicity(root, x) >= 1
                } else {
                    gs.multiplicity(x, root) >= 1
                }
            })
            .collect()
    } else {
        BTreeSet::new()
    };
    let connector_targets: BTreeSet<NodeId> = targets.difference(&reused).copied().collect();
    let rooted = plain.with_targets(&connector_targets);

    if directed {
        for (c, p) in rooted.tree_edges() {
            if rooted.relevant(c) && cur.multiplicity(p, c) == 0 {
                emit(cur, steps, Primitive::reverse(c, p));
                counts.step2_tree_reversals += 1;
            }
        }
    }

    let tally = connect(cur, &rooted, steps);
    counts.step2_intro += tally.intro;
    counts.step2_deleg += tally.deleg;

    let reversed_connectors: Vec<NodeId> = if directed {
        connector_targets
            .iter()
            .copied()
            .filter(|x| !needs_unreversed.contains(x))
            .collect()
    } else {
        Vec::new()
    };
    for &x in &reversed_connectors {
        emit(cur, steps, Primitive::reverse(x, root));
        counts.step2_connector_reversals += 1;
    }

    // Root-incident pairs go first; their self-introductions leave copies the
    // general introductions may still need.
    if directed {
        for &(u, v, m) in pairs.iter().filter(|&&(u, _, _)| u == root) {
            debug_assert_eq!(u, root);
            for _ in 0..m {
                emit(cur, steps, Primitive::introduce(v, root, v));
            }
            counts.step3_intro += u64::from(m);
        }
        for &(u, v, m) in pairs.iter().filter(|&&(_, v, _)| v == root) {
            debug_assert_eq!(v, root);
            for _ in 0..m {
                emit(cur, steps, Primitive::introduce(root, u, root));
            }
            counts.step3_intro += u64::from(m);
        }
        for &(u, v, m) in pairs.iter().filter(|&&(u, v, _)| u != root && v != root) {
            for _ in 0..m {
                emit(cur, steps, Primitive::introduce(root, u, v));
            }
            counts.step3_intro += u64::from(m);
        }
    } else {
        for &(u, v, m) in pairs.iter().filter(|&&(u, v, _)| u == root || v == root) {
            let x = if u == root { v } else { u };
            for _ in 0..m {
                emit(cur, steps, Primitive::introduce(root, x, root));
            }
            counts.step3_intro += u64::from(m);
        }
        for &(u, v, m) in pairs.iter().filter(|&&(u, v, _)| u != root && v != root) {
            for _ in 0..m {
                emit(cur, steps, Primitive::introduce(root, u, v));
            }
            counts.step3_intro += u64::from(m);
        }
    }

    for &x in &reversed_connectors {
        emit(cur, steps, Primitive::reverse(root, x));
        counts.step4_reversals += 1;
    }

    let surplus: BTreeMap<NodeId, u64> = connector_targets.iter().map(|&x| (x, 1u64)).collect();

    if directed {
        fix_upward(cur, &rooted, &surplus, &mut counts.step4_reversals, steps);
    }

    let (fuses, delegs) = sweep(cur, &rooted, surplus, steps);
    counts.step4_fuse += fuses;
    counts.step4_deleg += delegs;

    if directed {
        restore_orientations(cur, &rooted, g_prime, &mut counts.step4_reversals, steps);
    }
    Ok(())
}

enum ExcessClass {
    /// Anchor delegates the excess edge to the root, relocating it there.
    General {
        anchor: NodeId,
        other: NodeId,
        mult: u32,
    },
    /// Excess edge between the anchor and the root itself: fused in place
    /// against the anchor's connector or prescribed root edge.
    AnchorFuse { anchor: NodeId, mult: u32 },
    /// Excess edge anchored at the root: left alone until the sweep (after a
    /// reversal toward the other endpoint on directed graphs).
    RootSkip { node: NodeId, mult: u32 },
}

#[allow(clippy::too_many_arguments)]
fn run_part2_tree(
    cur: &mut MultiGraph,
    tree: &Tree,
    pairs: &[(NodeId, NodeId, u32)],
    gt: &MultiGraph,
    anchors: &ExcessAnchor,
    options: PlanOptions,
    counts: &mut StepCounts,
    steps: &mut Vec<Primitive>,
) -> Result<(), PlanError> {
    let orientation = cur.orientation();
    let directed = orientation == Orientation::Directed;
    let endpoints: BTreeSet<NodeId> = pairs.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    let root = select_root(tree, &endpoints);

    let classified: Vec<ExcessClass> = pairs
        .iter()
        .map(|&(u, v, m)| {
            let anchor = anchors
                .anchor_of(u, v)
                .expect("pair drawn from the excess set");
            if anchor == root {
                let node = if u == root { v } else { u };
                ExcessClass::RootSkip { node, mult: m }
            } else if u == root || v == root {
                ExcessClass::AnchorFuse { anchor, mult: m }
            } else {
                let other = if anchor == u { v } else { u };
                ExcessClass::General {
                    anchor,
                    other,
                    mult: m,
                }
            }
        })
        .collect();

    let targets: BTreeSet<NodeId> = classified
        .iter()
        .filter_map(|class| match *class {
            ExcessClass::General { anchor, .. } | ExcessClass::AnchorFuse { anchor, .. } => {
                Some(anchor)
            }
            ExcessClass::RootSkip { .. } => None,
        })
        .collect();

    let plain = RootedTree::new(tree, root, &BTreeSet::new())?;
    let reused: BTreeSet<NodeId> = if options.reuse_root_edges {
        targets
            .iter()
            .copied()
            .filter(|&x| {
                if directed && plain.parent(x) == Some(root) && gt.multiplicity(root, x) == 0 {
                    // Root children may lose one upward copy to the
                    // downward-orientation pass; keep a spare in that case.
                    gt.multiplicity(x, root) >= 2
                } else {
                    gt.multiplicity(x, root) >= 1
                }
            })
            .collect()
    } else {
        BTreeSet::new()
    };
    let connector_targets: BTreeSet<NodeId> = targets.difference(&reused).copied().collect();
    let rooted = plain.with_targets(&connector_targets);

    if directed {
        for (c, p) in rooted.tree_edges() {
            if rooted.relevant(c) && cur.multiplicity(p, c) == 0 {
                emit(cur, steps, Primitive::reverse(c, p));
                counts.step6_tree_reversals += 1;
            }
        }
    }

    let tally = connect(cur, &rooted, steps);
    counts.step6_intro += tally.intro;
    counts.step6_deleg += tally.deleg;

    for class in &classified {
        match *class {
            ExcessClass::General {
                anchor,
                other,
                mult,
            } => {
                for _ in 0..mult {
                    emit(cur, steps, Primitive::delegate(anchor, root, other));
                }
                counts.step7_deleg += u64::from(mult);
            }
            ExcessClass::AnchorFuse { anchor, mult } => {
                for _ in 0..mult {
                    emit(cur, steps, fuse_prim(orientation, anchor, root));
                }
                counts.step7_fuse += u64::from(mult);
            }
            ExcessClass::RootSkip { .. } => {}
        }
    }

    if directed {
        let mut to_flip: BTreeMap<NodeId, u64> = BTreeMap::new();
        for class in &classified {
            match *class {
                ExcessClass::General { other, mult, .. } => {
                    *to_flip.entry(other).or_insert(0) += u64::from(mult);
                }
                ExcessClass::RootSkip { node, mult } => {
                    *to_flip.entry(node).or_insert(0) += u64::from(mult);
                }
                ExcessClass::AnchorFuse { .. } => {}
            }
        }
        for (&node, &k) in &to_flip {
            for _ in 0..k {
                emit(cur, steps, Primitive::reverse(root, node));
            }
            counts.step8_reversals += k;
        }
    }

    let mut surplus: BTreeMap<NodeId, u64> = connector_targets.iter().map(|&x| (x, 1u64)).collect();
    for class in &classified {
        match *class {
            ExcessClass::General { other, mult, .. } => {
                *surplus.entry(other).or_insert(0) += u64::from(mult);
            }
            ExcessClass::RootSkip { node, mult } => {
                *surplus.entry(node).or_insert(0) += u64::from(mult);
            }
            ExcessClass::AnchorFuse { .. } => {}
        }
    }

    if directed {
        fix_upward(cur, &rooted, &surplus, &mut counts.step8_reversals, steps);
    }

    let (fuses, delegs) = sweep(cur, &rooted, surplus, steps);
    counts.step8_fuse += fuses;
    counts.step8_deleg += delegs;

    if directed {
        restore_orientations(cur, &rooted, gt, &mut counts.step8_reversals, steps);
    }
    Ok(())
}
