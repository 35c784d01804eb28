//! CNF-driven instance generation: every formula maps to a pair of graphs
//! whose transformation distance is at most `2n + m` exactly when the
//! formula is satisfiable.
//!
//! Each variable gets a four-node gadget (its two literal nodes between a
//! private source and sink); each clause gets one node adjacent to its
//! literals; one shared hub node closes the construction. The start graph
//! wires every source to the hub, the target instead wires every sink and
//! every clause node to the hub. A satisfying assignment yields the
//! explicit transformation: route each variable's hub reference through the
//! chosen literal node, let one satisfied literal per clause introduce the
//! hub to the clause node on the way, and park the reference at the sink.
//!
//! The directed variant orients gadget and clause edges downward (source to
//! literal, literal to sink, literal to clause node, gadget/clause to hub)
//! and uses the same witness skeleton.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::multigraph::{MultiGraph, NodeId, Orientation};
use crate::oracle::{decide_k, OracleQuery};
use crate::primitive::{Computation, Primitive};

/// A variable occurrence with polarity. Variables are 0-based internally
/// and displayed 1-based to match the DIMACS convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub var: u32,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        Literal { var, positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var + 1)
        } else {
            write!(f, "-x{}", self.var + 1)
        }
    }
}

/// Errors from formula construction, assignment handling, and the
/// equivalence check.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("formula needs at least one variable and one clause")]
    EmptyFormula,
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("clause {clause} repeats a literal of variable x{}", .var + 1)]
    DuplicateLiteralInClause { clause: usize, var: u32 },
    #[error("variable x{} out of range ({count} variables)", .var + 1)]
    VariableOutOfRange { var: u32, count: u32 },
    #[error("assignment leaves x{} unset", .var + 1)]
    IncompleteAssignment { var: u32 },
    #[error("assignment does not satisfy clause {clause}")]
    UnsatisfiedAssignment { clause: usize },
    #[error(
        "equivalence check is limited to 2 variables and 2 clauses, got {variables} and {clauses}"
    )]
    InstanceTooLarge { variables: u32, clauses: usize },
}

/// A CNF formula over variables `x1 .. xn`. Construction enforces the
/// shape the instance generator depends on: at least one variable and one
/// clause, no empty clause, no repeated literal within a clause (opposite
/// polarities of one variable are fine).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    variable_count: u32,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(variable_count: u32, clauses: Vec<Vec<Literal>>) -> Result<Self, SatError> {
        if variable_count == 0 || clauses.is_empty() {
            return Err(SatError::EmptyFormula);
        }
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(SatError::EmptyClause { clause: index });
            }
            let mut seen = std::collections::BTreeSet::new();
            for lit in clause {
                if lit.var >= variable_count {
                    return Err(SatError::VariableOutOfRange {
                        var: lit.var,
                        count: variable_count,
                    });
                }
                if !seen.insert((lit.var, lit.positive)) {
                    return Err(SatError::DuplicateLiteralInClause {
                        clause: index,
                        var: lit.var,
                    });
                }
            }
        }
        Ok(CnfFormula {
            variable_count,
            clauses,
        })
    }

    pub fn variable_count(&self) -> u32 {
        self.variable_count
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    fn check_assignment(&self, assignment: &BTreeMap<u32, bool>) -> Result<(), SatError> {
        for var in 0..self.variable_count {
            if !assignment.contains_key(&var) {
                return Err(SatError::IncompleteAssignment { var });
            }
        }
        if let Some((&var, _)) = assignment.range(self.variable_count..).next() {
            return Err(SatError::VariableOutOfRange {
                var,
                count: self.variable_count,
            });
        }
        Ok(())
    }

    fn first_unsatisfied(&self, assignment: &BTreeMap<u32, bool>) -> Option<usize> {
        self.clauses.iter().position(|clause| {
            !clause
                .iter()
                .any(|lit| assignment.get(&lit.var) == Some(&lit.positive))
        })
    }

    /// Evaluates the formula under a total assignment.
    pub fn evaluate(&self, assignment: &BTreeMap<u32, bool>) -> Result<bool, SatError> {
        self.check_assignment(assignment)?;
        Ok(self.first_unsatisfied(assignment).is_none())
    }

    fn truth_table_satisfiable(&self) -> bool {
        let n = self.variable_count;
        (0u64..(1 << n)).any(|bits| {
            let assignment: BTreeMap<u32, bool> =
                (0..n).map(|var| (var, (bits >> var) & 1 == 1)).collect();
            self.first_unsatisfied(&assignment).is_none()
        })
    }
}

/// What a node stands for in a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeRole {
    /// A literal node of the variable gadget.
    Literal { var: u32, positive: bool },
    /// The gadget node holding the hub reference in the start graph.
    Source { var: u32 },
    /// The gadget node meant to hold the hub reference in the target graph.
    Sink { var: u32 },
    /// The node representing one clause.
    Clause { index: u32 },
    /// The shared rendezvous node every gadget connects to.
    Hub,
}

/// A generated instance: start graph, target graph, the decision bound
/// `k = 2n + m`, and the role of every node.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub gs: MultiGraph,
    pub gt: MultiGraph,
    pub k: u32,
    pub roles: Vec<NodeRole>,
    pub variable_count: u32,
    pub clause_count: u32,
}

impl ReductionInstance {
    pub fn literal_node(&self, lit: Literal) -> NodeId {
        NodeId(4 * lit.var + u32::from(!lit.positive))
    }

    pub fn source_node(&self, var: u32) -> NodeId {
        NodeId(4 * var + 2)
    }

    pub fn sink_node(&self, var: u32) -> NodeId {
        NodeId(4 * var + 3)
    }

    pub fn clause_node(&self, index: u32) -> NodeId {
        NodeId(4 * self.variable_count + index)
    }

    pub fn hub_node(&self) -> NodeId {
        NodeId(4 * self.variable_count + self.clause_count)
    }

    pub fn role(&self, node: NodeId) -> NodeRole {
        self.roles[node.0 as usize]
    }
}

/// Builds the instance for a formula. Node layout: variable `i` occupies the
/// block `4i..4i+3` as (positive literal, negative literal, source, sink),
/// clause `j` sits at `4n + j`, and the hub is the last node.
pub fn reduce(cnf: &CnfFormula, orientation: Orientation) -> ReductionInstance {
    let n = cnf.variable_count;
    let m = cnf.clause_count() as u32;
    let node_count = 4 * n + m + 1;

    let mut roles = Vec::with_capacity(node_count as usize);
    for var in 0..n {
        roles.push(NodeRole::Literal {
            var,
            positive: true,
        });
        roles.push(NodeRole::Literal {
            var,
            positive: false,
        });
        roles.push(NodeRole::Source { var });
        roles.push(NodeRole::Sink { var });
    }
    for index in 0..m {
        roles.push(NodeRole::Clause { index });
    }
    roles.push(NodeRole::Hub);

    let mut instance = ReductionInstance {
        gs: MultiGraph::new(orientation, node_count).expect("positive node count"),
        gt: MultiGraph::new(orientation, node_count).expect("positive node count"),
        k: 2 * n + m,
        roles,
        variable_count: n,
        clause_count: m,
    };
    let hub = instance.hub_node();

    let mut base = Vec::new();
    for var in 0..n {
        for positive in [true, false] {
            let lit = instance.literal_node(Literal::new(var, positive));
            base.push((instance.source_node(var), lit));
            base.push((lit, instance.sink_node(var)));
        }
    }
    for (index, clause) in cnf.clauses().iter().enumerate() {
        let clause_node = instance.clause_node(index as u32);
        for &lit in clause {
            base.push((instance.literal_node(lit), clause_node));
        }
    }
    for &(u, v) in &base {
        instance.gs.add_edge(u, v, 1).expect("layout is loop-free");
        instance.gt.add_edge(u, v, 1).expect("layout is loop-free");
    }
    for var in 0..n {
        instance
            .gs
            .add_edge(instance.source_node(var), hub, 1)
            .expect("layout is loop-free");
        instance
            .gt
            .add_edge(instance.sink_node(var), hub, 1)
            .expect("layout is loop-free");
    }
    for index in 0..m {
        instance
            .gt
            .add_edge(instance.clause_node(index), hub, 1)
            .expect("layout is loop-free");
    }
    instance
}

/// Builds the length-`2n + m` computation induced by a satisfying
/// assignment: per variable, delegate the hub reference from the source to
/// the chosen literal node; per clause, one satisfied literal (smallest
/// variable index) introduces the hub to the clause node; per variable,
/// delegate the hub reference on to the sink.
pub fn witness(
    cnf: &CnfFormula,
    assignment: &BTreeMap<u32, bool>,
    orientation: Orientation,
) -> Result<Computation, SatError> {
    cnf.check_assignment(assignment)?;
    if let Some(clause) = cnf.first_unsatisfied(assignment) {
        return Err(SatError::UnsatisfiedAssignment { clause });
    }

    let instance = reduce(cnf, orientation);
    let hub = instance.hub_node();
    let chosen = |var: u32| instance.literal_node(Literal::new(var, assignment[&var]));

    let mut steps = Vec::new();
    for var in 0..cnf.variable_count {
        steps.push(Primitive::delegate(
            instance.source_node(var),
            chosen(var),
            hub,
        ));
    }
    for (index, clause) in cnf.clauses().iter().enumerate() {
        let z = clause
            .iter()
            .filter(|lit| assignment[&lit.var] == lit.positive)
            .min_by_key(|lit| lit.var)
            .expect("assignment satisfies every clause");
        steps.push(Primitive::introduce(
            instance.literal_node(*z),
            instance.clause_node(index as u32),
            hub,
        ));
    }
    for var in 0..cnf.variable_count {
        steps.push(Primitive::delegate(
            chosen(var),
            instance.sink_node(var),
            hub,
        ));
    }
    Ok(Computation::new(instance.gs, steps))
}

/// Compares truth-table satisfiability against the length-`2n + m` decision
/// on the generated instance. Returns whether the two agree. Guarded to
/// tiny formulas; the decision search is exponential.
pub fn check_equivalence(cnf: &CnfFormula, orientation: Orientation) -> Result<bool, SatError> {
    if cnf.variable_count > 2 || cnf.clause_count() > 2 {
        return Err(SatError::InstanceTooLarge {
            variables: cnf.variable_count,
            clauses: cnf.clause_count(),
        });
    }
    let satisfiable = cnf.truth_table_satisfiable();
    let instance = reduce(cnf, orientation);
    let k = instance.k;
    let query = OracleQuery::new(instance.gs, instance.gt, k)
        .expect("generated instances share a connected node set");
    let decided = decide_k(&query, k).expect("query validated at construction");
    Ok(satisfiable == decided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitive::{verify, Primitive};

    fn lit(var: u32, positive: bool) -> Literal {
        Literal::new(var, positive)
    }

    /// (x1 or x2) and (-x1 or x3) and (-x2) and (-x2 or -x3)
    fn example_formula() -> CnfFormula {
        CnfFormula::new(
            3,
            vec![
                vec![lit(0, true), lit(1, true)],
                vec![lit(0, false), lit(2, true)],
                vec![lit(1, false)],
                vec![lit(1, false), lit(2, false)],
            ],
        )
        .unwrap()
    }

    fn assignment(values: &[(u32, bool)]) -> BTreeMap<u32, bool> {
        values.iter().copied().collect()
    }

    #[test]
    fn construction_enforces_clause_shape() {
        assert_eq!(
            CnfFormula::new(0, vec![vec![lit(0, true)]]).unwrap_err(),
            SatError::EmptyFormula
        );
        assert_eq!(
            CnfFormula::new(1, vec![]).unwrap_err(),
            SatError::EmptyFormula
        );
        assert_eq!(
            CnfFormula::new(1, vec![vec![]]).unwrap_err(),
            SatError::EmptyClause { clause: 0 }
        );
        assert_eq!(
            CnfFormula::new(1, vec![vec![lit(0, true), lit(0, true)]]).unwrap_err(),
            SatError::DuplicateLiteralInClause { clause: 0, var: 0 }
        );
        assert_eq!(
            CnfFormula::new(1, vec![vec![lit(3, true)]]).unwrap_err(),
            SatError::VariableOutOfRange { var: 3, count: 1 }
        );
        // Opposite polarities of one variable are distinct literals.
        assert!(CnfFormula::new(1, vec![vec![lit(0, true), lit(0, false)]]).is_ok());
    }

    #[test]
    fn instance_counts_follow_the_closed_forms() {
        let cnf = example_formula();
        for orientation in [Orientation::Undirected, Orientation::Directed] {
            let inst = reduce(&cnf, orientation);
            assert_eq!(inst.gs.node_count(), 17);
            assert_eq!(inst.k, 10);
            // 4n gadget edges + sum of clause sizes + n source-hub edges.
            assert_eq!(inst.gs.total_edges(), 12 + 7 + 3);
            // The target swaps source-hub for sink-hub and adds clause-hub.
            assert_eq!(inst.gt.total_edges(), 12 + 7 + 3 + 4);

            let hub = inst.hub_node();
            for var in 0..3 {
                assert_eq!(inst.gs.multiplicity(inst.source_node(var), hub), 1);
                assert_eq!(inst.gs.multiplicity(inst.sink_node(var), hub), 0);
                assert_eq!(inst.gt.multiplicity(inst.sink_node(var), hub), 1);
            }
            for index in 0..4 {
                assert_eq!(inst.gt.multiplicity(inst.clause_node(index), hub), 1);
            }
            assert!(inst.gs.is_connected());
            assert!(inst.gt.is_connected());
        }
    }

    #[test]
    fn roles_match_the_node_layout() {
        let inst = reduce(&example_formula(), Orientation::Undirected);
        assert_eq!(
            inst.role(inst.literal_node(lit(1, false))),
            NodeRole::Literal {
                var: 1,
                positive: false
            }
        );
        assert_eq!(inst.role(inst.source_node(2)), NodeRole::Source { var: 2 });
        assert_eq!(inst.role(inst.sink_node(0)), NodeRole::Sink { var: 0 });
        assert_eq!(
            inst.role(inst.clause_node(3)),
            NodeRole::Clause { index: 3 }
        );
        assert_eq!(inst.role(inst.hub_node()), NodeRole::Hub);
        assert_eq!(inst.roles.len(), 17);
    }

    #[test]
    fn directed_instances_project_onto_undirected_ones() {
        let cnf = example_formula();
        let undirected = reduce(&cnf, Orientation::Undirected);
        let directed = reduce(&cnf, Orientation::Directed);
        assert_eq!(directed.gs.undirected_projection().unwrap(), undirected.gs);
        assert_eq!(directed.gt.undirected_projection().unwrap(), undirected.gt);
    }

    #[test]
    fn smallest_instance_witness_is_the_three_step_route() {
        let cnf = CnfFormula::new(1, vec![vec![lit(0, true)]]).unwrap();
        let inst = reduce(&cnf, Orientation::Undirected);
        assert_eq!(inst.gs.node_count(), 6);
        assert_eq!(inst.k, 3);

        let c = witness(&cnf, &assignment(&[(0, true)]), Orientation::Undirected).unwrap();
        assert_eq!(
            c.steps,
            vec![
                Primitive::delegate(NodeId(2), NodeId(0), NodeId(5)),
                Primitive::introduce(NodeId(0), NodeId(4), NodeId(5)),
                Primitive::delegate(NodeId(0), NodeId(3), NodeId(5)),
            ]
        );
        let outcome = verify(&c, &inst.gt).unwrap();
        assert!(outcome.reached);
        assert_eq!(outcome.length, 3);
    }

    #[test]
    fn example_witness_replays_to_the_target_in_both_orientations() {
        let cnf = example_formula();
        let a = assignment(&[(0, true), (1, false), (2, true)]);
        assert_eq!(cnf.evaluate(&a), Ok(true));
        for orientation in [Orientation::Undirected, Orientation::Directed] {
            let inst = reduce(&cnf, orientation);
            let c = witness(&cnf, &a, orientation).unwrap();
            assert_eq!(c.steps.len(), 10);
            let outcome = verify(&c, &inst.gt).unwrap();
            assert!(outcome.reached, "witness must reach the target");
        }
    }

    #[test]
    fn witness_rejects_bad_assignments() {
        let cnf = example_formula();
        let unsatisfying = assignment(&[(0, true), (1, true), (2, true)]);
        assert_eq!(
            witness(&cnf, &unsatisfying, Orientation::Undirected).unwrap_err(),
            SatError::UnsatisfiedAssignment { clause: 2 }
        );
        let partial = assignment(&[(0, true), (1, false)]);
        assert_eq!(
            witness(&cnf, &partial, Orientation::Undirected).unwrap_err(),
            SatError::IncompleteAssignment { var: 2 }
        );
        let oversized = assignment(&[(0, true), (1, false), (2, true), (7, true)]);
        assert_eq!(
            witness(&cnf, &oversized, Orientation::Undirected).unwrap_err(),
            SatError::VariableOutOfRange { var: 7, count: 3 }
        );
    }

    #[test]
    fn equivalence_check_agrees_on_tiny_formulas() {
        let satisfiable = CnfFormula::new(1, vec![vec![lit(0, true)]]).unwrap();
        assert_eq!(
            check_equivalence(&satisfiable, Orientation::Undirected),
            Ok(true)
        );

        let contradiction =
            CnfFormula::new(1, vec![vec![lit(0, true)], vec![lit(0, false)]]).unwrap();
        assert_eq!(
            check_equivalence(&contradiction, Orientation::Undirected),
            Ok(true)
        );
        assert_eq!(
            check_equivalence(&contradiction, Orientation::Directed),
            Ok(true)
        );

        let tautology = CnfFormula::new(1, vec![vec![lit(0, true), lit(0, false)]]).unwrap();
        assert_eq!(
            check_equivalence(&tautology, Orientation::Undirected),
            Ok(true)
        );

        let big = CnfFormula::new(3, vec![vec![lit(2, true)]]).unwrap();
        assert_eq!(
            check_equivalence(&big, Orientation::Undirected).unwrap_err(),
            SatError::InstanceTooLarge {
                variables: 3,
                clauses: 1
            }
        );
    }
}
