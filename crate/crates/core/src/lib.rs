//! Planning and verification of multigraph transformations built from four
//! local primitives: introduction, delegation, fusion, and reversal.
//!
//! A node may only act on its immediate neighborhood, so turning one
//! connected (multi)graph into another takes a sequence of such primitive
//! applications. This crate provides:
//!
//! - [`multigraph`]: the value-semantic multigraph every operation acts on,
//!   with multiplicity-aware edge accounting and canonical hashing.
//! - [`primitive`]: the four primitives, precondition-checked application,
//!   replay and verification of whole computations.
//! - [`steiner`]: unit-cost undirected Steiner forest, both a primal-dual
//!   2-approximation and an exact brute-force oracle.
//! - [`planner`]: constant-factor planners for the undirected and directed
//!   transformation problems, emitting verified computations with
//!   step-by-step length accounting.
//! - [`oracle`]: exact shortest-computation search over the reachable state
//!   space, for micro instances.
//! - [`sat`]: CNF-based hard-instance generation and the explicit short
//!   witness computation for satisfiable formulas.
//! - [`formats`]: text formats for graphs, traces, DIMACS CNF, and
//!   assignments.

pub mod formats;
pub mod multigraph;
pub mod oracle;
pub mod planner;
pub mod primitive;
pub mod sat;
pub mod steiner;

pub use multigraph::{EdgeMultiset, GraphError, MultiGraph, NodeId, Orientation};
pub use oracle::{OracleError, OracleQuery, OracleResult, SearchLimits};
pub use planner::{PlanError, PlanOptions, PlanReport};
pub use primitive::{Computation, Primitive, PrimitiveError, VerificationOutcome};
pub use sat::{CnfFormula, Literal, ReductionInstance, SatError};
pub use steiner::{Forest, SteinerError, TerminalPairs};
