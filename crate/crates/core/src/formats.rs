//! Text formats: graph files, primitive traces, DIMACS CNF, and assignment
//! files.
//!
//! All four formats are line-oriented UTF-8. Graph, trace, and assignment
//! files treat `#` as a comment-to-end-of-line marker; DIMACS keeps its own
//! convention of `c` comment lines. Writers emit canonical output: edges and
//! steps appear in sorted or execution order, multiplicities are omitted
//! when 1, and every line ends with a newline, so equal values serialize to
//! equal bytes.
//!
//! Graph files:
//!
//! ```text
//! graph <directed|undirected>
//! nodes <n>
//! edge <u> <v> [mult]
//! ```
//!
//! Trace files carry one primitive per line (`INTRODUCE u v w`,
//! `DELEGATE u v w`, `FUSE u v`, `REVERSE u v`); the parser takes the
//! graph's orientation and rejects `REVERSE` lines for undirected graphs.
//! Assignment files are whitespace-separated signed 1-based literals
//! (`1 -2 3` assigns x1=true, x2=false, x3=true).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::multigraph::{GraphError, MultiGraph, NodeId, Orientation};
use crate::primitive::Primitive;
use crate::sat::{CnfFormula, Literal, SatError};

/// Errors from parsing any of the text formats. Line numbers are 1-based.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error(transparent)]
    Cnf(#[from] SatError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn strip_comment(raw: &str) -> &str {
    match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    }
    .trim()
}

fn parse_u32(line: usize, token: &str, what: &str) -> Result<u32, FormatError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{token}`")))
}

/// Parses a graph file. Connectivity is not required here; operations that
/// need it check it themselves.
pub fn parse_graph(text: &str) -> Result<MultiGraph, FormatError> {
    let mut graph: Option<MultiGraph> = None;
    let mut orientation: Option<Orientation> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let directive = tokens.next().expect("non-empty line");
        let rest: Vec<&str> = tokens.collect();
        match directive {
            "graph" => {
                if orientation.is_some() {
                    return Err(syntax(line, "duplicate `graph` line"));
                }
                match rest.as_slice() {
                    ["directed"] => orientation = Some(Orientation::Directed),
                    ["undirected"] => orientation = Some(Orientation::Undirected),
                    _ => return Err(syntax(line, "expected `graph <directed|undirected>`")),
                }
            }
            "nodes" => {
                let Some(orientation) = orientation else {
                    return Err(syntax(line, "`nodes` before `graph` line"));
                };
                if graph.is_some() {
                    return Err(syntax(line, "duplicate `nodes` line"));
                }
                let [count] = rest.as_slice() else {
                    return Err(syntax(line, "expected `nodes <count>`"));
                };
                let count = parse_u32(line, count, "node count")?;
                graph = Some(
                    MultiGraph::new(orientation, count)
                        .map_err(|source| FormatError::Graph { line, source })?,
                );
            }
            "edge" => {
                let Some(graph) = graph.as_mut() else {
                    return Err(syntax(line, "`edge` before `nodes` line"));
                };
                let (u, v, mult) = match rest.as_slice() {
                    [u, v] => (u, v, None),
                    [u, v, m] => (u, v, Some(m)),
                    _ => return Err(syntax(line, "expected `edge <u> <v> [mult]`")),
                };
                let u = NodeId(parse_u32(line, u, "node id")?);
                let v = NodeId(parse_u32(line, v, "node id")?);
                let mult = match mult {
                    Some(m) => parse_u32(line, m, "multiplicity")?,
                    None => 1,
                };
                graph
                    .add_edge(u, v, mult)
                    .map_err(|source| FormatError::Graph { line, source })?;
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    graph.ok_or_else(|| syntax(text.lines().count() + 1, "missing `graph`/`nodes` header"))
}

/// Serializes a graph canonically: header, then edges in sorted order with
/// multiplicities only when above 1.
pub fn write_graph(g: &MultiGraph) -> String {
    let mut out = String::new();
    writeln!(out, "graph {}", g.orientation()).unwrap();
    writeln!(out, "nodes {}", g.node_count()).unwrap();
    for ((u, v), mult) in g.distinct_edges() {
        if mult == 1 {
            writeln!(out, "edge {u} {v}").unwrap();
        } else {
            writeln!(out, "edge {u} {v} {mult}").unwrap();
        }
    }
    out
}

/// Parses a trace file against the orientation of the graphs it applies to.
pub fn parse_trace(text: &str, orientation: Orientation) -> Result<Vec<Primitive>, FormatError> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let node = |i: usize| -> Result<NodeId, FormatError> {
            Ok(NodeId(parse_u32(line, tokens[i], "node id")?))
        };
        let step = match (tokens[0], tokens.len()) {
            ("INTRODUCE", 4) => Primitive::introduce(node(1)?, node(2)?, node(3)?),
            ("DELEGATE", 4) => Primitive::delegate(node(1)?, node(2)?, node(3)?),
            ("FUSE", 3) => Primitive::fuse(node(1)?, node(2)?),
            ("REVERSE", 3) => {
                if orientation == Orientation::Undirected {
                    return Err(syntax(line, "REVERSE is invalid in an undirected trace"));
                }
                Primitive::reverse(node(1)?, node(2)?)
            }
            ("INTRODUCE" | "DELEGATE", _) => {
                return Err(syntax(line, format!("{} takes 3 operands", tokens[0])))
            }
            ("FUSE" | "REVERSE", _) => {
                return Err(syntax(line, format!("{} takes 2 operands", tokens[0])))
            }
            (other, _) => return Err(syntax(line, format!("unknown primitive `{other}`"))),
        };
        steps.push(step);
    }
    Ok(steps)
}

/// Serializes a trace, one primitive per line in execution order.
pub fn write_trace(steps: &[Primitive]) -> String {
    let mut out = String::new();
    for step in steps {
        writeln!(out, "{step}").unwrap();
    }
    out
}

/// Parses a DIMACS CNF file (`p cnf <vars> <clauses>` header, `c` comment
/// lines, clauses as 0-terminated literal runs, possibly spanning lines).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, FormatError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('c') {
            continue;
        }
        if content.starts_with('p') {
            if header.is_some() {
                return Err(syntax(line, "duplicate `p cnf` header"));
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let ["p", "cnf", vars, count] = tokens.as_slice() else {
                return Err(syntax(line, "expected `p cnf <vars> <clauses>`"));
            };
            let vars = parse_u32(line, vars, "variable count")?;
            let count = parse_u32(line, count, "clause count")? as usize;
            header = Some((vars, count));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(syntax(line, "clause before `p cnf` header"));
        };
        for token in content.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(line, format!("invalid literal `{token}`")))?;
            if value == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                let var = value.unsigned_abs() - 1;
                if var >= u64::from(vars) {
                    return Err(syntax(
                        line,
                        format!("literal `{token}` out of range for {vars} variables"),
                    ));
                }
                current.push(Literal::new(var as u32, value > 0));
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(syntax(last_line + 1, "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(syntax(last_line, "unterminated clause (missing 0)"));
    }
    if clauses.len() != count {
        return Err(syntax(
            last_line,
            format!("header declares {count} clauses, found {}", clauses.len()),
        ));
    }
    Ok(CnfFormula::new(vars, clauses)?)
}

/// Parses an assignment file of signed 1-based literals into a map from
/// 0-based variable index to truth value. Each variable may appear once.
pub fn parse_assignment(text: &str) -> Result<BTreeMap<u32, bool>, FormatError> {
    let mut assignment = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        for token in strip_comment(raw).split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| syntax(line, format!("invalid literal `{token}`")))?;
            if value == 0 {
                return Err(syntax(line, "literal 0 is not a valid assignment entry"));
            }
            let var = value.unsigned_abs() - 1;
            let var = u32::try_from(var)
                .map_err(|_| syntax(line, format!("literal `{token}` out of range")))?;
            if assignment.insert(var, value > 0).is_some() {
                return Err(syntax(
                    line,
                    format!("variable x{} assigned twice", var + 1),
                ));
            }
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    #[test]
    fn graph_files_round_trip_canonically() {
        let text = "\
# a three-node example
graph undirected
nodes 3
edge 2 1   # reversed on purpose
edge 0 1 2
";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.orientation(), Orientation::Undirected);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.multiplicity(n(0), n(1)), 2);
        assert_eq!(g.multiplicity(n(1), n(2)), 1);

        let canonical = write_graph(&g);
        assert_eq!(
            canonical,
            "graph undirected\nnodes 3\nedge 0 1 2\nedge 1 2\n"
        );
        assert_eq!(parse_graph(&canonical).unwrap(), g);

        let d = parse_graph("graph directed\nnodes 2\nedge 1 0\n").unwrap();
        assert_eq!(d.multiplicity(n(1), n(0)), 1);
        assert_eq!(d.multiplicity(n(0), n(1)), 0);
        assert_eq!(parse_graph(&write_graph(&d)).unwrap(), d);
    }

    #[test]
    fn graph_parser_reports_line_numbers() {
        let err = parse_graph("graph undirected\nnodes 3\nedge 0 0\n").unwrap_err();
        assert!(matches!(
            err,
            FormatError::Graph {
                line: 3,
                source: GraphError::SelfLoop(_)
            }
        ));

        let err = parse_graph("edge 0 1\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 1, .. }));

        let err = parse_graph("graph undirected\nnodes 2\nedge 0 1 0\n").unwrap_err();
        assert!(matches!(
            err,
            FormatError::Graph {
                line: 3,
                source: GraphError::ZeroMultiplicity
            }
        ));

        let err = parse_graph("graph sideways\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 1, .. }));

        let err = parse_graph("# only comments\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { .. }));
    }

    #[test]
    fn traces_round_trip_and_respect_orientation() {
        let text = "\
INTRODUCE 0 1 0
DELEGATE 1 2 0   # hand the reference over
FUSE 0 1
REVERSE 2 0
";
        let steps = parse_trace(text, Orientation::Directed).unwrap();
        assert_eq!(
            steps,
            vec![
                Primitive::introduce(n(0), n(1), n(0)),
                Primitive::delegate(n(1), n(2), n(0)),
                Primitive::fuse(n(0), n(1)),
                Primitive::reverse(n(2), n(0)),
            ]
        );
        let written = write_trace(&steps);
        assert_eq!(parse_trace(&written, Orientation::Directed).unwrap(), steps);

        let err = parse_trace(text, Orientation::Undirected).unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 4, .. }));

        assert!(parse_trace("", Orientation::Undirected).unwrap().is_empty());
        assert!(parse_trace("FUSE 0\n", Orientation::Directed).is_err());
        assert!(parse_trace("SPLIT 0 1\n", Orientation::Directed).is_err());
    }

    #[test]
    fn dimacs_parsing_handles_the_standard_layout() {
        let text = "\
c four clauses over three variables
p cnf 3 4
1 2 0
-1 3 0
-2 0
-2 -3 0
";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.variable_count(), 3);
        assert_eq!(cnf.clauses().len(), 4);
        assert_eq!(
            cnf.clauses()[0],
            vec![Literal::new(0, true), Literal::new(1, true)]
        );
        assert_eq!(cnf.clauses()[2], vec![Literal::new(1, false)]);

        let split = parse_dimacs("p cnf 2 2\n1\n-2 0 2 0\n").unwrap();
        assert_eq!(split.clauses().len(), 2);
        assert_eq!(
            split.clauses()[0],
            vec![Literal::new(0, true), Literal::new(1, false)]
        );
    }

    #[test]
    fn dimacs_parser_rejects_malformed_input() {
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 3 0\n").unwrap_err(),
            FormatError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 1\n1 2\n").unwrap_err(),
            FormatError::Syntax { .. }
        ));
        assert!(matches!(
            parse_dimacs("p cnf 2 2\n1 0\n").unwrap_err(),
            FormatError::Syntax { .. }
        ));
        assert!(matches!(
            parse_dimacs("1 0\n").unwrap_err(),
            FormatError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n1 1 0\n").unwrap_err(),
            FormatError::Cnf(SatError::DuplicateLiteralInClause { .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 1 1\n0\n").unwrap_err(),
            FormatError::Cnf(SatError::EmptyClause { .. })
        ));
    }

    #[test]
    fn assignments_parse_as_signed_literals() {
        let a = parse_assignment("1 -2 3\n").unwrap();
        assert_eq!(a.get(&0), Some(&true));
        assert_eq!(a.get(&1), Some(&false));
        assert_eq!(a.get(&2), Some(&true));

        assert!(parse_assignment("1 -1\n").is_err());
        assert!(parse_assignment("0\n").is_err());
        assert!(parse_assignment("x1\n").is_err());
        assert!(parse_assignment("# nothing\n").unwrap().is_empty());
    }
}
