//! `lgt`: plan, verify, and analyze local graph transformations from the
//! command line. Exit codes: 0 success, 1 semantic failure (unverified
//! trace, no computation found, decision disagreement), 2 parse or IO error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lgt_core::formats::{
    parse_assignment, parse_dimacs, parse_graph, parse_trace, write_graph, write_trace,
};
use lgt_core::multigraph::{MultiGraph, Orientation};
use lgt_core::oracle::{opt_search, OracleQuery, SearchLimits};
use lgt_core::planner::{plan_dlgt_with, plan_ulgt_with, PlanOptions, PlanReport};
use lgt_core::primitive::{verify, Computation, VerifyError};
use lgt_core::sat::{check_equivalence, reduce, witness, CnfFormula};

#[derive(Parser)]
#[command(name = "lgt", version, about = "local graph transformation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a primitive sequence transforming one graph into another.
    Plan {
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// File the planned trace is written to.
        #[arg(long)]
        trace_out: PathBuf,
        /// Report format on standard out.
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
        /// Skip connector edges that already exist next to a tree root.
        #[arg(long)]
        reuse_root_edges: bool,
    },
    /// Replay a trace and confirm it reaches the target graph.
    Verify {
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Exhaustively search for a shortest transformation.
    Oracle {
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Longest computation considered.
        #[arg(long)]
        max_depth: u32,
        /// Explored-state limit (default from LGT_MAX_STATES or built-in).
        #[arg(long)]
        max_states: Option<usize>,
        /// Total-edge ceiling for intermediate graphs.
        #[arg(long)]
        edge_cap: Option<u64>,
    },
    /// Build the graph-pair instance for a CNF formula.
    Reduce {
        #[arg(long)]
        cnf: PathBuf,
        /// Build a directed instance instead of an undirected one.
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        out_initial: PathBuf,
        #[arg(long)]
        out_target: PathBuf,
    },
    /// Emit the fixed-length computation certifying a satisfying assignment.
    Witness {
        #[arg(long)]
        cnf: PathBuf,
        /// Assignment file of signed 1-based literals.
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        trace_out: PathBuf,
    },
    /// Compare truth-table satisfiability with the bounded-length decision.
    Check {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        directed: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

const SEMANTIC_FAILURE: u8 = 1;

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Plan {
            initial,
            target,
            trace_out,
            report,
            reuse_root_edges,
        } => cmd_plan(&initial, &target, &trace_out, report, reuse_root_edges),
        Command::Verify {
            initial,
            target,
            trace,
        } => cmd_verify(&initial, &target, &trace),
        Command::Oracle {
            initial,
            target,
            max_depth,
            max_states,
            edge_cap,
        } => cmd_oracle(&initial, &target, max_depth, max_states, edge_cap),
        Command::Reduce {
            cnf,
            directed,
            out_initial,
            out_target,
        } => cmd_reduce(&cnf, directed, &out_initial, &out_target),
        Command::Witness {
            cnf,
            assignment,
            directed,
            trace_out,
        } => cmd_witness(&cnf, &assignment, directed, &trace_out),
        Command::Check { cnf, directed } => cmd_check(&cnf, directed),
    }
}

fn load_graph(path: &Path) -> Result<MultiGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing graph file {}", path.display()))
}

fn load_cnf(path: &Path) -> Result<CnfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).with_context(|| format!("parsing DIMACS file {}", path.display()))
}

fn orientation_flag(directed: bool) -> Orientation {
    if directed {
        Orientation::Directed
    } else {
        Orientation::Undirected
    }
}

fn print_report(report: &PlanReport, format: ReportFormat) {
    let b = &report.bounds;
    let s = &report.sizes;
    match format {
        ReportFormat::Text => {
            println!("length {}", report.len());
            println!("part1 {}", b.part1_len);
            println!("part2 {}", b.part2_len);
            println!("e_plus {}", s.e_plus);
            println!("e_minus {}", s.e_minus);
            println!("forest_plus {}", s.forest_plus);
            println!("forest_minus {}", s.forest_minus);
            println!("bounds_ok {}", b.bounds_ok);
        }
        ReportFormat::Json => {
            let value = serde_json::json!({
                "length": report.len(),
                "part1": b.part1_len,
                "part2": b.part2_len,
                "e_plus": s.e_plus,
                "e_minus": s.e_minus,
                "forest_plus": s.forest_plus,
                "forest_minus": s.forest_minus,
                "bounds_ok": b.bounds_ok,
            });
            println!("{value}");
        }
    }
}

fn cmd_plan(
    initial: &Path,
    target: &Path,
    trace_out: &Path,
    report: ReportFormat,
    reuse_root_edges: bool,
) -> Result<ExitCode> {
    let gs = load_graph(initial)?;
    let gt = load_graph(target)?;
    let options = PlanOptions { reuse_root_edges };
    let planned = match gs.orientation() {
        Orientation::Undirected => plan_ulgt_with(&gs, &gt, options),
        Orientation::Directed => plan_dlgt_with(&gs, &gt, options),
    };
    match planned {
        Ok(plan) => {
            fs::write(trace_out, write_trace(&plan.computation.steps))
                .with_context(|| format!("writing {}", trace_out.display()))?;
            print_report(&plan, report);
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => {
            eprintln!("planning failed: {err}");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
    }
}

fn cmd_verify(initial: &Path, target: &Path, trace: &Path) -> Result<ExitCode> {
    let gs = load_graph(initial)?;
    let gt = load_graph(target)?;
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let steps = parse_trace(&text, gs.orientation())
        .with_context(|| format!("parsing trace file {}", trace.display()))?;
    let computation = Computation::new(gs, steps);
    match verify(&computation, &gt) {
        Ok(outcome) if outcome.reached => {
            println!("verified length {}", outcome.length);
            Ok(ExitCode::SUCCESS)
        }
        Ok(outcome) => {
            println!("replay ended off target");
            for ((u, v), mult) in outcome.missing.iter() {
                println!("missing {u} {v} {mult}");
            }
            for ((u, v), mult) in outcome.surplus.iter() {
                println!("surplus {u} {v} {mult}");
            }
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
        Err(VerifyError::Replay(failure)) => {
            println!("{failure}");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
        Err(err @ VerifyError::ShapeMismatch) => {
            eprintln!("verification impossible: {err}");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
    }
}

fn max_states_from_env() -> Result<Option<usize>> {
    match std::env::var("LGT_MAX_STATES") {
        Ok(raw) => {
            let value = raw
                .parse::<usize>()
                .with_context(|| format!("invalid LGT_MAX_STATES value `{raw}`"))?;
            Ok(Some(value))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(err) => Err(err).context("reading LGT_MAX_STATES"),
    }
}

fn cmd_oracle(
    initial: &Path,
    target: &Path,
    max_depth: u32,
    max_states: Option<usize>,
    edge_cap: Option<u64>,
) -> Result<ExitCode> {
    let gs = load_graph(initial)?;
    let gt = load_graph(target)?;
    let mut limits = SearchLimits::defaults_for(&gs, &gt);
    let max_states = match max_states {
        Some(states) => Some(states),
        None => max_states_from_env()?,
    };
    if let Some(states) = max_states {
        limits = limits.with_max_states(states);
    }
    if let Some(cap) = edge_cap {
        limits = limits.with_edge_cap(cap);
    }
    let query =
        OracleQuery::with_limits(gs, gt, max_depth, limits).context("building the search query")?;
    let result = opt_search(&query).context("running the search")?;
    if result.found {
        println!("distance {}", result.distance);
        for step in &result.witness.steps {
            println!("{step}");
        }
        Ok(ExitCode::SUCCESS)
    } else {
        println!("NOT-FOUND(<={max_depth})");
        if result.truncated {
            eprintln!(
                "search truncated after {} states; the verdict is not conclusive",
                result.explored
            );
        }
        Ok(ExitCode::from(SEMANTIC_FAILURE))
    }
}

fn cmd_reduce(
    cnf: &Path,
    directed: bool,
    out_initial: &Path,
    out_target: &Path,
) -> Result<ExitCode> {
    let formula = load_cnf(cnf)?;
    let instance = reduce(&formula, orientation_flag(directed));
    fs::write(out_initial, write_graph(&instance.gs))
        .with_context(|| format!("writing {}", out_initial.display()))?;
    fs::write(out_target, write_graph(&instance.gt))
        .with_context(|| format!("writing {}", out_target.display()))?;
    println!("k {}", instance.k);
    Ok(ExitCode::SUCCESS)
}

fn cmd_witness(
    cnf: &Path,
    assignment: &Path,
    directed: bool,
    trace_out: &Path,
) -> Result<ExitCode> {
    let formula = load_cnf(cnf)?;
    let text = fs::read_to_string(assignment)
        .with_context(|| format!("reading {}", assignment.display()))?;
    let values = parse_assignment(&text)
        .with_context(|| format!("parsing assignment file {}", assignment.display()))?;
    match witness(&formula, &values, orientation_flag(directed)) {
        Ok(computation) => {
            fs::write(trace_out, write_trace(&computation.steps))
                .with_context(|| format!("writing {}", trace_out.display()))?;
            println!("length {}", computation.len());
            Ok(ExitCode::SUCCESS)
        }
        Err(err) => {
            eprintln!("witness construction failed: {err}");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
    }
}

fn cmd_check(cnf: &Path, directed: bool) -> Result<ExitCode> {
    let formula = load_cnf(cnf)?;
    match check_equivalence(&formula, orientation_flag(directed)) {
        Ok(true) => {
            println!("agreement");
            Ok(ExitCode::SUCCESS)
        }
        Ok(false) => {
            println!("disagreement");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
        Err(err) => {
            eprintln!("check failed: {err}");
            Ok(ExitCode::from(SEMANTIC_FAILURE))
        }
    }
}
