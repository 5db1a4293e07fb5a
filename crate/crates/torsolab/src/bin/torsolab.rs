//! Command-line front end: decompositions, canonical forms, isomorphism
//! testing, partial dominating set, and verification of serialized artifacts.
//!
//! Exit codes: 0 success (or isomorphic), 1 not isomorphic (`iso` only),
//! 2 error. All failures print a single line `error: <kind>: <detail>`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use torsolab::canon::{canonical_form, CanonConfig};
use torsolab::decomposition::{
    decompose, verify_decomposition, Budget, TorsoConstraint, TreeDecomposition,
};
use torsolab::graph::{parse_graph, Graph, GraphFormat};
use torsolab::oracles::OracleConfig;
use torsolab::pds::{elimination_decomposition, solve_pds_dp, PdsInstance};
use torsolab::treelike::{
    invariant_decompose, verify_invariance, verify_treelike_axioms, TreelikeDecomposition,
    TreelikeLimits,
};

#[derive(Parser)]
#[command(name = "torsolab", version, about = "graph structure toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edges,
    G6,
}

#[derive(Args)]
struct ConstraintArgs {
    /// File with a graph to exclude as a minor
    #[arg(long)]
    minor: Option<PathBuf>,
    /// Apex budget for the degree arm
    #[arg(long, default_value_t = 0)]
    apex: usize,
    /// Degree bound for the degree arm
    #[arg(long)]
    degree: Option<usize>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest allowed bag (default: vertex count)
    #[arg(long)]
    max_bag: Option<usize>,
    /// Largest allowed adhesion set (default: vertex count)
    #[arg(long)]
    max_adhesion: Option<usize>,
}

#[derive(Args)]
struct CommonArgs {
    /// Input format; inferred from the extension (.edges, .g6) when omitted
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write output here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tree decomposition with constrained torsos, as JSON
    Decompose {
        graph: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Invariant treelike (DAG) decomposition, as JSON
    Treelike {
        graph: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Ceiling on DAG nodes
        #[arg(long, default_value_t = 10_000)]
        max_nodes: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Canonical certificate as lowercase hex
    Canon {
        graph: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Largest torso canonised exhaustively
        #[arg(long, default_value_t = 10)]
        exhaustive_ceiling: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Isomorphism test: exit 0 if isomorphic, 1 if not
    Iso {
        graph_a: PathBuf,
        graph_b: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 10)]
        exhaustive_ceiling: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Partial dominating set: minimum chosen set dominating >= t vertices
    Pds {
        graph: PathBuf,
        /// Number of vertices to dominate
        #[arg(long)]
        t: usize,
        /// Tree decomposition JSON to run the DP over (default: built from
        /// the identity elimination order)
        #[arg(long)]
        decomposition: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Verify a serialized decomposition against a graph
    Check {
        graph: PathBuf,
        /// Tree or treelike decomposition JSON (distinguished by an `arcs` field)
        decomposition: PathBuf,
        #[command(flatten)]
        constraint: ConstraintArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

struct Failure {
    kind: &'static str,
    detail: String,
}

impl Failure {
    fn new(kind: &'static str, detail: impl ToString) -> Self {
        Failure {
            kind,
            detail: detail.to_string(),
        }
    }
}

fn oracle_config() -> Result<OracleConfig, Failure> {
    let mut cfg = OracleConfig::default();
    if let Ok(raw) = std::env::var("TORSOLAB_CEILING") {
        let ceiling: usize = raw
            .parse()
            .map_err(|_| Failure::new("usage", format!("TORSOLAB_CEILING must be an integer, got `{raw}`")))?;
        cfg.host_ceiling = ceiling;
        cfg.pattern_ceiling = ceiling;
    }
    Ok(cfg)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn infer_format(path: &Path, flag: Option<FormatArg>) -> Result<GraphFormat, Failure> {
    if let Some(f) = flag {
        return Ok(match f {
            FormatArg::Edges => GraphFormat::EdgeList,
            FormatArg::G6 => GraphFormat::Graph6,
        });
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("edges") => Ok(GraphFormat::EdgeList),
        Some("g6") => Ok(GraphFormat::Graph6),
        other => Err(Failure::new(
            "usage",
            format!(
                "cannot infer format from extension {:?}; pass --format",
                other.unwrap_or("")
            ),
        )),
    }
}

fn load_graph(path: &Path, flag: Option<FormatArg>) -> Result<Graph, Failure> {
    let format = infer_format(path, flag)?;
    let text = read_file(path)?;
    parse_graph(&text, format).map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))
}

fn build_constraint(args: &ConstraintArgs, flag: Option<FormatArg>, g: &Graph) -> Result<TorsoConstraint, Failure> {
    let excluded_minor = match &args.minor {
        Some(path) => Some(load_graph(path, flag)?),
        None => None,
    };
    if excluded_minor.is_none() && args.degree.is_none() {
        // permissive default: every torso allowed via a vacuous degree bound
        return Ok(TorsoConstraint::apex_degree(0, g.n().max(1)));
    }
    Ok(TorsoConstraint {
        excluded_minor,
        apex_budget: args.apex,
        degree_bound: args.degree,
    })
}

fn build_budget(args: &BudgetArgs, g: &Graph) -> Budget {
    Budget {
        max_bag_size: args.max_bag.unwrap_or(g.n()),
        max_adhesion: args.max_adhesion.unwrap_or(g.n()),
    }
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new("io", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Decompose {
            graph,
            constraint,
            budget,
            common,
        } => {
            let g = load_graph(&graph, common.format)?;
            let c = build_constraint(&constraint, common.format, &g)?;
            let b = build_budget(&budget, &g);
            let cfg = oracle_config()?;
            let t = decompose(&g, &c, b, &cfg).map_err(|e| Failure::new("decomposition", e))?;
            emit(&common, &(t.to_json(&graph.display().to_string()) + "\n"))?;
            Ok(0)
        }
        Command::Treelike {
            graph,
            constraint,
            budget,
            max_nodes,
            common,
        } => {
            let g = load_graph(&graph, common.format)?;
            let c = build_constraint(&constraint, common.format, &g)?;
            let b = build_budget(&budget, &g);
            let cfg = oracle_config()?;
            let limits = TreelikeLimits { max_nodes };
            let d = invariant_decompose(&g, &c, b, &cfg, limits)
                .map_err(|e| Failure::new("decomposition", e))?;
            emit(&common, &(d.to_json() + "\n"))?;
            Ok(0)
        }
        Command::Canon {
            graph,
            constraint,
            budget,
            exhaustive_ceiling,
            common,
        } => {
            let g = load_graph(&graph, common.format)?;
            let c = build_constraint(&constraint, common.format, &g)?;
            let b = build_budget(&budget, &g);
            let cfg = oracle_config()?;
            let ccfg = CanonConfig { exhaustive_ceiling };
            let cf = canonical_form(&g, &c, b, &cfg, &ccfg)
                .map_err(|e| Failure::new("canon", e))?;
            emit(&common, &(cf.hex() + "\n"))?;
            Ok(0)
        }
        Command::Iso {
            graph_a,
            graph_b,
            constraint,
            budget,
            exhaustive_ceiling,
            common,
        } => {
            let a = load_graph(&graph_a, common.format)?;
            let b = load_graph(&graph_b, common.format)?;
            if a.n() != b.n() {
                emit(&common, "not-isomorphic\n")?;
                return Ok(1);
            }
            let c = build_constraint(&constraint, common.format, &a)?;
            let bud = build_budget(&budget, &a);
            let cfg = oracle_config()?;
            let ccfg = CanonConfig { exhaustive_ceiling };
            let fa = canonical_form(&a, &c, bud, &cfg, &ccfg).map_err(|e| Failure::new("canon", e))?;
            let fb = canonical_form(&b, &c, bud, &cfg, &ccfg).map_err(|e| Failure::new("canon", e))?;
            if fa.certificate == fb.certificate {
                emit(&common, "isomorphic\n")?;
                Ok(0)
            } else {
                emit(&common, "not-isomorphic\n")?;
                Ok(1)
            }
        }
        Command::Pds {
            graph,
            t,
            decomposition,
            common,
        } => {
            let g = load_graph(&graph, common.format)?;
            let td = match decomposition {
                Some(path) => {
                    let (td, _) = TreeDecomposition::from_json(&read_file(&path)?)
                        .map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))?;
                    td
                }
                None => {
                    let order: Vec<usize> = (0..g.n()).collect();
                    elimination_decomposition(&g, &order)
                }
            };
            let inst = PdsInstance::new(g, t).map_err(|e| Failure::new("pds", e))?;
            let sol = solve_pds_dp(&inst, &td).map_err(|e| Failure::new("pds", e))?;
            let doc = serde_json::json!({
                "chosen": sol.chosen.as_slice(),
                "size": sol.chosen.len(),
                "dominated_count": sol.dominated_count,
                "target": t,
            });
            emit(&common, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
            Ok(0)
        }
        Command::Check {
            graph,
            decomposition,
            constraint,
            common,
        } => {
            let g = load_graph(&graph, common.format)?;
            let text = read_file(&decomposition)?;
            let cfg = oracle_config()?;
            let is_treelike = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .is_some_and(|v| v.get("arcs").is_some());
            let report = if is_treelike {
                let d = TreelikeDecomposition::from_json(&text)
                    .map_err(|e| Failure::new("parse", format!("{}: {e}", decomposition.display())))?;
                let mut report = verify_treelike_axioms(&g, &d);
                match verify_invariance(&g, &d, &cfg) {
                    Ok(inv) => {
                        report.violations.extend(inv.violations);
                        report.ok = report.violations.is_empty();
                    }
                    Err(e) => return Err(Failure::new("oracle", e)),
                }
                report
            } else {
                let (td, _) = TreeDecomposition::from_json(&text)
                    .map_err(|e| Failure::new("parse", format!("{}: {e}", decomposition.display())))?;
                let c = build_constraint(&constraint, common.format, &g)?;
                verify_decomposition(&g, &td, &c, &cfg)
            };
            emit(
                &common,
                &(serde_json::to_string_pretty(&report).unwrap() + "\n"),
            )?;
            if report.ok {
                Ok(0)
            } else {
                Ok(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}: {}", f.kind, f.detail);
            ExitCode::from(2)
        }
    }
}
