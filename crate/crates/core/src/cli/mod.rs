mod bench;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use wlgt_core::graph::{builtin_pair, load_graph_file, Graph};
use wlgt_core::sim::{simulate_and_compare, simulate_pair, SimConfig};
use wlgt_core::spectral::{
    check_identifying, identifying_targets, laplacian_decomposition, lpe, spe, EncoderParams, IdentifyTarget,
};
use wlgt_core::tokenizer::{node_tokens, tuple_tokens, AtpMode, PeKind, TokenizerConfig};
use wlgt_core::wl::{distinguish_with, refine_to_stable_with, ColoringReport, Variant, DEFAULT_MAX_ITER};
use wlgt_core::Error;

/// Weisfeiler-Leman refinement and graph-transformer simulation tools.
#[derive(Debug, Parser)]
#[command(name = "wlgt", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Global {
    /// Seed of every pseudo-random table.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Softmax temperature of constructed attention heads.
    #[arg(long, global = true, default_value_t = 60.0)]
    pub b: f64,
    /// Tolerance used by verification subcommands.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Refine one graph to a stable coloring.
    Refine(RefineArgs),
    /// Decide whether a variant tells two graphs apart.
    Distinguish(DistinguishArgs),
    /// Run every variant over the built-in pairs and isomorphic controls.
    Bench(bench::BenchArgs),
    /// Run the constructed transformer next to WL refinement.
    Simulate(SimulateArgs),
    /// Positional encodings of a graph.
    Pe(PeArgs),
    /// Check the node- and adjacency-identifying targets.
    VerifyIdentifying(VerifyArgs),
    /// Token matrix of a graph.
    Tokens(TokensArgs),
    /// Print a built-in graph pair.
    Pair(PairArgs),
}

#[derive(Debug, Clone, Args)]
struct Order {
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Component bound; defaults to k.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value = "kwl", value_parser = parse_variant)]
    variant: Variant,
}

impl Order {
    fn s(&self) -> usize {
        self.s.unwrap_or(self.k)
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    order: Order,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DistinguishArgs {
    #[arg(long, requires = "g2", conflicts_with = "pair")]
    g1: Option<PathBuf>,
    #[arg(long, requires = "g1")]
    g2: Option<PathBuf>,
    /// Built-in pair instead of two files.
    #[arg(long, required_unless_present = "g1")]
    pair: Option<String>,
    #[command(flatten)]
    order: Order,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "pair", required_unless_present = "pair")]
    graph: Option<PathBuf>,
    /// Simulate both graphs of a built-in pair side by side.
    #[arg(long)]
    pair: Option<String>,
    #[command(flatten)]
    order: Order,
    /// Number of layers; defaults to the rounds WL needs to stabilize.
    #[arg(long)]
    layers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PeChoice {
    Lpe,
    Spe,
}

#[derive(Debug, Args)]
struct PeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "lpe")]
    kind: PeChoice,
    /// Eigenpairs used; defaults to all.
    #[arg(long)]
    eig_count: Option<usize>,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// SPE rank; defaults to the eigenpair count.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    normalized: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    normalized: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TokenPe {
    Lpe,
    Spe,
    RawTargets,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AtpChoice {
    Matrix,
    Edges,
}

#[derive(Debug, Args)]
struct TokensArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, value_enum, default_value = "lpe")]
    pe: TokenPe,
    /// Leave out degree and positional terms.
    #[arg(long)]
    no_structure: bool,
    #[arg(long, value_enum, default_value = "matrix")]
    atp: AtpChoice,
    #[arg(long)]
    normalized: bool,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    name: String,
}

/// What a subcommand produced: the stdout document and whether a
/// verification it ran passed.
struct Outcome {
    output: String,
    pass: bool,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome { output, pass: true }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output serializes")
}

fn load(path: &Path) -> Result<Graph, Error> {
    load_graph_file(path)
}

fn refine(args: &RefineArgs) -> Result<Outcome, Error> {
    let g = load(&args.graph)?;
    let o = &args.order;
    let history = refine_to_stable_with(&g, o.k, o.s(), o.variant, args.max_iter)?;
    let report = ColoringReport::from_history(o.variant, &history).to_json();
    match &args.out {
        Some(path) => {
            std::fs::write(path, format!("{report}\n")).map_err(|e| Error::Io(e.to_string()))?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(report)),
    }
}

fn distinguish(args: &DistinguishArgs) -> Result<Outcome, Error> {
    let (g, h) = match (&args.pair, &args.g1, &args.g2) {
        (Some(name), _, _) => builtin_pair(name)?,
        (None, Some(a), Some(b)) => (load(a)?, load(b)?),
        _ => return Err(Error::InvalidArgument("give --g1 and --g2, or --pair".into())),
    };
    let o = &args.order;
    let verdict = distinguish_with(&g, &h, o.variant, o.k, o.s(), args.max_iter)?;
    Ok(Outcome::ok(to_json(&verdict)))
}

fn simulate(args: &SimulateArgs, global: &Global) -> Result<Outcome, Error> {
    let o = &args.order;
    let mut cfg = SimConfig::new(o.k, o.s(), o.variant).with_temperature(global.b);
    cfg.layers = args.layers;
    if let Some(name) = &args.pair {
        let (g, h) = builtin_pair(name)?;
        let report = simulate_pair(&g, &h, &cfg)?;
        let pass = report.partition_equal_per_layer.iter().all(|&e| e)
            && report.wl == report.transformer
            && report.max_attention_error < global.tol;
        return Ok(Outcome { output: report.to_json(), pass });
    }
    let path = args.graph.as_ref().ok_or_else(|| Error::InvalidArgument("give --graph or --pair".into()))?;
    let report = simulate_and_compare(&load(path)?, &cfg)?;
    let pass = report.all_equal() && report.max_attention_error < global.tol;
    Ok(Outcome { output: report.to_json(), pass })
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn pe(args: &PeArgs, global: &Global) -> Result<Outcome, Error> {
    let g = load(&args.graph)?;
    let dec = laplacian_decomposition(&g, args.normalized)?;
    let count = args.eig_count.unwrap_or(g.num_nodes());
    let params = EncoderParams::new(global.seed, count, args.dim);
    let (kind, m) = match args.kind {
        PeChoice::Lpe => ("lpe", lpe(&dec, &params)?),
        PeChoice::Spe => ("spe", spe(&dec, &params, args.rank.unwrap_or(count))?),
    };
    let doc = json!({
        "kind": kind,
        "n": g.num_nodes(),
        "dim": args.dim,
        "eigenvalues": dec.eigenvalues.iter().collect::<Vec<_>>(),
        "rows": rows(&m),
    });
    Ok(Outcome::ok(doc.to_string()))
}

fn verify_identifying(args: &VerifyArgs, global: &Global) -> Result<Outcome, Error> {
    let g = load(&args.graph)?;
    let t = identifying_targets(&g, args.normalized)?;
    let node = check_identifying(&t.p_node, &t.w_q_node, &t.w_k_node, &g, IdentifyTarget::Node)?;
    let adjacency = check_identifying(&t.p_adj, &t.w_q_adj, &t.w_k_adj, &g, IdentifyTarget::Adjacency)?;
    let residual = t.decomposition.residual;
    let pass = node.pass && adjacency.pass && residual <= global.tol;
    let margin = node.margin.min(adjacency.margin);
    let mut rows_failed: Vec<usize> = node.rows_failed.iter().chain(&adjacency.rows_failed).copied().collect();
    rows_failed.sort_unstable();
    rows_failed.dedup();
    let doc = json!({
        "pass": pass,
        "margin": margin,
        "rows_failed": rows_failed,
        "residual": residual,
        "node": node,
        "adjacency": adjacency,
    });
    Ok(Outcome { output: doc.to_string(), pass })
}

fn tokens(args: &TokensArgs, global: &Global) -> Result<Outcome, Error> {
    let g = load(&args.graph)?;
    let mut cfg = TokenizerConfig::new(args.k, args.s.unwrap_or(args.k), args.dim)
        .with_seed(global.seed)
        .with_pe(match args.pe {
            TokenPe::Lpe => PeKind::Lpe,
            TokenPe::Spe => PeKind::Spe,
            TokenPe::RawTargets => PeKind::RawTargets,
        })
        .with_atp_mode(match args.atp {
            AtpChoice::Matrix => AtpMode::Matrix,
            AtpChoice::Edges => AtpMode::Edges,
        });
    cfg.normalized_laplacian = args.normalized;
    if args.no_structure {
        cfg = cfg.without_structure();
    }
    let m = if cfg.k == 1 && cfg.s == 1 { node_tokens(&g, &cfg)? } else { tuple_tokens(&g, &cfg)? };
    Ok(Outcome::ok(m.to_json()))
}

fn pair(args: &PairArgs) -> Result<Outcome, Error> {
    let (g, h) = builtin_pair(&args.name)?;
    let doc = json!({ "name": args.name, "g1": g.to_doc(), "g2": h.to_doc() });
    Ok(Outcome::ok(doc.to_string()))
}

fn error_json(code: &str, message: &str) -> String {
    json!({ "error": { "code": code, "message": message } }).to_string()
}

/// Parses `args`, runs the subcommand and returns the process exit code:
/// 0 success, 1 failed verification, 2 bad input, 3 resource limit.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            let _ = writeln!(stderr, "{}", error_json("USAGE", first));
            return 2;
        }
    };
    let g = &cli.global;
    let result = match &cli.command {
        Command::Refine(a) => refine(a),
        Command::Distinguish(a) => distinguish(a),
        Command::Bench(a) => bench::run(a, g).map(|(output, pass)| Outcome { output, pass }),
        Command::Simulate(a) => simulate(a, g),
        Command::Pe(a) => pe(a, g),
        Command::VerifyIdentifying(a) => verify_identifying(a, g),
        Command::Tokens(a) => tokens(a, g),
        Command::Pair(a) => pair(a),
    };
    match result {
        Ok(outcome) => {
            if !outcome.output.is_empty() {
                let text = if outcome.output.ends_with('\n') { outcome.output } else { outcome.output + "\n" };
                if stdout.write_all(text.as_bytes()).is_err() {
                    return 2;
                }
            }
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(e.code(), &e.to_string()));
            if e.is_resource_limit() {
                3
            } else {
                2
            }
        }
    }
}
