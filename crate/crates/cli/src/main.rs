use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use qss_core::access::{classify, complement_witness_c, normalize_set, witness_d, AccessError};
use qss_core::bounds::{curve, curve_csv, finite_lower_bound, BoundsError};
use qss_core::multigraph::{rs747, star3, DealerGraph, GraphError, Multigraph};
use qss_core::oracle::{graph_hash, Oracle, OracleError, DEFAULT_AMPLITUDE_BUDGET};
use qss_core::search::{exhaustive_search, random_trials, scheme_k, Checkpoint, SearchConfig, SearchError, SearchStatus};

#[derive(Parser, Debug)]
#[command(name = "qss", version, about = "Graph-state secret sharing over prime fields")]
struct Cli {
    /// Print only the result payload instead of the full report.
    #[arg(long, global = true)]
    payload_only: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical and quantum access of a player set.
    Access(SetArgs),
    /// Threshold of a dealer graph.
    SchemeK(GraphArgs),
    /// Exhaustive search for a graph realising a `((k, n-1))` scheme.
    Search(SearchArgs),
    /// Random-graph trials at threshold fraction alpha.
    Sample(SampleArgs),
    /// CSV of the asymptotic bound and the random-graph threshold per prime.
    Bounds(BoundsArgs),
    /// Largest k ruled out by the counting bound at finite n.
    FiniteBound(FiniteArgs),
    /// Cross-checks rank-based verdicts against the state-vector oracle.
    OracleVerify(VerifyArgs),
    /// Emits a built-in graph in text form.
    Fixture { name: FixtureName },
    /// Classical secret rounds through graph-state measurements.
    CqRound(RoundArgs),
    /// Encodes a random quantum secret and decodes it with Bell pairs.
    QqDecode(DecodeArgs),
}

#[derive(Args, Debug, Serialize)]
struct GraphArgs {
    /// Graph file in text form, or `-` for standard input.
    graph: PathBuf,
    #[arg(long)]
    dealer: usize,
}

#[derive(Args, Debug, Serialize)]
struct SetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// Comma-separated 0-based player indices.
    #[arg(long, value_parser = parse_set, allow_hyphen_values = true)]
    set: VertexSet,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    k: usize,
    /// Graphs examined in this invocation.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Try every vertex as dealer instead of vertex 0 only.
    #[arg(long)]
    any_dealer: bool,
    /// Resume from this file if it exists and write progress back to it.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    #[arg(long, default_value_t = 2)]
    qmin: u32,
    #[arg(long, default_value_t = 31)]
    qmax: u32,
    #[arg(long, default_value_t = 1)]
    step: u32,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct FiniteArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    q: u32,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// Check only this set; all nonempty player sets otherwise.
    #[arg(long, value_parser = parse_set)]
    set: Option<VertexSet>,
    /// Amplitude budget of the state-vector oracle.
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE_BUDGET)]
    amplitudes: usize,
}

#[derive(Args, Debug, Serialize)]
struct RoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    #[arg(long, value_parser = parse_set)]
    set: VertexSet,
    /// Measurement basis index.
    #[arg(long, default_value_t = 0)]
    t: u32,
    #[arg(long, default_value_t = 10)]
    rounds: u32,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE_BUDGET)]
    amplitudes: usize,
}

#[derive(Args, Debug, Serialize)]
struct DecodeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    #[arg(long, value_parser = parse_set)]
    set: VertexSet,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE_BUDGET)]
    amplitudes: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FixtureName {
    Rs747,
    Star3,
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct VertexSet(Vec<usize>);

fn parse_set(s: &str) -> Result<VertexSet, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| format!("`{t}` is not a vertex index")))
        .collect::<Result<_, _>>()
        .map(VertexSet)
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Precondition(String),
    Budget(String),
    Disagreement(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Precondition(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Disagreement(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Precondition(m) | Failure::Budget(m) | Failure::Disagreement(m) => m,
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse { .. } => Failure::Parse(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<AccessError> for Failure {
    fn from(e: AccessError) -> Self {
        match e {
            AccessError::Graph(g) => g.into(),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Graph(g) => g.into(),
            SearchError::Access(a) => a.into(),
            SearchError::Budget(m) => Failure::Budget(m),
            SearchError::Checkpoint(m) => Failure::Parse(format!("checkpoint: {m}")),
            SearchError::Precondition(_) => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Budget { .. } => Failure::Budget(e.to_string()),
            OracleError::Graph(g) => g.into(),
            OracleError::Access(a) => a.into(),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        Failure::Precondition(e.to_string())
    }
}

/// What a command hands back: a JSON result, or raw text for commands whose
/// output is a file format.
enum Output {
    Json { inputs: Value, seed: Option<u64>, result: Value },
    Text(String),
}

fn read_graph(path: &Path) -> Result<Multigraph, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Parse(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?
    };
    Ok(Multigraph::parse(&text)?)
}

/// Drops the dealer from `set` with a warning, then sorts and deduplicates.
fn player_set(g: &Multigraph, dealer: usize, set: &VertexSet) -> Result<Vec<usize>, Failure> {
    let mut b = set.0.clone();
    if b.contains(&dealer) {
        log::warn!("dealer {dealer} removed from the player set");
        b.retain(|&v| v != dealer);
    }
    Ok(normalize_set(g, dealer, &b)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

/// Inputs echo with the graph's content hash, so a re-run against a changed
/// file is detectable.
fn inputs_with_hash<T: Serialize>(args: &T, g: &Multigraph) -> Value {
    let mut v = to_value(args);
    v["graph_hash"] = json!(graph_hash(g));
    v
}

fn random_secret(q: u32, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let raw: Vec<Complex64> = (0..q).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / norm).collect()
}

fn run(command: &Command) -> Result<(Output, Option<Failure>), Failure> {
    let out = match command {
        Command::Access(a) => {
            let g = read_graph(&a.graph.graph)?;
            let b = player_set(&g, a.graph.dealer, &a.set)?;
            let verdict = classify(&g, a.graph.dealer, &b)?;
            let mut result = to_value(&verdict);
            result["B"] = json!(b);
            Output::Json { inputs: inputs_with_hash(a, &g), seed: None, result }
        }
        Command::SchemeK(a) => {
            let g = read_graph(&a.graph)?;
            let dg = DealerGraph::new(g, a.dealer)?;
            let report = scheme_k(&dg)?;
            Output::Json { inputs: inputs_with_hash(a, &dg.graph), seed: None, result: to_value(&report) }
        }
        Command::Search(a) => return search(a),
        Command::Sample(a) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers.max(1)).build().map_err(|e| Failure::Precondition(e.to_string()))?;
            let summary = pool.install(|| random_trials(a.n, a.q, a.alpha, a.trials, a.seed))?;
            Output::Json { inputs: to_value(a), seed: Some(a.seed), result: to_value(&summary) }
        }
        Command::Bounds(a) => {
            if a.qmin > a.qmax {
                return Err(Failure::Precondition(format!("qmin {} exceeds qmax {}", a.qmin, a.qmax)));
            }
            Output::Text(curve_csv(&curve(a.qmin, a.qmax, a.step, a.tol)?))
        }
        Command::FiniteBound(a) => Output::Json { inputs: to_value(a), seed: None, result: to_value(&finite_lower_bound(a.n, a.q)?) },
        Command::OracleVerify(a) => return oracle_verify(a),
        Command::Fixture { name } => Output::Text(match name {
            FixtureName::Rs747 => rs747().graph.to_text(),
            FixtureName::Star3 => star3().graph.to_text(),
        }),
        Command::CqRound(a) => {
            let g = read_graph(&a.graph.graph)?;
            let d = a.graph.dealer;
            let b = player_set(&g, d, &a.set)?;
            let oracle = Oracle::new(a.amplitudes);
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let rounds = (0..a.rounds).map(|_| oracle.cq_round(&g, d, &b, a.t, &mut rng)).collect::<Result<Vec<_>, _>>()?;
            let agree = rounds.iter().filter(|r| r.reconstructed == r.dealer).count();
            let result = json!({ "B": b, "t": a.t, "rounds": rounds, "agreeing": agree });
            Output::Json { inputs: inputs_with_hash(a, &g), seed: Some(a.seed), result }
        }
        Command::QqDecode(a) => {
            let g = read_graph(&a.graph.graph)?;
            let d = a.graph.dealer;
            let b = player_set(&g, d, &a.set)?;
            let (Some(dw), Some(cw)) = (witness_d(&g, d, &b)?, complement_witness_c(&g, d, &b)?) else {
                return Err(Failure::Precondition(format!("player set {b:?} has no quantum access")));
            };
            let oracle = Oracle::new(a.amplitudes);
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let secret = random_secret(g.q(), &mut rng);
            let encoded = oracle.qq_encode(&g, d, &secret)?;
            let decoded = oracle.qq_decode_bell(&g, d, &b, &dw, &cw, &encoded)?;
            let pairs = |v: &[Complex64]| v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
            let result = json!({
                "B": b,
                "witness_d": dw,
                "witness_c": cw,
                "secret": pairs(&secret),
                "recovered": pairs(&decoded.recovered()),
                "fidelity": decoded.fidelity(&secret),
                "syndromes": decoded.syndromes.len(),
            });
            Output::Json { inputs: inputs_with_hash(a, &g), seed: Some(a.seed), result }
        }
    };
    Ok((out, None))
}

fn search(a: &SearchArgs) -> Result<(Output, Option<Failure>), Failure> {
    let config = SearchConfig { n: a.n, q: a.q, k: a.k, dealer_fixed: !a.any_dealer, budget: a.budget, workers: a.workers };
    let resume = match &a.checkpoint {
        Some(p) if p.exists() => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?;
            Some(Checkpoint::parse(&text, &config)?)
        }
        _ => None,
    };
    let outcome = exhaustive_search(&config, resume)?;
    if let Some(p) = &a.checkpoint {
        std::fs::write(p, outcome.checkpoint.to_text()).map_err(|e| Failure::Precondition(format!("{}: {e}", p.display())))?;
    }
    let failure = (outcome.status == SearchStatus::BudgetExceeded)
        .then(|| Failure::Budget(format!("search budget of {} graphs used up after {} of {}", a.budget, outcome.examined, outcome.total)));
    let result = json!({
        "status": outcome.status,
        "index": outcome.index,
        "dealer": outcome.dealer,
        "graph": outcome.graph,
        "examined": outcome.examined,
        "total": outcome.total,
    });
    Ok((Output::Json { inputs: to_value(a), seed: None, result }, failure))
}

fn oracle_verify(a: &VerifyArgs) -> Result<(Output, Option<Failure>), Failure> {
    let g = read_graph(&a.graph.graph)?;
    let d = a.graph.dealer;
    let oracle = Oracle::new(a.amplitudes);
    let sets: Vec<Vec<usize>> = match &a.set {
        Some(s) => vec![player_set(&g, d, s)?],
        None => {
            let players: Vec<usize> = (0..g.order()).filter(|&v| v != d).collect();
            if players.len() > 20 {
                return Err(Failure::Budget(format!("{} players give too many sets; pass --set", players.len())));
            }
            (1u64..1 << players.len()).map(|m| players.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &v)| v).collect()).collect()
        }
    };
    let mut rows = Vec::with_capacity(sets.len());
    let mut disagreements = 0;
    for b in &sets {
        let report = oracle.verify(&g, d, b)?;
        let agrees = report.agrees();
        disagreements += usize::from(!agrees);
        let mut row = to_value(&report);
        row["agrees"] = json!(agrees);
        rows.push(row);
    }
    let failure = (disagreements > 0).then(|| Failure::Disagreement(format!("{disagreements} of {} sets disagree", sets.len())));
    let result = json!({ "graph_hash": graph_hash(&g), "dealer": d, "checked": sets.len(), "disagreements": disagreements, "rows": rows });
    Ok((Output::Json { inputs: inputs_with_hash(a, &g), seed: None, result }, failure))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Access(_) => "access",
        Command::SchemeK(_) => "scheme-k",
        Command::Search(_) => "search",
        Command::Sample(_) => "sample",
        Command::Bounds(_) => "bounds",
        Command::FiniteBound(_) => "finite-bound",
        Command::OracleVerify(_) => "oracle-verify",
        Command::Fixture { .. } => "fixture",
        Command::CqRound(_) => "cq-round",
        Command::QqDecode(_) => "qq-decode",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let start = Instant::now();
    let (output, failure) = match run(&cli.command) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return ExitCode::from(f.code());
        }
    };
    let text = match output {
        Output::Text(t) => t,
        Output::Json { result, .. } if cli.payload_only => serde_json::to_string_pretty(&result).expect("json") + "\n",
        Output::Json { inputs, seed, result } => {
            let report = json!({
                "command": command_name(&cli.command),
                "inputs": inputs,
                "seed": seed,
                "result": result,
                "wall_time_ms": start.elapsed().as_millis() as u64,
            });
            serde_json::to_string_pretty(&report).expect("json") + "\n"
        }
    };
    if io::stdout().write_all(text.as_bytes()).is_err() {
        return ExitCode::from(2);
    }
    match failure {
        Some(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
        None => ExitCode::SUCCESS,
    }
}
