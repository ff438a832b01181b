use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use mimsolve_core::decomp::{
    caterpillar_from_order, interval_order, load_decomposition, load_intervals, DecompTree,
};
use mimsolve_core::dp::{solve_with, Fault, SolveError, SolverConfig, Status};
use mimsolve_core::gen::{gnp, interval_graph, intervals_to_text, random_order};
use mimsolve_core::graph::{load_graph, Graph};
use mimsolve_core::nec::{snec_stats, Families};
use mimsolve_core::oracle::{brute_solve, evaluate_coloring};
use mimsolve_core::problems::{
    catalog, catalog_names, load_problem_file, CatalogParams, ProblemSpec, SizeConstraint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mimsolve",
    version,
    about = "Exact solver for locally checkable partitioning problems over decompositions"
)]
struct Cli {
    /// Worker threads for the solver (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and write the result.
    Solve(SolveArgs),
    /// Compare the solver with exhaustive search on random graphs.
    Verify(VerifyArgs),
    /// Write a random or structured graph.
    Gen(GenArgs),
    /// Print equivalence class counts per decomposition node.
    Classes(ClassesArgs),
    /// List built-in problems.
    Catalog,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DecompSource {
    /// Decomposition tree file.
    #[arg(long)]
    decomp: Option<PathBuf>,
    /// Vertex order (1-based ids) for a caterpillar.
    #[arg(long)]
    order: Option<PathBuf>,
    /// Interval model; its left-endpoint order gives a caterpillar.
    #[arg(long)]
    intervals: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ProblemSource {
    /// Catalog problem, `name` or `name:params` (e.g. `k-roman:k=2`).
    #[arg(long)]
    problem: Option<String>,
    /// Problem definition file.
    #[arg(long)]
    problem_file: Option<PathBuf>,
}

#[derive(Args)]
struct Budgets {
    /// Most keys per table.
    #[arg(long, default_value_t = SolverConfig::default().budget_keys)]
    budget_keys: usize,
    /// Most candidates produced by one join.
    #[arg(long, default_value_t = SolverConfig::default().budget_pool)]
    budget_pool: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    decomp: DecompSource,
    #[command(flatten)]
    problem: ProblemSource,
    /// Size constraint: `all`, `balanced`, `min <m1> .. <mq>` or
    /// `exact <K1> .. <Kq>[; ...]`.
    #[arg(long)]
    sizes: Option<String>,
    /// Accepted for uniformity; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budgets: Budgets,
    /// Result file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    /// Keep the heaviest candidates in every reduction.
    InvertReduction,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    problem: ProblemSource,
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, default_value_t = 1)]
    min_n: usize,
    /// Base seed; trial `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budgets: Budgets,
    /// Run a deliberately broken solver (negative control).
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
    /// Report file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Gnp,
    Interval,
    Path,
    Cycle,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long)]
    n: usize,
    /// Edge probability for `gnp`.
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the interval model (`interval` only).
    #[arg(long)]
    intervals_out: Option<PathBuf>,
    /// Where to write a vertex order: the interval order for `interval`,
    /// a seeded random order otherwise.
    #[arg(long)]
    order_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    decomp: DecompSource,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Colour count for the reported `snec_dq`.
    #[arg(long, default_value_t = 1)]
    q: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_graph_file(path: &Path) -> Result<Graph, Failure> {
    load_graph(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_order(text: &str, n: usize) -> Result<Vec<usize>, String> {
    text.split_whitespace()
        .filter(|t| !t.starts_with('#'))
        .map(|t| match t.parse::<usize>() {
            Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
            _ => Err(format!("bad vertex `{t}` in order")),
        })
        .collect()
}

fn load_tree(src: &DecompSource, g: &Graph) -> Result<DecompTree, Failure> {
    let tree = if let Some(p) = &src.decomp {
        load_decomposition(&read(p)?, g).map_err(|e| e.to_string())
    } else if let Some(p) = &src.order {
        parse_order(&read(p)?, g.n())
            .and_then(|o| caterpillar_from_order(g, &o).map_err(|e| e.to_string()))
    } else if let Some(p) = &src.intervals {
        load_intervals(&read(p)?)
            .map_err(|e| e.to_string())
            .and_then(|iv| {
                caterpillar_from_order(g, &interval_order(&iv)).map_err(|e| e.to_string())
            })
    } else {
        unreachable!("clap enforces one source")
    };
    tree.map_err(usage)
}

fn parse_sizes(s: &str, q: usize) -> Result<SizeConstraint, String> {
    let s = s.trim();
    let nums = |t: &str| -> Result<Vec<usize>, String> {
        let v: Vec<usize> = t
            .split([' ', ','])
            .filter(|x| !x.is_empty())
            .map(|x| x.parse().map_err(|_| format!("bad size `{x}`")))
            .collect::<Result<_, _>>()?;
        if v.len() == q {
            Ok(v)
        } else {
            Err(format!("expected {q} sizes, got {}", v.len()))
        }
    };
    match s.split_once(' ').map_or((s, ""), |(a, b)| (a, b)) {
        ("all", "") => Ok(SizeConstraint::All),
        ("balanced", "") => Ok(SizeConstraint::Balanced),
        ("min", rest) => Ok(SizeConstraint::AtLeast(nums(rest)?)),
        ("exact", rest) => {
            let set: BTreeSet<Vec<usize>> = rest.split(';').map(nums).collect::<Result<_, _>>()?;
            Ok(SizeConstraint::Explicit(set))
        }
        _ => Err(format!("unknown size constraint `{s}`")),
    }
}

fn load_spec(src: &ProblemSource, sizes: Option<&str>) -> Result<ProblemSpec, Failure> {
    let spec = if let Some(p) = &src.problem {
        let (name, params) = p.split_once(':').unwrap_or((p, ""));
        let params: CatalogParams = params.parse().map_err(|e: String| usage(e))?;
        catalog(name, &params).map_err(|e| usage(e.to_string()))?
    } else if let Some(p) = &src.problem_file {
        load_problem_file(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?
    } else {
        unreachable!("clap enforces one source")
    };
    match sizes {
        None => Ok(spec),
        Some(s) => {
            let k = parse_sizes(s, spec.q()).map_err(usage)?;
            spec.with_sizes(k).map_err(|e| usage(e.to_string()))
        }
    }
}

fn solver_config(b: &Budgets) -> SolverConfig {
    SolverConfig {
        budget_keys: b.budget_keys,
        budget_pool: b.budget_pool,
        check_invariants: false,
        ..SolverConfig::default()
    }
}

fn solve_failure(e: SolveError) -> Failure {
    let code = match e {
        SolveError::Budget { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    };
    Failure {
        code,
        msg: e.to_string(),
    }
}

fn cmd_solve(a: &SolveArgs) -> CmdResult {
    let g = load_graph_file(&a.graph)?;
    let t = load_tree(&a.decomp, &g)?;
    let spec = load_spec(&a.problem, a.sizes.as_deref())?;
    info!("{}", spec.summary());
    let res = solve_with(&spec, &g, &t, &solver_config(&a.budgets)).map_err(solve_failure)?;
    write_out(a.out.as_deref(), &res.to_text(&spec))?;
    Ok(match res.status {
        Status::Feasible => 0,
        Status::Infeasible => EXIT_INFEASIBLE,
    })
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    if a.min_n == 0 || a.min_n > a.max_n {
        return Err(usage("need 1 <= min-n <= max-n"));
    }
    let spec = load_spec(&a.problem, a.sizes.as_deref())?;
    let mut cfg = solver_config(&a.budgets);
    cfg.fault = a
        .inject_fault
        .map(|FaultArg::InvertReduction| Fault::InvertReductionOrder);
    let mut report = String::new();
    let mut failed = Vec::new();
    for i in 0..a.trials {
        let seed = a.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(a.min_n..=a.max_n);
        let g = gnp(n, rng.gen_range(0.15..0.7), &mut rng);
        let t = caterpillar_from_order(&g, &random_order(n, &mut rng))
            .map_err(|e| usage(e.to_string()))?;
        let want = brute_solve(&spec, &g).map_err(|e| usage(e.to_string()))?;
        let got = solve_with(&spec, &g, &t, &cfg).map_err(solve_failure)?;
        let witness_ok = match &got.witness {
            Some(w) => evaluate_coloring(&spec, &g, w) == Some(got.weight),
            None => !want.feasible,
        };
        let dom = spec.domain();
        let ok = got.weight == want.weight && witness_ok;
        report.push_str(&format!(
            "trial {i} seed {seed} n {n} m {} solver {} oracle {} {}\n",
            g.m(),
            dom.format_elem(got.weight),
            dom.format_elem(want.weight),
            if ok { "ok" } else { "MISMATCH" }
        ));
        if !ok {
            failed.push(seed);
        }
    }
    if !failed.is_empty() {
        let seeds: Vec<String> = failed.iter().map(u64::to_string).collect();
        report.push_str(&format!("failed seeds: {}\n", seeds.join(" ")));
    }
    report.push_str(&format!(
        "{} trials, {} mismatches\n",
        a.trials,
        failed.len()
    ));
    write_out(a.out.as_deref(), &report)?;
    Ok(if failed.is_empty() { 0 } else { EXIT_MISMATCH })
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    if !(0.0..=1.0).contains(&a.p) {
        return Err(usage("p must lie in [0, 1]"));
    }
    if a.intervals_out.is_some() && !matches!(a.kind, GenKind::Interval) {
        return Err(usage("--intervals-out needs the interval kind"));
    }
    let (g, order) = match a.kind {
        GenKind::Gnp => {
            let g = gnp(a.n, a.p, &mut rng);
            let o = random_order(a.n, &mut rng);
            (g, o)
        }
        GenKind::Path => (Graph::path(a.n), random_order(a.n, &mut rng)),
        GenKind::Cycle => {
            if a.n < 3 {
                return Err(usage("a cycle needs n >= 3"));
            }
            (Graph::cycle(a.n), random_order(a.n, &mut rng))
        }
        GenKind::Interval => {
            let (g, iv) = interval_graph(a.n, &mut rng);
            if let Some(p) = &a.intervals_out {
                write_out(Some(p), &intervals_to_text(&iv))?;
            }
            (g, interval_order(&iv))
        }
    };
    if let Some(p) = &a.order_out {
        let text: Vec<String> = order.iter().map(|v| (v + 1).to_string()).collect();
        write_out(Some(p), &format!("{}\n", text.join(" ")))?;
    }
    write_out(a.out.as_deref(), &g.to_text())?;
    Ok(0)
}

fn cmd_classes(a: &ClassesArgs) -> CmdResult {
    if a.d == 0 {
        return Err(usage("d must be at least 1"));
    }
    let g = load_graph_file(&a.graph)?;
    let t = load_tree(&a.decomp, &g)?;
    let fam = Families::build(&g, &t, a.d);
    let mut out = String::from("node\tside\tclasses\n");
    for v in t.postorder() {
        out.push_str(&format!("{}\tinner\t{}\n", t.label(v), fam.inner(v).len()));
        out.push_str(&format!("{}\touter\t{}\n", t.label(v), fam.outer(v).len()));
    }
    let s = snec_stats(&fam, a.q as usize);
    out.push_str(&format!(
        "# snec_d\t{}\n# snec_dq\t{}\tq={}\n",
        s.snec_d, s.snec_dq, a.q
    ));
    write_out(a.out.as_deref(), &out)?;
    Ok(0)
}

fn cmd_catalog() -> CmdResult {
    // parameterised entries are summarised with q=2, k=2
    let example: CatalogParams = "q=2,k=2".parse().expect("valid params");
    let mut out = String::new();
    for (name, desc) in catalog_names() {
        out.push_str(&format!("{name}\t{desc}\n"));
        if let Ok(spec) = catalog(name, &example) {
            for line in spec.summary().lines() {
                out.push_str(&format!("    {line}\n"));
            }
        }
    }
    write_out(None, &out)?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MIMSOLVE_LOG"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        debug!("using {n} threads");
    }
    let result = match &cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Classes(a) => cmd_classes(a),
        Cmd::Catalog => cmd_catalog(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
