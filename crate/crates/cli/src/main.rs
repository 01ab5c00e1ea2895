//! `dnnfmt`: compile SMT(LRA) formulas to d-DNNF / OBDD artifacts and query
//! them.
//!
//! Exit codes: 0 true or success, 1 false, 2 usage or parse error,
//! 3 mode violation, 4 timeout.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use dnnfmt::bench::{self, BenchConfig, Timeouts};
use dnnfmt::query;
use dnnfmt::{
    build, generate, load_artifact, parse_smt2, print_smt2, save_artifact, AbstractionMap, BuildOptions, CompiledArtifact,
    Error, FormulaId, FormulaStore, InstanceSpec, LemmaScope, Lit, MapFile, Mode, Oracle, Target, Var,
};

#[derive(Parser)]
#[command(name = "dnnfmt", version, about = "Knowledge compilation modulo linear real arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tred,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Ddnnf,
    Obdd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Formula,
    Top,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Verb {
    Co,
    Va,
    Ce,
    Im,
    Ct,
    Me,
    Eq,
    Se,
}

#[derive(clap::Args)]
struct QueryArgs {
    /// Clause for `ce`, as comma-separated literals.
    #[arg(long)]
    clause: Option<String>,
    /// Cube for `im`, as comma-separated literals.
    #[arg(long)]
    cube: Option<String>,
    /// Cube for `ct` under assumptions.
    #[arg(long)]
    assume: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a formula into an artifact.
    Compile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "ddnnf")]
        target: TargetArg,
        #[arg(long = "lemmas-scope", value_enum, default_value = "formula")]
        lemmas_scope: ScopeArg,
        /// OBDD variable order: one atom or variable index per line.
        #[arg(long)]
        order: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long = "lemmas-out")]
        lemmas_out: Option<PathBuf>,
        #[arg(long)]
        smooth: bool,
        #[arg(long = "timeout-s")]
        timeout_s: Option<f64>,
    },
    /// Query a compiled artifact.
    Query {
        #[arg(value_enum)]
        verb: Verb,
        nnf: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        args: QueryArgs,
        /// Second artifact for `eq` and `se`.
        #[arg(long, num_args = 2, value_names = ["NNF", "MAP"])]
        other: Option<Vec<PathBuf>>,
    },
    /// Answer a query by exhaustive enumeration.
    Oracle {
        #[arg(value_enum)]
        verb: Verb,
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "alpha-from")]
        alpha_from: PathBuf,
        #[command(flatten)]
        args: QueryArgs,
        /// Second formula for `eq` and `se`.
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long = "bool-atoms")]
        bool_atoms: usize,
        #[arg(long = "lra-atoms")]
        lra_atoms: usize,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark configuration.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long = "timeout-s")]
        timeout_s: Option<f64>,
    },
}

/// Result of a command: a verdict for Boolean queries, plain success
/// otherwise.
enum Outcome {
    Done,
    Verdict(bool),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ModeViolation { .. } | Error::Unsupported(_) => 3,
        Error::Timeout(_) => 4,
        _ => 2,
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        e => e,
    }
}

fn read(path: &Path) -> dnnfmt::Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(path, e.into()))
}

fn parse_lits(map: &AbstractionMap, text: Option<&str>, flag: &str) -> dnnfmt::Result<Vec<Lit>> {
    let text = text.ok_or_else(|| Error::Invalid(format!("missing --{flag}")))?;
    text.split(',').filter(|t| !t.trim().is_empty()).map(|t| map.parse_lit(t)).collect()
}

fn read_order(path: &Path, map: &AbstractionMap) -> dnnfmt::Result<Vec<Var>> {
    let mut order = Vec::new();
    for (i, line) in read(path)?.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = match t.parse::<u32>() {
            Ok(k) if k >= 1 && (k as usize) <= map.num_vars() => Var::new(k),
            Ok(k) => return Err(Error::Format { line: i + 1, msg: format!("variable {k} out of range") }),
            Err(_) => map.parse_lit(t).map_err(|e| Error::Format { line: i + 1, msg: e.to_string() })?.var(),
        };
        order.push(v);
    }
    let mut sorted: Vec<u32> = order.iter().map(|v| v.get()).collect();
    sorted.sort_unstable();
    if sorted != (1..=map.num_vars() as u32).collect::<Vec<_>>() {
        return Err(Error::Invalid("order must list every atom exactly once".into()));
    }
    Ok(order)
}

fn print_verdict(b: bool) -> Outcome {
    println!("{b}");
    Outcome::Verdict(b)
}

#[allow(clippy::too_many_arguments)]
fn compile(
    input: &Path,
    mode: ModeArg,
    target: TargetArg,
    scope: ScopeArg,
    order: Option<&Path>,
    out: &Path,
    map_path: &Path,
    lemmas_out: Option<&Path>,
    smooth: bool,
    timeout_s: Option<f64>,
) -> dnnfmt::Result<Outcome> {
    let mut store = FormulaStore::new();
    let (phi, alpha) = parse_smt2(&mut store, &read(input)?)?;
    let map = AbstractionMap::new(alpha.clone());
    let options = BuildOptions {
        target: match target {
            TargetArg::Ddnnf => Target::Ddnnf,
            TargetArg::Obdd => Target::Obdd,
        },
        scope: match scope {
            ScopeArg::Formula => LemmaScope::Formula,
            ScopeArg::Top => LemmaScope::Top,
        },
        smooth,
        order: order.map(|p| read_order(p, &map)).transpose()?,
        deadline: timeout_s.map(|t| Instant::now() + Duration::from_secs_f64(t)),
        ..BuildOptions::default()
    };
    let mode = match mode {
        ModeArg::Tred => Mode::TReduced,
        ModeArg::Text => Mode::TExtended,
    };
    let a = build(&mut store, phi, &alpha, mode, &options)?;
    save_artifact(&a, out, map_path)?;
    if let Some(p) = lemmas_out {
        let name = map_path.file_name().map_or_else(|| map_path.display().to_string(), |n| n.to_string_lossy().into_owned());
        fs::write(p, dnnfmt::nnf_io::write_lemmas(&a.lemmas, &name)).map_err(|e| with_path(p, e.into()))?;
    }
    println!(
        "{} {}: {} atoms, {} lemmas, {} nodes",
        a.mode.name(),
        a.target().name(),
        a.num_vars(),
        a.lemmas.len(),
        a.dag_nodes()
    );
    Ok(Outcome::Done)
}

fn run_query(verb: Verb, a: &CompiledArtifact, args: &QueryArgs, other: Option<&CompiledArtifact>) -> dnnfmt::Result<Outcome> {
    let map = &a.map;
    Ok(match verb {
        Verb::Co => print_verdict(query::is_consistent(a)?),
        Verb::Va => print_verdict(query::is_valid(a)?),
        Verb::Ce => print_verdict(query::entails_clause(a, &parse_lits(map, args.clause.as_deref(), "clause")?)?),
        Verb::Im => print_verdict(query::is_implicant(a, &parse_lits(map, args.cube.as_deref(), "cube")?)?),
        Verb::Ct => {
            let n = match &args.assume {
                Some(c) => query::count_models_assume(a, &parse_lits(map, Some(c), "assume")?)?,
                None => query::count_models(a)?,
            };
            println!("{n}");
            Outcome::Done
        }
        Verb::Me => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            for m in query::enumerate_models(a)? {
                writeln!(w, "{}", m.display_with(map))?;
            }
            w.flush()?;
            Outcome::Done
        }
        Verb::Eq | Verb::Se => {
            let b = other.ok_or_else(|| Error::Invalid("missing --other".into()))?;
            print_verdict(if verb == Verb::Eq { query::equivalent(a, b)? } else { query::sentential_entails(a, b)? })
        }
    })
}

fn query_cmd(verb: Verb, nnf: &Path, map: &Path, args: &QueryArgs, other: Option<&[PathBuf]>) -> dnnfmt::Result<Outcome> {
    let a = load_artifact(nnf, map, None).map_err(|e| with_path(nnf, e))?;
    let b = match other {
        Some([n, m]) => Some(load_artifact(n, m, a.obdd().map(|o| o.manager.clone())).map_err(|e| with_path(n, e))?),
        _ => None,
    };
    run_query(verb, &a, args, b.as_ref())
}

fn oracle_cmd(verb: Verb, input: &Path, alpha_from: &Path, args: &QueryArgs, other: Option<&Path>) -> dnnfmt::Result<Outcome> {
    let alpha = MapFile::parse(&read(alpha_from)?)?.alpha()?;
    let map = AbstractionMap::new(alpha.clone());
    let mut store = FormulaStore::new();
    let (phi, _) = parse_smt2(&mut store, &read(input)?)?;
    let mut oracle = Oracle::new(&alpha)?;
    let second = |store: &mut FormulaStore| -> dnnfmt::Result<FormulaId> {
        let p = other.ok_or_else(|| Error::Invalid("missing --other".into()))?;
        Ok(parse_smt2(store, &read(p)?)?.0)
    };
    Ok(match verb {
        Verb::Co => print_verdict(oracle.co(&store, phi)?),
        Verb::Va => print_verdict(oracle.va(&store, phi)?),
        Verb::Ce => print_verdict(oracle.ce(&store, phi, &parse_lits(&map, args.clause.as_deref(), "clause")?)?),
        Verb::Im => print_verdict(oracle.im(&store, phi, &parse_lits(&map, args.cube.as_deref(), "cube")?)?),
        Verb::Ct => {
            let n = match &args.assume {
                Some(c) => oracle.ct_assume(&store, phi, &parse_lits(&map, Some(c), "assume")?)?,
                None => oracle.ct(&store, phi)?,
            };
            println!("{n}");
            Outcome::Done
        }
        Verb::Me => {
            for m in oracle.me(&store, phi)? {
                println!("{}", m.display_with(&map));
            }
            Outcome::Done
        }
        Verb::Eq => {
            let psi = second(&mut store)?;
            print_verdict(oracle.eq(&store, phi, psi)?)
        }
        Verb::Se => {
            let psi = second(&mut store)?;
            print_verdict(oracle.se(&store, phi, psi)?)
        }
    })
}

fn gen_cmd(spec: InstanceSpec, out: &Path) -> dnnfmt::Result<Outcome> {
    let mut store = FormulaStore::new();
    let (phi, _) = generate(&mut store, &spec);
    let mut text = format!(
        "; seed {} bool-atoms {} lra-atoms {} vars {} depth {}\n",
        spec.seed, spec.bool_atoms, spec.lra_atoms, spec.vars, spec.depth
    );
    text.push_str(&print_smt2(&store, phi));
    fs::write(out, text).map_err(|e| with_path(out, e.into()))?;
    Ok(Outcome::Done)
}

fn bench_cmd(spec: &Path, out: &Path, jobs: usize, timeout_s: Option<f64>) -> dnnfmt::Result<Outcome> {
    let mut cfg = BenchConfig::from_toml(&read(spec)?)?;
    if let Some(t) = timeout_s {
        cfg.timeouts = Timeouts::uniform(t);
    }
    let base = spec.parent().unwrap_or(Path::new("."));
    let instances = cfg.instances(base);
    let file = fs::File::create(out).map_err(|e| with_path(out, e.into()))?;
    let rows = bench::run(&instances, &cfg, jobs, BufWriter::new(file))?;
    println!("{} instances, {rows} rows", instances.len());
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile { input, mode, target, lemmas_scope, order, out, map, lemmas_out, smooth, timeout_s } => compile(
            input,
            *mode,
            *target,
            *lemmas_scope,
            order.as_deref(),
            out,
            map,
            lemmas_out.as_deref(),
            *smooth,
            *timeout_s,
        ),
        Command::Query { verb, nnf, map, args, other } => query_cmd(*verb, nnf, map, args, other.as_deref()),
        Command::Oracle { verb, input, alpha_from, args, other } => oracle_cmd(*verb, input, alpha_from, args, other.as_deref()),
        Command::Gen { seed, bool_atoms, lra_atoms, vars, depth, out } => gen_cmd(
            InstanceSpec {
                seed: *seed,
                bool_atoms: *bool_atoms,
                lra_atoms: *lra_atoms,
                vars: *vars,
                depth: *depth,
                ..InstanceSpec::default()
            },
            out,
        ),
        Command::Bench { spec, out, jobs, timeout_s } => bench_cmd(spec, out, *jobs, *timeout_s),
    };
    match result {
        Ok(Outcome::Done) | Ok(Outcome::Verdict(true)) => ExitCode::SUCCESS,
        Ok(Outcome::Verdict(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
