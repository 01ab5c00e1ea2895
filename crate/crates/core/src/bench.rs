//! Benchmark harness: compiles a list of instances, runs a query plan on
//! each artifact and cross-checks the answers against the oracle when the
//! atom set is within its bound. One CSV row per query.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{build, BuildOptions, CompiledArtifact, Mode, Target};
use crate::atom::AtomSet;
use crate::error::{Error, Result};
use crate::formula::{FormulaId, FormulaStore};
use crate::generate::{generate, InstanceSpec};
use crate::lit::{Lit, Var};
use crate::oracle::{AssignmentSets, Oracle, DEFAULT_BOUND};
use crate::query;
use crate::smt2::parse_smt2;

pub const COLUMNS: [&str; 11] = [
    "instance",
    "atoms",
    "inputNodes",
    "lemmaCount",
    "tEnumMs",
    "compileMs",
    "dagNodes",
    "query",
    "answer",
    "queryMs",
    "oracleOk",
];

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct Timeouts {
    pub enumeration_s: f64,
    pub compile_s: f64,
    pub query_s: f64,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts { enumeration_s: 60.0, compile_s: 60.0, query_s: 10.0 }
    }
}

impl Timeouts {
    pub fn uniform(seconds: f64) -> Timeouts {
        Timeouts { enumeration_s: seconds, compile_s: seconds, query_s: seconds }
    }
}

/// Queries run on each artifact. Counts give the number of sampled
/// clauses or cubes.
#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct QueryPlan {
    pub co: bool,
    pub ct: bool,
    pub me: bool,
    pub ce: usize,
    pub ct_assume: usize,
    pub va: bool,
    pub im: usize,
}

impl Default for QueryPlan {
    fn default() -> Self {
        QueryPlan { co: true, ct: true, me: false, ce: 10, ct_assume: 10, va: true, im: 10 }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub name: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct GenerateEntry {
    #[serde(default = "default_prefix")]
    pub name: String,
    pub count: usize,
    /// Instance `i` uses seed `spec.seed + i`.
    #[serde(flatten)]
    pub spec: InstanceSpec,
}

fn default_prefix() -> String {
    "gen".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// `tred`, `text` or `both`.
    pub mode: String,
    pub target: String,
    pub oracle_bound: usize,
    /// Seed of the clause and cube sampler.
    pub seed: u64,
    pub timeouts: Timeouts,
    pub queries: QueryPlan,
    pub instances: Vec<FileEntry>,
    pub generate: Vec<GenerateEntry>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mode: "tred".into(),
            target: "ddnnf".into(),
            oracle_bound: DEFAULT_BOUND,
            seed: 0,
            timeouts: Timeouts::default(),
            queries: QueryPlan::default(),
            instances: Vec::new(),
            generate: Vec::new(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<BenchConfig> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start].lines().count().max(1));
            Error::Format { line, msg: e.message().to_string() }
        })?;
        cfg.modes()?;
        cfg.target()?;
        Ok(cfg)
    }

    pub fn modes(&self) -> Result<Vec<Mode>> {
        match self.mode.as_str() {
            "both" => Ok(vec![Mode::TReduced, Mode::TExtended]),
            m => Mode::from_name(m)
                .map(|m| vec![m])
                .ok_or_else(|| Error::Invalid(format!("unknown mode `{m}`"))),
        }
    }

    pub fn target(&self) -> Result<Target> {
        Target::from_name(&self.target).ok_or_else(|| Error::Invalid(format!("unknown target `{}`", self.target)))
    }

    /// Instance list; file paths are resolved against `base`.
    pub fn instances(&self, base: &Path) -> Vec<Instance> {
        let mut out = Vec::new();
        for f in &self.instances {
            let path = base.join(&f.path);
            let name = f.name.clone().unwrap_or_else(|| f.path.display().to_string());
            out.push(Instance { name, source: Source::File(path) });
        }
        for g in &self.generate {
            for i in 0..g.count {
                let spec = InstanceSpec { seed: g.spec.seed + i as u64, ..g.spec.clone() };
                out.push(Instance { name: format!("{}-{}", g.name, spec.seed), source: Source::Generated(spec) });
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Source {
    File(PathBuf),
    Text(String),
    Generated(InstanceSpec),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub source: Source,
}

impl Instance {
    pub fn load(&self, store: &mut FormulaStore) -> Result<(FormulaId, AtomSet)> {
        match &self.source {
            Source::File(p) => parse_smt2(store, &std::fs::read_to_string(p)?),
            Source::Text(t) => parse_smt2(store, t),
            Source::Generated(spec) => Ok(generate(store, spec)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Row {
    pub instance: String,
    pub atoms: usize,
    #[serde(rename = "inputNodes")]
    pub input_nodes: usize,
    #[serde(rename = "lemmaCount")]
    pub lemma_count: usize,
    #[serde(rename = "tEnumMs")]
    pub t_enum_ms: f64,
    #[serde(rename = "compileMs")]
    pub compile_ms: f64,
    #[serde(rename = "dagNodes")]
    pub dag_nodes: usize,
    pub query: String,
    pub answer: String,
    #[serde(rename = "queryMs")]
    pub query_ms: f64,
    /// Empty when the oracle was not consulted.
    #[serde(rename = "oracleOk")]
    pub oracle_ok: Option<bool>,
}

fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Clause of 1 to 3 distinct literals over the atom set.
pub fn sample_clause(rng: &mut impl Rng, num_vars: usize) -> Vec<Lit> {
    let k = rng.gen_range(1..=3.min(num_vars));
    let mut vars: Vec<u32> = (1..=num_vars as u32).collect();
    vars.shuffle(rng);
    vars[..k].iter().map(|&v| Lit::new(Var::new(v), rng.gen_bool(0.5))).collect()
}

fn show_lits(a: &CompiledArtifact, lits: &[Lit], sep: &str) -> String {
    lits.iter().map(|l| a.map.lit_name(*l).expect("mapped literal")).collect::<Vec<_>>().join(sep)
}

struct Ctx<'a> {
    a: &'a CompiledArtifact,
    oracle: Option<AssignmentSets>,
    negation: Option<AssignmentSets>,
    budget: Duration,
    rows: Vec<Row>,
    base: Row,
}

impl Ctx<'_> {
    fn push(&mut self, query: String, started: Instant, answer: Result<String>, oracle: Option<String>) {
        let elapsed = started.elapsed();
        let (answer, ok) = match answer {
            Ok(_) if elapsed > self.budget => ("timeout".to_string(), None),
            Ok(a) => {
                let ok = oracle.map(|o| o == a);
                (a, ok)
            }
            Err(e) => (format!("error: {e}"), None),
        };
        self.rows.push(Row { query, answer, query_ms: ms(elapsed), oracle_ok: ok, ..self.base.clone() });
    }
}

fn run_reduced(ctx: &mut Ctx<'_>, plan: &QueryPlan, rng: &mut ChaCha8Rng) {
    let a = ctx.a;
    let n = a.num_vars();
    if plan.co {
        let t = Instant::now();
        let r = query::is_consistent(a).map(|b| b.to_string());
        let o = ctx.oracle.as_ref().map(|s| (!s.ctta.is_empty()).to_string());
        ctx.push("co".into(), t, r, o);
    }
    if plan.ct {
        let t = Instant::now();
        let r = query::count_models(a).map(|c| c.to_string());
        let o = ctx.oracle.as_ref().map(|s| s.ctta.len().to_string());
        ctx.push("ct".into(), t, r, o);
    }
    if n > 0 {
        for _ in 0..plan.ce {
            let clause = sample_clause(rng, n);
            let t = Instant::now();
            let r = query::entails_clause(a, &clause).map(|b| b.to_string());
            let o = ctx.oracle.as_ref().map(|s| s.entails_clause(&clause).to_string());
            ctx.push(format!("ce {}", show_lits(a, &clause, " | ")), t, r, o);
        }
        for _ in 0..plan.ct_assume {
            let mut clause = sample_clause(rng, n);
            for _ in 0..100 {
                if !query::entails_clause(a, &clause).unwrap_or(true) {
                    break;
                }
                clause = sample_clause(rng, n);
            }
            let cube: Vec<Lit> = clause.iter().map(|l| l.negated()).collect();
            let t = Instant::now();
            let r = query::count_models_assume(a, &cube).map(|c| c.to_string());
            let o = ctx.oracle.as_ref().map(|s| s.count_assume(&cube).to_string());
            ctx.push(format!("ct-assume {}", show_lits(a, &cube, " & ")), t, r, o);
        }
    }
    if plan.me {
        let t = Instant::now();
        let deadline = t + ctx.budget;
        let r = query::enumerate_models(a).and_then(|it| {
            let mut masks = Vec::new();
            for m in it {
                if Instant::now() > deadline {
                    return Err(Error::Timeout("model enumeration"));
                }
                masks.push(m.to_bits().expect("total model"));
            }
            Ok(masks)
        });
        let o = ctx.oracle.as_ref().map(|s| {
            let expected: Vec<u64> = s.ctta_assignments().iter().map(|m| m.to_bits().expect("total")).collect();
            match &r {
                Ok(m) if *m == expected => format!("{} models", m.len()),
                _ => format!("{} oracle models", expected.len()),
            }
        });
        let r = r.map(|m| format!("{} models", m.len()));
        ctx.push("me".into(), t, r, o);
    }
}

fn run_extended(ctx: &mut Ctx<'_>, plan: &QueryPlan, rng: &mut ChaCha8Rng) {
    let a = ctx.a;
    let n = a.num_vars();
    if plan.va {
        let t = Instant::now();
        let r = query::is_valid(a).map(|b| b.to_string());
        let o = ctx.negation.as_ref().map(|s| s.ctta.is_empty().to_string());
        ctx.push("va".into(), t, r, o);
    }
    if n > 0 {
        for _ in 0..plan.im {
            let cube = sample_clause(rng, n);
            let t = Instant::now();
            let r = query::is_implicant(a, &cube).map(|b| b.to_string());
            let o = ctx.negation.as_ref().map(|s| (s.count_assume(&cube) == 0).to_string());
            ctx.push(format!("im {}", show_lits(a, &cube, " & ")), t, r, o);
        }
    }
}

/// Compiles one instance in every configured mode and runs the plan.
pub fn run_instance(inst: &Instance, cfg: &BenchConfig, index: usize) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut store = FormulaStore::new();
    let fail = |answer: String| Row { instance: inst.name.clone(), query: "build".into(), answer, ..Row::default() };
    let (phi, alpha) = match inst.load(&mut store) {
        Ok(x) => x,
        Err(e) => return vec![fail(format!("error: {e}"))],
    };
    let (modes, target) = match (cfg.modes(), cfg.target()) {
        (Ok(m), Ok(t)) => (m, t),
        (Err(e), _) | (_, Err(e)) => return vec![fail(format!("error: {e}"))],
    };
    let mut oracle = (alpha.len() <= cfg.oracle_bound)
        .then(|| Oracle::with_bound(&alpha, cfg.oracle_bound).ok())
        .flatten();
    let budget = Duration::from_secs_f64(cfg.timeouts.query_s);
    for mode in modes {
        let mut opts = BuildOptions { target, ..BuildOptions::default() };
        let now = Instant::now();
        let enum_budget = Duration::from_secs_f64(cfg.timeouts.enumeration_s);
        opts.enumeration.deadline = Some(now + enum_budget);
        opts.compile.deadline = Some(now + enum_budget + Duration::from_secs_f64(cfg.timeouts.compile_s));
        let built = build(&mut store, phi, &alpha, mode, &opts);
        let a = match built {
            Ok(a) => a,
            Err(Error::Timeout(phase)) => {
                let mut r = fail(format!("timeout ({phase})"));
                r.atoms = alpha.len();
                rows.push(r);
                continue;
            }
            Err(e) => {
                rows.push(fail(format!("error: {e}")));
                continue;
            }
        };
        if a.stats.compile_time.as_secs_f64() > cfg.timeouts.compile_s {
            let mut r = fail("timeout (compilation)".into());
            r.atoms = alpha.len();
            rows.push(r);
            continue;
        }
        let base = Row {
            instance: inst.name.clone(),
            atoms: alpha.len(),
            input_nodes: a.stats.input_nodes,
            lemma_count: a.lemmas.len(),
            t_enum_ms: ms(a.stats.enum_time),
            compile_ms: ms(a.stats.compile_time),
            dag_nodes: a.dag_nodes(),
            ..Row::default()
        };
        let (sets, negation) = match oracle.as_mut() {
            Some(o) => match mode {
                Mode::TReduced => (o.sets(&store, phi).ok(), None),
                Mode::TExtended => (None, o.negation_sets(&store, phi).ok()),
            },
            None => (None, None),
        };
        let mut ctx = Ctx { a: &a, oracle: sets, negation, budget, rows: Vec::new(), base };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match mode {
            Mode::TReduced => run_reduced(&mut ctx, &cfg.queries, &mut rng),
            Mode::TExtended => run_extended(&mut ctx, &cfg.queries, &mut rng),
        }
        rows.extend(ctx.rows);
    }
    rows
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, r: &Row) -> Result<()> {
    w.serialize(r).map_err(|e| Error::Invalid(e.to_string()))
}

/// Runs all instances on `jobs` threads, writing rows to `out` as they
/// complete. Returns the number of rows written.
pub fn run<W: Write + Send>(instances: &[Instance], cfg: &BenchConfig, jobs: usize, out: W) -> Result<usize> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS).map_err(|e| Error::Invalid(e.to_string()))?;
    let sink = Mutex::new((w, 0usize));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    pool.install(|| {
        instances.par_iter().enumerate().try_for_each(|(i, inst)| {
            let rows = run_instance(inst, cfg, i);
            let mut guard = sink.lock().expect("sink lock");
            for r in &rows {
                write_row(&mut guard.0, r)?;
            }
            guard.1 += rows.len();
            guard.0.flush()?;
            Ok::<(), Error>(())
        })
    })?;
    let (_, n) = sink.into_inner().expect("sink lock");
    Ok(n)
}
