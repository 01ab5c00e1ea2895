//! Compiled artifacts: T-reduced / T-extended circuits plus their
//! abstraction map and lemma set.
//!
//! `Tred(phi) = phi & C1 & ... & Cn` with the lemmas of `phi` (or of `true`),
//! `Text(phi) = phi | !(C1 & ... & Cn)` with the lemmas of `!phi` (or of
//! `true`). Both are built on the Boolean abstraction and compiled either to
//! a decision-DNNF or to an OBDD.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};
use std::time::{Duration, Instant};

use crate::atom::{AbstractionMap, AtomSet};
use crate::ddnnf::{compile, smooth, CompileOptions, Ddnnf};
use crate::error::{Error, Result};
use crate::formula::{Dag, FormulaId, FormulaStore};
use crate::lemma::{enumerate_prop, EnumOptions, LemmaScope, LemmaSet, LemmaTarget};
use crate::lit::Var;
use crate::obdd::{Obdd, ObddManager, SharedManager};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    TReduced,
    TExtended,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::TReduced => "tred",
            Mode::TExtended => "text",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        match s {
            "tred" => Some(Mode::TReduced),
            "text" => Some(Mode::TExtended),
            _ => None,
        }
    }

    /// Long name used in error messages.
    pub fn describe(self) -> &'static str {
        match self {
            Mode::TReduced => "T-reduced",
            Mode::TExtended => "T-extended",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Target {
    #[default]
    Ddnnf,
    Obdd,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Ddnnf => "ddnnf",
            Target::Obdd => "obdd",
        }
    }

    pub fn from_name(s: &str) -> Option<Target> {
        match s {
            "ddnnf" => Some(Target::Ddnnf),
            "obdd" => Some(Target::Obdd),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Root {
    Ddnnf(Ddnnf),
    Obdd(Obdd),
}

/// Timing and size figures collected while building.
#[derive(Clone, Debug, Default)]
pub struct BuildStats {
    pub enum_time: Duration,
    pub compile_time: Duration,
    /// Nodes of the abstracted input formula.
    pub input_nodes: usize,
}

#[derive(Debug)]
pub struct CompiledArtifact {
    pub mode: Mode,
    pub map: AbstractionMap,
    pub lemmas: LemmaSet,
    pub scope: LemmaScope,
    /// Whether the stored circuit was smoothed at build time.
    pub smooth: bool,
    /// Set on artifacts produced by conditioning; such artifacts no longer
    /// carry the mode invariant.
    pub conditioned: bool,
    pub stats: BuildStats,
    root: Root,
    view: OnceLock<Ddnnf>,
    smoothed: OnceLock<Ddnnf>,
    visits: AtomicU64,
}

impl CompiledArtifact {
    pub fn from_parts(mode: Mode, map: AbstractionMap, lemmas: LemmaSet, scope: LemmaScope, root: Root, smooth: bool) -> CompiledArtifact {
        CompiledArtifact {
            mode,
            map,
            lemmas,
            scope,
            smooth,
            conditioned: false,
            stats: BuildStats::default(),
            root,
            view: OnceLock::new(),
            smoothed: OnceLock::new(),
            visits: AtomicU64::new(0),
        }
    }

    pub fn alpha(&self) -> &AtomSet {
        self.map.alpha()
    }

    pub fn num_vars(&self) -> usize {
        self.map.num_vars()
    }

    pub fn root(&self) -> &Root {
        &self.root
    }

    pub fn target(&self) -> Target {
        match self.root {
            Root::Ddnnf(_) => Target::Ddnnf,
            Root::Obdd(_) => Target::Obdd,
        }
    }

    pub fn obdd(&self) -> Option<&Obdd> {
        match &self.root {
            Root::Obdd(o) => Some(o),
            Root::Ddnnf(_) => None,
        }
    }

    /// The circuit as a decision-DNNF (OBDDs are expanded node by node).
    pub fn ddnnf(&self) -> &Ddnnf {
        match &self.root {
            Root::Ddnnf(d) => d,
            Root::Obdd(o) => self.view.get_or_init(|| {
                let m = o.manager.read().expect("manager lock");
                m.to_ddnnf(o.root, self.num_vars())
            }),
        }
    }

    /// Smoothed view over the atom set, computed once.
    pub fn smoothed(&self) -> &Ddnnf {
        self.smoothed.get_or_init(|| smooth(self.ddnnf()))
    }

    /// Size of the stored circuit: d-DNNF nodes, or OBDD internal nodes.
    pub fn dag_nodes(&self) -> usize {
        match &self.root {
            Root::Ddnnf(d) => d.size().0,
            Root::Obdd(o) => o.manager.read().expect("manager lock").size(o.root),
        }
    }

    pub fn visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed)
    }

    pub fn reset_visits(&self) {
        self.visits.store(0, Ordering::Relaxed);
    }

    pub(crate) fn add_visits(&self, n: usize) {
        self.visits.fetch_add(n as u64, Ordering::Relaxed);
    }

    pub(crate) fn with_root(&self, root: Ddnnf) -> CompiledArtifact {
        let mut a = CompiledArtifact::from_parts(
            self.mode,
            self.map.clone(),
            self.lemmas.clone(),
            self.scope,
            Root::Ddnnf(root),
            false,
        );
        a.conditioned = true;
        a
    }

    /// Model set of the circuit over the atom set, as bit masks (bit `i`
    /// is variable `i + 1`). Exponential; meant for tests.
    pub fn truth_table(&self) -> Vec<u64> {
        let d = self.ddnnf();
        (0..1u64 << self.num_vars()).filter(|&b| d.eval_bits(b)).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub target: Target,
    pub scope: LemmaScope,
    /// Smooth the stored d-DNNF.
    pub smooth: bool,
    /// OBDD variable order; defaults to the atom-set order.
    pub order: Option<Vec<Var>>,
    /// OBDD manager to build into, so that several artifacts can be compared.
    pub manager: Option<SharedManager>,
    pub enumeration: EnumOptions,
    pub compile: CompileOptions,
    /// Overall deadline, also applied to the enumeration and compilation
    /// phases when they carry none.
    pub deadline: Option<Instant>,
}

/// Builds the artifact of `phi` over `alpha` in `mode`.
pub fn build(store: &mut FormulaStore, phi: FormulaId, alpha: &AtomSet, mode: Mode, options: &BuildOptions) -> Result<CompiledArtifact> {
    let mut dag: Dag<Var> = Dag::new();
    let p = store.abstract_into(phi, alpha, &mut dag)?;
    let input_nodes = dag.size(p);
    let target = match (mode, options.scope) {
        (_, LemmaScope::Top) => LemmaTarget::Top,
        (Mode::TReduced, LemmaScope::Formula) => LemmaTarget::Formula,
        (Mode::TExtended, LemmaScope::Formula) => LemmaTarget::Negation,
    };
    let enum_root = match target {
        LemmaTarget::Formula => p,
        LemmaTarget::Negation => dag.not(p),
        LemmaTarget::Top => dag.top(),
    };
    let mut enumeration = options.enumeration.clone();
    enumeration.deadline = enumeration.deadline.or(options.deadline);
    let started = Instant::now();
    let lemmas = enumerate_prop(dag.clone(), enum_root, alpha, target, &enumeration)?;
    let enum_time = started.elapsed();

    let started = Instant::now();
    let mut clauses = Vec::with_capacity(lemmas.len());
    for lemma in &lemmas.lemmas {
        let lits: Vec<FormulaId> = lemma
            .literals()
            .iter()
            .map(|l| dag.lit(l.var(), l.is_positive()))
            .collect();
        clauses.push(dag.or(lits));
    }
    let lemma_conj = dag.and(clauses);
    let combined = match mode {
        Mode::TReduced => dag.and2(p, lemma_conj),
        Mode::TExtended => {
            let neg = dag.negate(lemma_conj);
            dag.or2(p, neg)
        }
    };
    let root = dag.to_nnf(combined);
    let n = alpha.len();
    let compiled = match options.target {
        Target::Ddnnf => {
            let mut copts = options.compile.clone();
            copts.deadline = copts.deadline.or(options.deadline);
            let d = compile(&mut dag, root, n, &copts)?;
            Root::Ddnnf(if options.smooth { smooth(&d) } else { d })
        }
        Target::Obdd => {
            let manager = match &options.manager {
                Some(m) => m.clone(),
                None => {
                    let order = options.order.clone().unwrap_or_else(|| alpha.vars().collect());
                    Arc::new(RwLock::new(ObddManager::new(order)?))
                }
            };
            let r = manager.write().expect("manager lock").from_formula(&dag, root)?;
            Root::Obdd(Obdd::new(manager, r))
        }
    };
    let compile_time = started.elapsed();
    let mut a = CompiledArtifact::from_parts(mode, AbstractionMap::new(alpha.clone()), lemmas, options.scope, compiled, options.smooth);
    a.stats = BuildStats {
        enum_time,
        compile_time,
        input_nodes,
    };
    Ok(a)
}

pub fn build_tred(store: &mut FormulaStore, phi: FormulaId, alpha: &AtomSet) -> Result<CompiledArtifact> {
    build(store, phi, alpha, Mode::TReduced, &BuildOptions::default())
}

pub fn build_text(store: &mut FormulaStore, phi: FormulaId, alpha: &AtomSet) -> Result<CompiledArtifact> {
    build(store, phi, alpha, Mode::TExtended, &BuildOptions::default())
}

/// OBDD artifact built into `manager` (a fresh one over the atom-set order
/// when `None`).
pub fn build_obdd_artifact(
    store: &mut FormulaStore,
    phi: FormulaId,
    alpha: &AtomSet,
    mode: Mode,
    manager: Option<SharedManager>,
) -> Result<CompiledArtifact> {
    let options = BuildOptions {
        target: Target::Obdd,
        manager,
        ..BuildOptions::default()
    };
    build(store, phi, alpha, mode, &options)
}

/// The abstraction of an artifact's circuit refined back to theory atoms.
pub fn refine_root(store: &mut FormulaStore, a: &CompiledArtifact) -> Result<FormulaId> {
    let d = a.ddnnf();
    let mut dag: Dag<Var> = Dag::new();
    let mut map = std::collections::HashMap::new();
    for id in d.reachable() {
        use crate::ddnnf::DdnnfNode;
        let r = match d.node(id) {
            DdnnfNode::True => dag.top(),
            DdnnfNode::False => dag.bot(),
            DdnnfNode::Lit(l) => dag.lit(l.var(), l.is_positive()),
            DdnnfNode::And(cs) => {
                let k: Vec<FormulaId> = cs.iter().map(|c| map[c]).collect();
                dag.and(k)
            }
            DdnnfNode::Or { children, .. } => {
                let k: Vec<FormulaId> = children.iter().map(|c| map[c]).collect();
                dag.or(k)
            }
        };
        map.insert(id, r);
    }
    let root = map[&d.root()];
    store.refine(&dag, root, &a.map)
}

pub(crate) fn require_mode(a: &CompiledArtifact, mode: Mode) -> Result<()> {
    if a.conditioned {
        return Err(Error::Unsupported("queries on conditioned artifacts".into()));
    }
    if a.mode != mode {
        return Err(Error::ModeViolation {
            required: mode.describe(),
            actual: a.mode.describe(),
        });
    }
    Ok(())
}
