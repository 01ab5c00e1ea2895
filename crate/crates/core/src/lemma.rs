//! Theory-lemma enumeration.
//!
//! A set of T-lemmas *rules out* a set of truth assignments when each of the
//! assignments falsifies at least one lemma. [`enumerate_lemmas`] produces a
//! set ruling out every T-inconsistent total assignment over the atom set
//! that propositionally satisfies the target formula.
//!
//! Enumeration is a DPLL search over the Boolean abstraction of the target.
//! Every decision is pushed into an incremental theory solver; when the
//! partial assignment becomes T-inconsistent the minimized conflict is
//! negated into a lemma and the subtree is abandoned, since every extension
//! falsifies that lemma. Subtrees where the residual is `false` contain no
//! models and are skipped. Once the residual is `true` every extension is a
//! model, so the remaining arithmetic atoms are explored per group of atoms
//! sharing real variables, which keeps the search from multiplying
//! independent choices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::atom::{AtomSet, Assignment};
use crate::error::{Error, Result};
use crate::formula::{Dag, FormulaId, FormulaStore};
use crate::lit::{Lit, Var};
use crate::theory::{minimize_conflict, Backend, TheorySolver, TheoryVerdict};

/// A T-valid clause over an atom set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TLemma {
    literals: Vec<Lit>,
}

impl TLemma {
    /// Canonicalizes `literals`; rejects empty and tautological clauses.
    pub fn new(mut literals: Vec<Lit>) -> Result<TLemma> {
        literals.sort();
        literals.dedup();
        if literals.is_empty() {
            return Err(Error::Invalid("empty lemma".into()));
        }
        if literals.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Err(Error::Invalid("lemma contains complementary literals".into()));
        }
        Ok(TLemma { literals })
    }

    /// Lemma whose negation is the conjunction `conflict`.
    pub fn from_conflict(conflict: &[Lit]) -> Result<TLemma> {
        TLemma::new(conflict.iter().map(|l| l.negated()).collect())
    }

    pub fn literals(&self) -> &[Lit] {
        &self.literals
    }

    /// The conjunction this lemma forbids.
    pub fn conflict(&self) -> Vec<Lit> {
        self.literals.iter().map(|l| l.negated()).collect()
    }

    /// Whether the (possibly partial) assignment falsifies every literal.
    pub fn falsified_by(&self, rho: &Assignment) -> bool {
        self.literals
            .iter()
            .all(|l| rho.get(l.var()) == Some(!l.is_positive()))
    }
}

impl fmt::Display for TLemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Which formula's inconsistent assignments a lemma set rules out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LemmaTarget {
    Formula,
    Negation,
    Top,
}

impl LemmaTarget {
    pub fn name(self) -> &'static str {
        match self {
            LemmaTarget::Formula => "formula",
            LemmaTarget::Negation => "negation",
            LemmaTarget::Top => "top",
        }
    }

    pub fn from_name(name: &str) -> Option<LemmaTarget> {
        match name {
            "formula" => Some(LemmaTarget::Formula),
            "negation" => Some(LemmaTarget::Negation),
            "top" => Some(LemmaTarget::Top),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaSet {
    /// Sorted, duplicate-free.
    pub lemmas: Vec<TLemma>,
    pub target: LemmaTarget,
    pub alpha: AtomSet,
}

impl LemmaSet {
    pub fn new(lemmas: impl IntoIterator<Item = TLemma>, target: LemmaTarget, alpha: AtomSet) -> LemmaSet {
        let set: BTreeSet<TLemma> = lemmas.into_iter().collect();
        LemmaSet {
            lemmas: set.into_iter().collect(),
            target,
            alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    pub fn clauses(&self) -> Vec<Vec<Lit>> {
        self.lemmas.iter().map(|l| l.literals.clone()).collect()
    }

    /// Whether every assignment in `p` falsifies some lemma.
    pub fn rules_out<'a>(&self, p: impl IntoIterator<Item = &'a Assignment>) -> Result<bool> {
        for rho in p {
            if !rho.is_total() || rho.num_vars() != self.alpha.len() {
                return Err(Error::PartialAssignment);
            }
            if !self.lemmas.iter().any(|l| l.falsified_by(rho)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Target used to build the lemmas of a compilation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LemmaScope {
    /// Lemmas of the formula being compiled (or its negation).
    #[default]
    Formula,
    /// Lemmas ruling out every T-inconsistent assignment over the atom set.
    Top,
}

impl LemmaScope {
    pub fn name(self) -> &'static str {
        match self {
            LemmaScope::Formula => "formula",
            LemmaScope::Top => "top",
        }
    }

    pub fn from_name(name: &str) -> Option<LemmaScope> {
        match name {
            "formula" => Some(LemmaScope::Formula),
            "top" => Some(LemmaScope::Top),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EnumOptions {
    pub backend: Backend,
    /// Worker count; values above 1 split the search tree and run subtrees
    /// on the rayon pool.
    pub workers: usize,
    pub deadline: Option<Instant>,
}

/// Enumerates lemmas ruling out the T-inconsistent models of `target`
/// applied to `phi` over `alpha`.
pub fn enumerate_lemmas(
    store: &mut FormulaStore,
    phi: FormulaId,
    alpha: &AtomSet,
    target: LemmaTarget,
    options: &EnumOptions,
) -> Result<LemmaSet> {
    let mut dag: Dag<Var> = Dag::new();
    let abstracted = store.abstract_into(phi, alpha, &mut dag)?;
    let root = match target {
        LemmaTarget::Formula => abstracted,
        LemmaTarget::Negation => dag.not(abstracted),
        LemmaTarget::Top => dag.top(),
    };
    enumerate_prop(dag, root, alpha, target, options)
}

/// Same as [`enumerate_lemmas`] for a target already abstracted over `alpha`.
pub fn enumerate_prop(
    dag: Dag<Var>,
    root: FormulaId,
    alpha: &AtomSet,
    target: LemmaTarget,
    options: &EnumOptions,
) -> Result<LemmaSet> {
    let lemmas = if options.workers > 1 {
        enumerate_parallel(dag, root, alpha, options)?
    } else {
        let mut e = Enumerator::new(dag, alpha, options)?;
        e.search(root)?;
        e.lemmas
    };
    Ok(LemmaSet::new(lemmas, target, alpha.clone()))
}

fn enumerate_parallel(
    dag: Dag<Var>,
    root: FormulaId,
    alpha: &AtomSet,
    options: &EnumOptions,
) -> Result<BTreeSet<TLemma>> {
    let depth = (usize::BITS - (options.workers * 4 - 1).leading_zeros()) as usize;
    let mut e = Enumerator::new(dag, alpha, options)?;
    let mut frontier = Vec::new();
    e.split(root, depth, &mut Vec::new(), &mut frontier)?;
    let seed_lemmas = std::mem::take(&mut e.lemmas);
    let dag = e.dag;
    let parts: Vec<Result<BTreeSet<TLemma>>> = frontier
        .into_par_iter()
        .map(|(path, residual)| {
            let mut w = Enumerator::new(dag.clone(), alpha, options)?;
            w.solver.push();
            for &l in &path {
                if w.solver.assert_lit(l)?.is_some() {
                    unreachable!("frontier paths are theory-consistent");
                }
                w.assigned[l.var().index()] = Some(l.is_positive());
            }
            w.search(residual)?;
            Ok(w.lemmas)
        })
        .collect();
    let mut all = seed_lemmas;
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

struct Enumerator<'a> {
    dag: Dag<Var>,
    alpha: &'a AtomSet,
    solver: Box<dyn TheorySolver>,
    scratch: Box<dyn TheorySolver>,
    assigned: Vec<Option<bool>>,
    lemmas: BTreeSet<TLemma>,
    deadline: Option<Instant>,
    steps: u64,
    /// Real variables of each atom, indexed by atom position.
    reals: Vec<Vec<String>>,
}

impl<'a> Enumerator<'a> {
    fn new(dag: Dag<Var>, alpha: &'a AtomSet, options: &EnumOptions) -> Result<Enumerator<'a>> {
        Ok(Enumerator {
            dag,
            alpha,
            solver: options.backend.solver(alpha)?,
            scratch: options.backend.solver(alpha)?,
            assigned: vec![None; alpha.len()],
            lemmas: BTreeSet::new(),
            deadline: options.deadline,
            steps: 0,
            reals: alpha
                .iter()
                .map(|a| a.real_vars().map(str::to_string).collect())
                .collect(),
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps % 256 == 1 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Error::Timeout("lemma enumeration"));
                }
            }
        }
        Ok(())
    }

    fn path(&self) -> Vec<Lit> {
        self.assigned
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| Lit::new(Var::new(i as u32 + 1), b)))
            .collect()
    }

    /// Pushes `lit`; on T-inconsistency records a lemma and returns false.
    /// The solver level stays pushed either way.
    fn decide(&mut self, lit: Lit) -> Result<bool> {
        self.tick()?;
        self.solver.push();
        self.assigned[lit.var().index()] = Some(lit.is_positive());
        let early = self.solver.assert_lit(lit)?;
        let conflict = match early {
            Some(c) => Some(c),
            None if self.alpha.atom(lit.var()).is_some_and(|a| a.is_boolean()) => None,
            None => match self.solver.check_asserted()? {
                TheoryVerdict::Sat { .. } => None,
                TheoryVerdict::Unsat { conflict } => Some(conflict),
            },
        };
        match conflict {
            None => Ok(true),
            Some(c) => {
                let path = self.path();
                let core = minimize_conflict(self.scratch.as_mut(), &path, &c)?;
                self.lemmas.insert(TLemma::from_conflict(&core.literals)?);
                Ok(false)
            }
        }
    }

    fn undo(&mut self, lit: Lit) {
        self.assigned[lit.var().index()] = None;
        self.solver.pop();
    }

    fn search(&mut self, residual: FormulaId) -> Result<()> {
        if residual == FormulaId::FALSE {
            return Ok(());
        }
        if residual == FormulaId::TRUE {
            return self.free_atoms();
        }
        let v = self.dag.support(residual)[0];
        for value in [true, false] {
            let lit = Lit::new(v, value);
            if self.decide(lit)? {
                let next = self.dag.condition(residual, v, value);
                self.search(next)?;
            }
            self.undo(lit);
        }
        Ok(())
    }

    /// Enumerates the search tree down to `depth` decisions, collecting the
    /// consistent open subtrees.
    fn split(
        &mut self,
        residual: FormulaId,
        depth: usize,
        path: &mut Vec<Lit>,
        out: &mut Vec<(Vec<Lit>, FormulaId)>,
    ) -> Result<()> {
        if residual == FormulaId::FALSE {
            return Ok(());
        }
        if depth == 0 || residual == FormulaId::TRUE {
            out.push((path.clone(), residual));
            return Ok(());
        }
        let v = self.dag.support(residual)[0];
        for value in [true, false] {
            let lit = Lit::new(v, value);
            if self.decide(lit)? {
                let next = self.dag.condition(residual, v, value);
                path.push(lit);
                self.split(next, depth - 1, path, out)?;
                path.pop();
            }
            self.undo(lit);
        }
        Ok(())
    }

    /// All extensions of the current assignment are models: explores the
    /// unassigned arithmetic atoms group by group.
    fn free_atoms(&mut self) -> Result<()> {
        let free: Vec<usize> = (0..self.alpha.len())
            .filter(|&i| self.assigned[i].is_none() && !self.reals[i].is_empty())
            .collect();
        if free.is_empty() {
            return Ok(());
        }
        let mut names: HashMap<&str, usize> = HashMap::new();
        for r in &self.reals {
            for v in r {
                let n = names.len();
                names.entry(v.as_str()).or_insert(n);
            }
        }
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        // assigned atoms connect the variables they mention too
        for r in &self.reals {
            for w in r.windows(2) {
                let (a, b) = (find(&mut parent, names[w[0].as_str()]), find(&mut parent, names[w[1].as_str()]));
                parent[a] = b;
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for &i in &free {
            let root = find(&mut parent, names[self.reals[i][0].as_str()]);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(i),
                None => groups.push((root, vec![i])),
            }
        }
        for (_, group) in groups {
            self.exhaust(&group)?;
        }
        Ok(())
    }

    fn exhaust(&mut self, group: &[usize]) -> Result<()> {
        let Some((&first, rest)) = group.split_first() else {
            return Ok(());
        };
        let v = Var::new(first as u32 + 1);
        for value in [true, false] {
            let lit = Lit::new(v, value);
            if self.decide(lit)? {
                self.exhaust(rest)?;
            }
            self.undo(lit);
        }
        Ok(())
    }
}
