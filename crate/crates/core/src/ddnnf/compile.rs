//! Top-down decision-DNNF compilation of NNF formula DAGs.
//!
//! The recursion works directly on residuals of the input DAG: constants
//! are leaves; literals that are direct conjuncts of a top-level
//! conjunction are asserted and propagated; conjunctions whose conjuncts
//! split into variable-disjoint groups are compiled group by group;
//! everything else branches on a selected variable. Since the input DAG is
//! hash-consed, a residual handle identifies a sub-problem exactly and is
//! used as the cache key.

use std::collections::HashMap;
use std::time::Instant;

use super::{Ddnnf, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Dag, FormulaId, Node};
use crate::lit::{Lit, Var};

/// Branching variable selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Heuristic {
    /// Variable with the most leaf occurrences, ties to the lowest index.
    #[default]
    MostFrequent,
    /// Lowest-index variable of the residual.
    Lowest,
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub heuristic: Heuristic,
    pub cache: bool,
    pub deadline: Option<Instant>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            heuristic: Heuristic::default(),
            cache: true,
            deadline: None,
        }
    }
}

/// Compiles the NNF formula at `root` into a decision-DNNF over
/// `num_vars` variables.
pub fn compile(dag: &mut Dag<Var>, root: FormulaId, num_vars: usize, options: &CompileOptions) -> Result<Ddnnf> {
    if !dag.is_nnf(root) {
        return Err(Error::NotNnf);
    }
    if let Some(v) = dag.support(root).iter().find(|v| v.index() >= num_vars) {
        return Err(Error::UnmappedVariable(v.get()));
    }
    let mut c = Compiler {
        dag,
        out: Ddnnf::new(num_vars),
        cache: HashMap::new(),
        options,
        steps: 0,
    };
    let r = c.run(root)?;
    let mut out = c.out;
    out.set_root(r);
    Ok(out)
}

struct Compiler<'a> {
    dag: &'a mut Dag<Var>,
    out: Ddnnf,
    cache: HashMap<FormulaId, NodeId>,
    options: &'a CompileOptions,
    steps: u64,
}

impl Compiler<'_> {
    fn run(&mut self, f: FormulaId) -> Result<NodeId> {
        if f == FormulaId::TRUE {
            return Ok(NodeId::TRUE);
        }
        if f == FormulaId::FALSE {
            return Ok(NodeId::FALSE);
        }
        if let Node::Lit(v, p) = *self.dag.node(f) {
            return Ok(self.out.lit(Lit::new(v, p)));
        }
        if self.options.cache {
            if let Some(&n) = self.cache.get(&f) {
                return Ok(n);
            }
        }
        self.steps += 1;
        if self.steps % 64 == 1 {
            if let Some(d) = self.options.deadline {
                if Instant::now() >= d {
                    return Err(Error::Timeout("compilation"));
                }
            }
        }
        let r = self.step(f)?;
        if self.options.cache {
            self.cache.insert(f, r);
        }
        Ok(r)
    }

    fn step(&mut self, f: FormulaId) -> Result<NodeId> {
        let forced = forced_literals(self.dag, f);
        if !forced.is_empty() {
            let assignment: HashMap<Var, bool> = forced.iter().map(|l| (l.var(), l.is_positive())).collect();
            if assignment.len() < forced.len() {
                // complementary unit literals
                return Ok(NodeId::FALSE);
            }
            let rest = self.dag.residual(f, &assignment);
            let sub = self.run(rest)?;
            let mut kids: Vec<NodeId> = forced.iter().map(|&l| self.out.lit(l)).collect();
            kids.push(sub);
            return Ok(self.out.and(kids));
        }
        let parts = partition(self.dag, f);
        if parts.len() > 1 {
            let mut kids = Vec::with_capacity(parts.len());
            for p in parts {
                let k = self.run(p)?;
                if k == NodeId::FALSE {
                    return Ok(NodeId::FALSE);
                }
                kids.push(k);
            }
            return Ok(self.out.and(kids));
        }
        let lit = match self.options.heuristic {
            Heuristic::MostFrequent => select_literal(self.dag, f)?,
            Heuristic::Lowest => Lit::new(self.dag.support(f)[0], true),
        };
        let v = lit.var();
        let hi_f = self.dag.condition(f, v, true);
        let hi = self.run(hi_f)?;
        let lo_f = self.dag.condition(f, v, false);
        let lo = self.run(lo_f)?;
        Ok(self.out.decision(v, hi, lo))
    }
}

fn forced_literals(dag: &Dag<Var>, f: FormulaId) -> Vec<Lit> {
    match dag.node(f) {
        Node::And(cs) => cs
            .iter()
            .filter_map(|&c| match *dag.node(c) {
                Node::Lit(v, p) => Some(Lit::new(v, p)),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Splits a conjunction into groups of conjuncts with pairwise disjoint
/// variables, ordered by their lowest variable. Anything else is a single
/// component.
pub fn partition(dag: &mut Dag<Var>, f: FormulaId) -> Vec<FormulaId> {
    let cs: Vec<FormulaId> = match dag.node(f) {
        Node::And(cs) => cs.to_vec(),
        _ => return vec![f],
    };
    let mut owner: HashMap<Var, usize> = HashMap::new();
    let mut parent: Vec<usize> = (0..cs.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, &c) in cs.iter().enumerate() {
        for &v in dag.support(c) {
            match owner.get(&v) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(v, i);
                }
            }
        }
    }
    let mut groups: Vec<(Var, Vec<FormulaId>)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (i, &c) in cs.iter().enumerate() {
        let r = find(&mut parent, i);
        let first = dag.support(c).first().copied().unwrap_or(Var::new(1));
        match slot.get(&r) {
            Some(&g) => {
                groups[g].1.push(c);
                groups[g].0 = groups[g].0.min(first);
            }
            None => {
                slot.insert(r, groups.len());
                groups.push((first, vec![c]));
            }
        }
    }
    if groups.len() == 1 {
        return vec![f];
    }
    groups.sort_by_key(|(v, _)| *v);
    groups.into_iter().map(|(_, g)| dag.and(g)).collect()
}

/// Most frequent variable of a non-constant residual, counted over the
/// leaf edges of its DAG; positive polarity, ties to the lowest index.
pub fn select_literal(dag: &Dag<Var>, f: FormulaId) -> Result<Lit> {
    if f == FormulaId::TRUE || f == FormulaId::FALSE {
        return Err(Error::ConstantFormula);
    }
    let mut count: HashMap<Var, usize> = HashMap::new();
    if let Node::Lit(v, _) = dag.node(f) {
        return Ok(Lit::new(*v, true));
    }
    for id in dag.reachable(f) {
        for &c in dag.node(id).children() {
            if let Node::Lit(v, _) = dag.node(c) {
                *count.entry(*v).or_default() += 1;
            }
        }
    }
    let best = count
        .into_iter()
        .max_by(|(va, ca), (vb, cb)| ca.cmp(cb).then(vb.cmp(va)))
        .map(|(v, _)| v)
        .ok_or(Error::ConstantFormula)?;
    Ok(Lit::new(best, true))
}
