//! Queries on compiled artifacts.
//!
//! On a T-reduced artifact every propositional model is theory-consistent,
//! so consistency, clausal entailment, counting and enumeration modulo the
//! theory reduce to the propositional questions on the circuit. On a
//! T-extended artifact every propositional counter-model is
//! theory-consistent, which does the same for validity and implicants.
//! Each query is a single traversal of the (smoothed) circuit, except
//! enumeration which costs one traversal per decided variable.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::artifact::{require_mode, CompiledArtifact, Mode};
use crate::atom::Assignment;
use crate::ddnnf::{Ddnnf, DdnnfNode, NodeId};
use crate::error::{Error, Result};
use crate::lit::{Lit, Var};

/// Checked set of literals over an artifact's atom set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literals {
    lits: Vec<Lit>,
    contradictory: bool,
}

impl Literals {
    pub fn new(a: &CompiledArtifact, lits: &[Lit]) -> Result<Literals> {
        let n = a.num_vars();
        let mut v: Vec<Lit> = lits.to_vec();
        if let Some(l) = v.iter().find(|l| l.var().index() >= n) {
            return Err(Error::UnmappedVariable(l.var().get()));
        }
        v.sort();
        v.dedup();
        let contradictory = v.windows(2).any(|w| w[0].var() == w[1].var());
        Ok(Literals { lits: v, contradictory })
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    /// Contains a literal and its complement.
    pub fn contradictory(&self) -> bool {
        self.contradictory
    }

    fn value_map(&self, n: usize) -> Vec<Option<bool>> {
        let mut m = vec![None; n];
        for l in &self.lits {
            m[l.var().index()] = Some(l.is_positive());
        }
        m
    }
}

/// Whether some completion of the partial assignment satisfies `d`.
fn live(d: &Ddnnf, value: &[Option<bool>], visits: &mut usize) -> bool {
    let order = d.reachable();
    *visits += order.len();
    let mut ok = vec![false; d.len()];
    for id in order {
        ok[id.index()] = match d.node(id) {
            DdnnfNode::True => true,
            DdnnfNode::False => false,
            DdnnfNode::Lit(l) => value[l.var().index()].is_none_or(|b| b == l.is_positive()),
            DdnnfNode::And(cs) => cs.iter().all(|c| ok[c.index()]),
            DdnnfNode::Or { children, .. } => children.iter().any(|c| ok[c.index()]),
        };
    }
    ok[d.root().index()]
}

/// Models of a smoothed circuit over all variables that agree with the
/// partial assignment.
fn weighted_count(d: &Ddnnf, value: &[Option<bool>], visits: &mut usize) -> BigUint {
    let order = d.reachable();
    *visits += order.len();
    let mut c: HashMap<NodeId, BigUint> = HashMap::with_capacity(order.len());
    for id in order {
        let x = match d.node(id) {
            DdnnfNode::True => BigUint::one(),
            DdnnfNode::False => BigUint::zero(),
            DdnnfNode::Lit(l) => {
                if value[l.var().index()].is_none_or(|b| b == l.is_positive()) {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            }
            DdnnfNode::And(cs) => {
                let mut p = BigUint::one();
                for ch in cs.iter() {
                    p *= &c[ch];
                    if p.is_zero() {
                        break;
                    }
                }
                p
            }
            DdnnfNode::Or { children, .. } => children.iter().map(|ch| &c[ch]).sum(),
        };
        c.insert(id, x);
    }
    c.remove(&d.root()).unwrap_or_default()
}

/// Residual of a circuit under a cube: literals fixed, constants propagated.
pub fn condition_ddnnf(d: &Ddnnf, cube: &[Lit]) -> Ddnnf {
    let mut value: HashMap<Var, bool> = HashMap::new();
    for l in cube {
        value.insert(l.var(), l.is_positive());
    }
    let mut out = Ddnnf::new(d.num_vars());
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for id in d.reachable() {
        let r = match d.node(id) {
            DdnnfNode::True => NodeId::TRUE,
            DdnnfNode::False => NodeId::FALSE,
            DdnnfNode::Lit(l) => match value.get(&l.var()) {
                Some(&b) => out.constant(b == l.is_positive()),
                None => out.lit(*l),
            },
            DdnnfNode::And(cs) => {
                let k: Vec<NodeId> = cs.iter().map(|c| map[c]).collect();
                out.and(k)
            }
            DdnnfNode::Or { decision, children } => {
                let k: Vec<NodeId> = children.iter().map(|c| map[c]).collect();
                out.or(*decision, k)
            }
        };
        map.insert(id, r);
    }
    out.set_root(map[&d.root()]);
    out
}

/// Conditions the artifact on a cube. The result is flagged as conditioned
/// and is rejected by the mode-guarded queries.
pub fn condition(a: &CompiledArtifact, cube: &[Lit]) -> Result<CompiledArtifact> {
    let cube = Literals::new(a, cube)?;
    let d = a.ddnnf();
    a.add_visits(d.size().0);
    Ok(a.with_root(condition_ddnnf(d, cube.lits())))
}

/// CO: theory consistency of a T-reduced artifact.
pub fn is_consistent(a: &CompiledArtifact) -> Result<bool> {
    require_mode(a, Mode::TReduced)?;
    let mut visits = 0;
    let r = live(a.ddnnf(), &vec![None; a.num_vars()], &mut visits);
    a.add_visits(visits);
    Ok(r)
}

fn full_count(a: &CompiledArtifact, value: &[Option<bool>]) -> BigUint {
    let mut visits = 0;
    let r = weighted_count(a.smoothed(), value, &mut visits);
    a.add_visits(visits);
    r
}

/// VA: theory validity of a T-extended artifact.
pub fn is_valid(a: &CompiledArtifact) -> Result<bool> {
    require_mode(a, Mode::TExtended)?;
    let n = a.num_vars();
    Ok(full_count(a, &vec![None; n]) == BigUint::one() << n)
}

/// CE: whether the artifact entails the clause modulo the theory.
pub fn entails_clause(a: &CompiledArtifact, clause: &[Lit]) -> Result<bool> {
    require_mode(a, Mode::TReduced)?;
    let negated: Vec<Lit> = clause.iter().map(|l| l.negated()).collect();
    let cube = Literals::new(a, &negated)?;
    if cube.contradictory() {
        return Ok(true);
    }
    let mut visits = 0;
    let r = live(a.ddnnf(), &cube.value_map(a.num_vars()), &mut visits);
    a.add_visits(visits);
    Ok(!r)
}

/// IM: whether the cube implies the artifact modulo the theory.
pub fn is_implicant(a: &CompiledArtifact, cube: &[Lit]) -> Result<bool> {
    require_mode(a, Mode::TExtended)?;
    let cube = Literals::new(a, cube)?;
    if cube.contradictory() {
        return Ok(true);
    }
    let n = a.num_vars();
    let free = n - cube.lits().len();
    Ok(full_count(a, &cube.value_map(n)) == BigUint::one() << free)
}

/// CT: number of theory-consistent total assignments over the atom set.
pub fn count_models(a: &CompiledArtifact) -> Result<BigUint> {
    require_mode(a, Mode::TReduced)?;
    Ok(full_count(a, &vec![None; a.num_vars()]))
}

/// CT under assumptions: models that extend the cube.
pub fn count_models_assume(a: &CompiledArtifact, cube: &[Lit]) -> Result<BigUint> {
    require_mode(a, Mode::TReduced)?;
    let cube = Literals::new(a, cube)?;
    if cube.contradictory() {
        return Ok(BigUint::zero());
    }
    Ok(full_count(a, &cube.value_map(a.num_vars())))
}

/// ME: models in lexicographic order over the atom set, true before false.
pub fn enumerate_models(a: &CompiledArtifact) -> Result<ModelIter<'_>> {
    require_mode(a, Mode::TReduced)?;
    Ok(ModelIter::new(a))
}

/// Depth-first enumeration with a liveness check per decision, so the
/// delay between two models is polynomial in the circuit size.
pub struct ModelIter<'a> {
    a: &'a CompiledArtifact,
    value: Vec<Option<bool>>,
    /// Decided prefix: for each level, whether the false branch is still
    /// to be explored.
    stack: Vec<bool>,
    started: bool,
    done: bool,
}

impl<'a> ModelIter<'a> {
    fn new(a: &'a CompiledArtifact) -> ModelIter<'a> {
        ModelIter {
            a,
            value: vec![None; a.num_vars()],
            stack: Vec::new(),
            started: false,
            done: false,
        }
    }

    fn live(&self) -> bool {
        let mut visits = 0;
        let r = live(self.a.ddnnf(), &self.value, &mut visits);
        self.a.add_visits(visits);
        r
    }

    /// Flips the deepest level that still has an open false branch.
    fn backtrack(&mut self) -> bool {
        while let Some(open) = self.stack.pop() {
            let level = self.stack.len();
            if open {
                self.value[level] = Some(false);
                self.stack.push(false);
                if self.live() {
                    return true;
                }
                self.value[level] = None;
                self.stack.pop();
            } else {
                self.value[level] = None;
            }
        }
        false
    }

    /// Extends the current live prefix to a total assignment.
    fn descend(&mut self) {
        let n = self.value.len();
        while self.stack.len() < n {
            let level = self.stack.len();
            self.value[level] = Some(true);
            if self.live() {
                self.stack.push(true);
            } else {
                self.value[level] = Some(false);
                self.stack.push(false);
            }
        }
    }
}

impl Iterator for ModelIter<'_> {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.live() {
                self.done = true;
                return None;
            }
        } else if !self.backtrack() {
            self.done = true;
            return None;
        }
        self.descend();
        let mut rho = Assignment::empty(self.value.len());
        for (i, v) in self.value.iter().enumerate() {
            rho.set(Var::new(i as u32 + 1), *v);
        }
        Some(rho)
    }
}

fn obdd_pair<'a>(a: &'a CompiledArtifact, b: &'a CompiledArtifact) -> Result<(&'a crate::obdd::Obdd, &'a crate::obdd::Obdd)> {
    if a.conditioned || b.conditioned {
        return Err(Error::Unsupported("queries on conditioned artifacts".into()));
    }
    let (Some(x), Some(y)) = (a.obdd(), b.obdd()) else {
        return Err(Error::Unsupported("equivalence and entailment need OBDD artifacts".into()));
    };
    if a.mode != b.mode {
        return Err(Error::Unsupported("artifacts of different modes".into()));
    }
    if a.alpha() != b.alpha() {
        return Err(Error::Unsupported("artifacts over different atom sets".into()));
    }
    Ok((x, y))
}

/// EQ: theory equivalence of two OBDD artifacts of one manager.
pub fn equivalent(a: &CompiledArtifact, b: &CompiledArtifact) -> Result<bool> {
    let (x, y) = obdd_pair(a, b)?;
    a.add_visits(1);
    x.equal(y)
}

/// SE: whether `a` entails `b` modulo the theory.
pub fn sentential_entails(a: &CompiledArtifact, b: &CompiledArtifact) -> Result<bool> {
    let (x, y) = obdd_pair(a, b)?;
    x.entails(y)
}
