//! Hash-consed formula DAGs.
//!
//! [`Dag`] is generic over its leaf type: the theory level uses [`AtomId`]
//! (atoms interned in a [`FormulaStore`]) and the propositional level uses
//! [`Var`]. All constructors fold the Boolean constants, flatten nested
//! `and`/`or` nodes and share structurally identical nodes, so two equal
//! expressions always receive the same [`FormulaId`].

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::sync::Arc;

use indexmap::IndexSet;

use crate::atom::{AbstractionMap, Atom, AtomSet, Cmp, Rational};
use crate::error::{Error, Result};
use crate::lit::{Lit, Var};

/// Handle to a node of a [`Dag`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(u32);

impl FormulaId {
    pub const TRUE: FormulaId = FormulaId(0);
    pub const FALSE: FormulaId = FormulaId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node<V> {
    True,
    False,
    Lit(V, bool),
    And(Box<[FormulaId]>),
    Or(Box<[FormulaId]>),
    Not(FormulaId),
    Iff(FormulaId, FormulaId),
    Implies(FormulaId, FormulaId),
}

impl<V> Node<V> {
    pub fn children(&self) -> &[FormulaId] {
        match self {
            Node::And(cs) | Node::Or(cs) => cs,
            Node::Not(c) => std::slice::from_ref(c),
            _ => &[],
        }
    }
}

/// Leaf types usable in a [`Dag`].
pub trait Leaf: Copy + Ord + Hash + Eq + std::fmt::Debug + Send + Sync {}
impl<T: Copy + Ord + Hash + Eq + std::fmt::Debug + Send + Sync> Leaf for T {}

#[derive(Clone, Debug)]
pub struct Dag<V> {
    nodes: Vec<Node<V>>,
    support: Vec<Arc<[V]>>,
    unique: HashMap<Node<V>, FormulaId>,
}

impl<V: Leaf> Default for Dag<V> {
    fn default() -> Self {
        Dag::new()
    }
}

impl<V: Leaf> Dag<V> {
    pub fn new() -> Dag<V> {
        let mut dag = Dag {
            nodes: Vec::new(),
            support: Vec::new(),
            unique: HashMap::new(),
        };
        dag.insert(Node::True);
        dag.insert(Node::False);
        dag
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: FormulaId) -> &Node<V> {
        &self.nodes[id.index()]
    }

    /// Sorted, duplicate-free set of leaves reachable from `id`.
    pub fn support(&self, id: FormulaId) -> &[V] {
        &self.support[id.index()]
    }

    pub fn mentions(&self, id: FormulaId, v: V) -> bool {
        self.support(id).binary_search(&v).is_ok()
    }

    fn insert(&mut self, node: Node<V>) -> FormulaId {
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let support: Arc<[V]> = match &node {
            Node::True | Node::False => Arc::from(Vec::new()),
            Node::Lit(v, _) => Arc::from(vec![*v]),
            other => {
                let kids: Vec<FormulaId> = match other {
                    Node::Iff(a, b) | Node::Implies(a, b) => vec![*a, *b],
                    n => n.children().to_vec(),
                };
                if kids.len() == 1 {
                    self.support[kids[0].index()].clone()
                } else {
                    let mut s: Vec<V> = kids
                        .iter()
                        .flat_map(|k| self.support[k.index()].iter().copied())
                        .collect();
                    s.sort_unstable();
                    s.dedup();
                    Arc::from(s)
                }
            }
        };
        let id = FormulaId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.support.push(support);
        self.unique.insert(node, id);
        id
    }

    pub fn top(&self) -> FormulaId {
        FormulaId::TRUE
    }

    pub fn bot(&self) -> FormulaId {
        FormulaId::FALSE
    }

    pub fn constant(&self, value: bool) -> FormulaId {
        if value {
            FormulaId::TRUE
        } else {
            FormulaId::FALSE
        }
    }

    pub fn lit(&mut self, v: V, positive: bool) -> FormulaId {
        self.insert(Node::Lit(v, positive))
    }

    pub fn and(&mut self, children: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.nary(children, true)
    }

    pub fn or(&mut self, children: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.nary(children, false)
    }

    pub fn and2(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.and([a, b])
    }

    pub fn or2(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.or([a, b])
    }

    fn nary(&mut self, children: impl IntoIterator<Item = FormulaId>, conj: bool) -> FormulaId {
        let (unit, absorbing) = if conj {
            (FormulaId::TRUE, FormulaId::FALSE)
        } else {
            (FormulaId::FALSE, FormulaId::TRUE)
        };
        let mut flat: Vec<FormulaId> = Vec::new();
        let mut seen: HashSet<FormulaId> = HashSet::new();
        let mut push = |c: FormulaId, flat: &mut Vec<FormulaId>| {
            if seen.insert(c) {
                flat.push(c);
            }
        };
        for c in children {
            if c == absorbing {
                return absorbing;
            }
            if c == unit {
                continue;
            }
            match (&self.nodes[c.index()], conj) {
                (Node::And(gs), true) | (Node::Or(gs), false) => {
                    for &g in gs.iter() {
                        push(g, &mut flat);
                    }
                }
                _ => push(c, &mut flat),
            }
        }
        match flat.len() {
            0 => unit,
            1 => flat[0],
            _ => {
                let cs = flat.into_boxed_slice();
                self.insert(if conj { Node::And(cs) } else { Node::Or(cs) })
            }
        }
    }

    pub fn not(&mut self, a: FormulaId) -> FormulaId {
        match self.nodes[a.index()].clone() {
            Node::True => FormulaId::FALSE,
            Node::False => FormulaId::TRUE,
            Node::Lit(v, p) => self.lit(v, !p),
            Node::Not(inner) => inner,
            _ => self.insert(Node::Not(a)),
        }
    }

    pub fn iff(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        match (a, b) {
            (FormulaId::TRUE, x) | (x, FormulaId::TRUE) => x,
            (FormulaId::FALSE, x) | (x, FormulaId::FALSE) => self.not(x),
            _ if a == b => FormulaId::TRUE,
            _ => self.insert(Node::Iff(a, b)),
        }
    }

    pub fn implies(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        match (a, b) {
            (FormulaId::FALSE, _) | (_, FormulaId::TRUE) => FormulaId::TRUE,
            (FormulaId::TRUE, x) => x,
            (x, FormulaId::FALSE) => self.not(x),
            _ if a == b => FormulaId::TRUE,
            _ => self.insert(Node::Implies(a, b)),
        }
    }

    pub fn xor(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        let e = self.iff(a, b);
        self.not(e)
    }

    /// Only `and`/`or` internal nodes over literals and constants.
    pub fn is_nnf(&self, root: FormulaId) -> bool {
        self.reachable(root).into_iter().all(|id| {
            matches!(
                self.node(id),
                Node::True | Node::False | Node::Lit(..) | Node::And(_) | Node::Or(_)
            )
        })
    }

    /// Nodes reachable from `root`, children before parents.
    pub fn reachable(&self, root: FormulaId) -> Vec<FormulaId> {
        let mut order = Vec::new();
        let mut seen = HashSet::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            if !seen.insert(id) {
                continue;
            }
            stack.push((id, true));
            for c in self.operands(id).into_iter().rev() {
                if !seen.contains(&c) {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// All operands, including both sides of `iff`/`implies`.
    pub fn operands(&self, id: FormulaId) -> Vec<FormulaId> {
        match self.node(id) {
            Node::Iff(a, b) | Node::Implies(a, b) => vec![*a, *b],
            n => n.children().to_vec(),
        }
    }

    /// Leaves in left-to-right first-occurrence order.
    pub fn leaves_in_order(&self, root: FormulaId) -> Vec<V> {
        let mut out = Vec::new();
        let mut seen_leaf = HashSet::new();
        let mut seen = HashSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Node::Lit(v, _) = self.node(id) {
                if seen_leaf.insert(*v) {
                    out.push(*v);
                }
            }
            for c in self.operands(id).into_iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Number of distinct nodes reachable from `root`.
    pub fn size(&self, root: FormulaId) -> usize {
        self.reachable(root).len()
    }

    /// Negation normal form, B-equivalent to `root`.
    pub fn to_nnf(&mut self, root: FormulaId) -> FormulaId {
        let mut memo = HashMap::new();
        self.nnf_rec(root, true, &mut memo)
    }

    /// NNF of the negation of `root`.
    pub fn negate(&mut self, root: FormulaId) -> FormulaId {
        let mut memo = HashMap::new();
        self.nnf_rec(root, false, &mut memo)
    }

    fn nnf_rec(
        &mut self,
        id: FormulaId,
        pos: bool,
        memo: &mut HashMap<(FormulaId, bool), FormulaId>,
    ) -> FormulaId {
        if let Some(&r) = memo.get(&(id, pos)) {
            return r;
        }
        let r = match self.nodes[id.index()].clone() {
            Node::True => self.constant(pos),
            Node::False => self.constant(!pos),
            Node::Lit(v, p) => self.lit(v, p == pos),
            Node::And(cs) => {
                let kids: Vec<_> = cs.iter().map(|&c| self.nnf_rec(c, pos, memo)).collect();
                if pos {
                    self.and(kids)
                } else {
                    self.or(kids)
                }
            }
            Node::Or(cs) => {
                let kids: Vec<_> = cs.iter().map(|&c| self.nnf_rec(c, pos, memo)).collect();
                if pos {
                    self.or(kids)
                } else {
                    self.and(kids)
                }
            }
            Node::Not(c) => self.nnf_rec(c, !pos, memo),
            Node::Iff(a, b) => {
                let ap = self.nnf_rec(a, true, memo);
                let an = self.nnf_rec(a, false, memo);
                let bp = self.nnf_rec(b, true, memo);
                let bn = self.nnf_rec(b, false, memo);
                let (l, r) = if pos {
                    (self.and2(ap, bp), self.and2(an, bn))
                } else {
                    (self.and2(ap, bn), self.and2(an, bp))
                };
                self.or2(l, r)
            }
            Node::Implies(a, b) => {
                if pos {
                    let an = self.nnf_rec(a, false, memo);
                    let bp = self.nnf_rec(b, true, memo);
                    self.or2(an, bp)
                } else {
                    let ap = self.nnf_rec(a, true, memo);
                    let bn = self.nnf_rec(b, false, memo);
                    self.and2(ap, bn)
                }
            }
        };
        memo.insert((id, pos), r);
        r
    }

    /// Substitutes the assigned leaves by constants and propagates them.
    pub fn residual(&mut self, root: FormulaId, assignment: &HashMap<V, bool>) -> FormulaId {
        if assignment.is_empty() {
            return root;
        }
        let mut memo = HashMap::new();
        self.residual_rec(root, &|v| assignment.get(&v).copied(), &mut memo)
    }

    /// Residual under a single literal.
    pub fn condition(&mut self, root: FormulaId, v: V, value: bool) -> FormulaId {
        let mut memo = HashMap::new();
        self.residual_rec(root, &|w| (w == v).then_some(value), &mut memo)
    }

    fn residual_rec(
        &mut self,
        id: FormulaId,
        value: &dyn Fn(V) -> Option<bool>,
        memo: &mut HashMap<FormulaId, FormulaId>,
    ) -> FormulaId {
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        if self.support[id.index()].iter().all(|&v| value(v).is_none()) {
            memo.insert(id, id);
            return id;
        }
        let r = match self.nodes[id.index()].clone() {
            Node::True | Node::False => id,
            Node::Lit(v, p) => match value(v) {
                Some(b) => self.constant(b == p),
                None => id,
            },
            Node::And(cs) => {
                let mut kids = Vec::with_capacity(cs.len());
                for &c in cs.iter() {
                    let k = self.residual_rec(c, value, memo);
                    if k == FormulaId::FALSE {
                        memo.insert(id, k);
                        return k;
                    }
                    kids.push(k);
                }
                self.and(kids)
            }
            Node::Or(cs) => {
                let mut kids = Vec::with_capacity(cs.len());
                for &c in cs.iter() {
                    let k = self.residual_rec(c, value, memo);
                    if k == FormulaId::TRUE {
                        memo.insert(id, k);
                        return k;
                    }
                    kids.push(k);
                }
                self.or(kids)
            }
            Node::Not(c) => {
                let k = self.residual_rec(c, value, memo);
                self.not(k)
            }
            Node::Iff(a, b) => {
                let (a, b) = (self.residual_rec(a, value, memo), self.residual_rec(b, value, memo));
                self.iff(a, b)
            }
            Node::Implies(a, b) => {
                let (a, b) = (self.residual_rec(a, value, memo), self.residual_rec(b, value, memo));
                self.implies(a, b)
            }
        };
        memo.insert(id, r);
        r
    }

    /// Two-valued evaluation under a total valuation.
    pub fn eval(&self, root: FormulaId, value: &dyn Fn(V) -> bool) -> bool {
        self.eval3(root, &|v| Some(value(v)))
            .expect("total valuation yields a truth value")
    }

    /// Kleene three-valued evaluation under a partial valuation. Sound:
    /// `Some(b)` means every completion evaluates to `b`.
    pub fn eval3(&self, root: FormulaId, value: &dyn Fn(V) -> Option<bool>) -> Option<bool> {
        let mut memo: HashMap<FormulaId, Option<bool>> = HashMap::new();
        for id in self.reachable(root) {
            let get = |c: &FormulaId| memo[c];
            let r = match self.node(id) {
                Node::True => Some(true),
                Node::False => Some(false),
                Node::Lit(v, p) => value(*v).map(|b| b == *p),
                Node::And(cs) => {
                    let vals: Vec<Option<bool>> = cs.iter().map(get).collect();
                    if vals.contains(&Some(false)) {
                        Some(false)
                    } else if vals.iter().all(|v| *v == Some(true)) {
                        Some(true)
                    } else {
                        None
                    }
                }
                Node::Or(cs) => {
                    let vals: Vec<Option<bool>> = cs.iter().map(get).collect();
                    if vals.contains(&Some(true)) {
                        Some(true)
                    } else if vals.iter().all(|v| *v == Some(false)) {
                        Some(false)
                    } else {
                        None
                    }
                }
                Node::Not(c) => get(c).map(|b| !b),
                Node::Iff(a, b) => match (get(a), get(b)) {
                    (Some(x), Some(y)) => Some(x == y),
                    _ => None,
                },
                Node::Implies(a, b) => match (get(a), get(b)) {
                    (Some(false), _) | (_, Some(true)) => Some(true),
                    (Some(true), Some(false)) => Some(false),
                    _ => None,
                },
            };
            memo.insert(id, r);
        }
        memo[&root]
    }

    /// Rebuilds the sub-DAG at `root` of `other` into `self`, mapping leaves.
    pub fn import<W: Leaf>(
        &mut self,
        other: &Dag<W>,
        root: FormulaId,
        leaf: &mut dyn FnMut(W) -> Result<V>,
    ) -> Result<FormulaId> {
        let mut map: HashMap<FormulaId, FormulaId> = HashMap::new();
        for id in other.reachable(root) {
            let m = |c: &FormulaId| map[c];
            let r = match other.node(id) {
                Node::True => FormulaId::TRUE,
                Node::False => FormulaId::FALSE,
                Node::Lit(w, p) => {
                    let v = leaf(*w)?;
                    self.lit(v, *p)
                }
                Node::And(cs) => {
                    let kids: Vec<_> = cs.iter().map(m).collect();
                    self.and(kids)
                }
                Node::Or(cs) => {
                    let kids: Vec<_> = cs.iter().map(m).collect();
                    self.or(kids)
                }
                Node::Not(c) => self.not(m(c)),
                Node::Iff(a, b) => self.iff(m(a), m(b)),
                Node::Implies(a, b) => self.implies(m(a), m(b)),
            };
            map.insert(id, r);
        }
        Ok(map[&root])
    }
}

/// Interned theory atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(u32);

/// Expression tree accepted by [`FormulaStore::intern`].
#[derive(Clone, Debug)]
pub enum Expr {
    True,
    False,
    Bool(String),
    Linear(Vec<(String, Rational)>, Cmp, Rational),
    Atom(Atom, bool),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

/// A propositional formula over abstraction variables, with its own DAG.
#[derive(Clone, Debug)]
pub struct PropFormula {
    pub dag: Dag<Var>,
    pub root: FormulaId,
}

impl PropFormula {
    pub fn eval(&self, value: &dyn Fn(Var) -> bool) -> bool {
        self.dag.eval(self.root, value)
    }

    pub fn eval_bits(&self, bits: u64) -> bool {
        self.eval(&|v| bits >> v.index() & 1 == 1)
    }
}

/// Theory-level formulas: a [`Dag`] over interned atoms.
#[derive(Clone, Debug, Default)]
pub struct FormulaStore {
    dag: Dag<AtomId>,
    atoms: IndexSet<Atom>,
}

impl FormulaStore {
    pub fn new() -> FormulaStore {
        FormulaStore::default()
    }

    pub fn dag(&self) -> &Dag<AtomId> {
        &self.dag
    }

    pub fn dag_mut(&mut self) -> &mut Dag<AtomId> {
        &mut self.dag
    }

    pub fn node(&self, id: FormulaId) -> &Node<AtomId> {
        self.dag.node(id)
    }

    pub fn atom_id(&mut self, atom: Atom) -> AtomId {
        AtomId(self.atoms.insert_full(atom).0 as u32)
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id.0 as usize]
    }

    pub fn lookup_atom(&self, atom: &Atom) -> Option<AtomId> {
        self.atoms.get_index_of(atom).map(|i| AtomId(i as u32))
    }

    pub fn top(&self) -> FormulaId {
        FormulaId::TRUE
    }

    pub fn bot(&self) -> FormulaId {
        FormulaId::FALSE
    }

    pub fn lit(&mut self, atom: Atom, positive: bool) -> FormulaId {
        let a = self.atom_id(atom);
        self.dag.lit(a, positive)
    }

    pub fn bool_var(&mut self, name: &str) -> FormulaId {
        self.lit(Atom::boolean(name), true)
    }

    /// `terms cmp constant` as a literal over its canonical atom.
    pub fn linear<S: Into<String>>(
        &mut self,
        terms: impl IntoIterator<Item = (S, Rational)>,
        cmp: Cmp,
        constant: Rational,
    ) -> Result<FormulaId> {
        let (atom, positive) = Atom::linear(terms, cmp, constant)?;
        Ok(self.lit(atom, positive))
    }

    pub fn and(&mut self, cs: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.dag.and(cs)
    }

    pub fn or(&mut self, cs: impl IntoIterator<Item = FormulaId>) -> FormulaId {
        self.dag.or(cs)
    }

    pub fn not(&mut self, a: FormulaId) -> FormulaId {
        self.dag.not(a)
    }

    pub fn iff(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.dag.iff(a, b)
    }

    pub fn implies(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.dag.implies(a, b)
    }

    pub fn xor(&mut self, a: FormulaId, b: FormulaId) -> FormulaId {
        self.dag.xor(a, b)
    }

    pub fn intern(&mut self, expr: &Expr) -> Result<FormulaId> {
        Ok(match expr {
            Expr::True => FormulaId::TRUE,
            Expr::False => FormulaId::FALSE,
            Expr::Bool(name) => self.bool_var(name),
            Expr::Linear(terms, cmp, c) => self.linear(terms.iter().cloned(), *cmp, c.clone())?,
            Expr::Atom(a, p) => self.lit(a.clone(), *p),
            Expr::Not(e) => {
                let x = self.intern(e)?;
                self.not(x)
            }
            Expr::And(es) => {
                let xs = es.iter().map(|e| self.intern(e)).collect::<Result<Vec<_>>>()?;
                self.and(xs)
            }
            Expr::Or(es) => {
                let xs = es.iter().map(|e| self.intern(e)).collect::<Result<Vec<_>>>()?;
                self.or(xs)
            }
            Expr::Iff(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.iff(a, b)
            }
            Expr::Implies(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.implies(a, b)
            }
        })
    }

    /// Atoms of `root` in first-occurrence order.
    pub fn atoms_of(&self, root: FormulaId) -> AtomSet {
        let mut set = AtomSet::new();
        for a in self.dag.leaves_in_order(root) {
            set.insert(self.atom(a).clone());
        }
        set
    }

    /// Boolean abstraction over `alpha`: same DAG shape, atom `alpha[i]`
    /// replaced by variable `i + 1`.
    pub fn abstract_formula(
        &self,
        root: FormulaId,
        alpha: &AtomSet,
    ) -> Result<(PropFormula, AbstractionMap)> {
        let mut dag = Dag::new();
        let root = self.abstract_into(root, alpha, &mut dag)?;
        Ok((PropFormula { dag, root }, AbstractionMap::new(alpha.clone())))
    }

    /// Abstraction into an existing propositional DAG.
    pub fn abstract_into(
        &self,
        root: FormulaId,
        alpha: &AtomSet,
        dag: &mut Dag<Var>,
    ) -> Result<FormulaId> {
        let missing: Vec<String> = self
            .dag
            .support(root)
            .iter()
            .map(|&a| self.atom(a))
            .filter(|a| !alpha.contains(a))
            .map(|a| a.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::AtomNotInAlpha(missing.join(", ")));
        }
        dag.import(&self.dag, root, &mut |a| {
            Ok(alpha.var_of(self.atom(a)).expect("checked above"))
        })
    }

    /// Refinement: replaces variable `v` by atom `map[v]`.
    pub fn refine(&mut self, prop: &Dag<Var>, root: FormulaId, map: &AbstractionMap) -> Result<FormulaId> {
        let mut ids: HashMap<Var, AtomId> = HashMap::new();
        for v in prop.support(root) {
            let atom = map.atom_of(*v)?.clone();
            ids.insert(*v, self.atom_id(atom));
        }
        self.dag.import(prop, root, &mut |v| Ok(ids[&v]))
    }

    pub fn to_nnf(&mut self, root: FormulaId) -> FormulaId {
        self.dag.to_nnf(root)
    }

    pub fn negate(&mut self, root: FormulaId) -> FormulaId {
        self.dag.negate(root)
    }

    /// Residual of `root` under a (partial) assignment to atoms.
    pub fn residual(&mut self, root: FormulaId, mu: &[(Atom, bool)]) -> FormulaId {
        let map: HashMap<AtomId, bool> = mu
            .iter()
            .filter_map(|(a, b)| self.lookup_atom(a).map(|id| (id, *b)))
            .collect();
        self.dag.residual(root, &map)
    }

    /// Conjunction of the clauses given as literals over `alpha`.
    pub fn clauses(&mut self, alpha: &AtomSet, clauses: &[Vec<Lit>]) -> Result<FormulaId> {
        let mut cs = Vec::with_capacity(clauses.len());
        for clause in clauses {
            let mut lits = Vec::with_capacity(clause.len());
            for l in clause {
                let atom = alpha
                    .atom(l.var())
                    .ok_or(Error::UnmappedVariable(l.var().get()))?
                    .clone();
                lits.push(self.lit(atom, l.is_positive()));
            }
            cs.push(self.or(lits));
        }
        Ok(self.and(cs))
    }
}
