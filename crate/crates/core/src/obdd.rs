//! Reduced ordered binary decision diagrams.
//!
//! Nodes live in a [`ObddManager`] with a unique table, so two diagrams of
//! the same Boolean function under the manager's order are the same handle.
//! No complement edges are used. [`Obdd`] pairs a handle with a shared
//! manager; equality and entailment are only defined between diagrams of
//! one manager.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::ddnnf::{Ddnnf, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Dag, FormulaId, Node};
use crate::lit::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BddId(u32);

impl BddId {
    pub const FALSE: BddId = BddId(0);
    pub const TRUE: BddId = BddId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BddNode {
    Terminal(bool),
    Internal { var: Var, hi: BddId, lo: BddId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BddOp {
    And,
    Or,
    Xor,
    Implies,
}

impl BddOp {
    fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BddOp::And => a && b,
            BddOp::Or => a || b,
            BddOp::Xor => a != b,
            BddOp::Implies => !a || b,
        }
    }
}

static NEXT_MANAGER: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub struct ObddManager {
    id: u64,
    order: Vec<Var>,
    /// Level of each variable index, if ordered.
    level: Vec<Option<u32>>,
    /// `(level, hi, lo)`; the two terminals use `u32::MAX`.
    nodes: Vec<(u32, BddId, BddId)>,
    unique: HashMap<(u32, BddId, BddId), BddId>,
    cache: HashMap<(BddOp, BddId, BddId), BddId>,
    not_cache: HashMap<BddId, BddId>,
}

impl ObddManager {
    /// Manager over `order`, first variable at the root.
    pub fn new(order: Vec<Var>) -> Result<ObddManager> {
        let max = order.iter().map(|v| v.index() + 1).max().unwrap_or(0);
        let mut level = vec![None; max];
        for (i, v) in order.iter().enumerate() {
            if level[v.index()].replace(i as u32).is_some() {
                return Err(Error::Invalid(format!("variable {v} occurs twice in the order")));
            }
        }
        let terminal = (u32::MAX, BddId::FALSE, BddId::FALSE);
        Ok(ObddManager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            order,
            level,
            nodes: vec![terminal, terminal],
            unique: HashMap::new(),
            cache: HashMap::new(),
            not_cache: HashMap::new(),
        })
    }

    /// Natural order `1..=n`.
    pub fn with_vars(n: usize) -> ObddManager {
        ObddManager::new((1..=n as u32).map(Var::new).collect()).expect("distinct variables")
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn order(&self) -> &[Var] {
        &self.order
    }

    /// Nodes allocated so far, terminals included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: BddId) -> BddNode {
        match id {
            BddId::FALSE => BddNode::Terminal(false),
            BddId::TRUE => BddNode::Terminal(true),
            _ => {
                let (l, hi, lo) = self.nodes[id.index()];
                BddNode::Internal {
                    var: self.order[l as usize],
                    hi,
                    lo,
                }
            }
        }
    }

    fn level_of(&self, id: BddId) -> u32 {
        self.nodes[id.index()].0
    }

    fn mk(&mut self, level: u32, hi: BddId, lo: BddId) -> BddId {
        if hi == lo {
            return hi;
        }
        if let Some(&id) = self.unique.get(&(level, hi, lo)) {
            return id;
        }
        let id = BddId(self.nodes.len() as u32);
        self.nodes.push((level, hi, lo));
        self.unique.insert((level, hi, lo), id);
        id
    }

    pub fn constant(&self, value: bool) -> BddId {
        if value {
            BddId::TRUE
        } else {
            BddId::FALSE
        }
    }

    pub fn var(&mut self, v: Var) -> Result<BddId> {
        let l = self
            .level
            .get(v.index())
            .copied()
            .flatten()
            .ok_or(Error::UnorderedVariable(v.get()))?;
        Ok(self.mk(l, BddId::TRUE, BddId::FALSE))
    }

    pub fn literal(&mut self, v: Var, positive: bool) -> Result<BddId> {
        let x = self.var(v)?;
        Ok(if positive { x } else { self.not(x) })
    }

    pub fn not(&mut self, a: BddId) -> BddId {
        match a {
            BddId::FALSE => return BddId::TRUE,
            BddId::TRUE => return BddId::FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&a) {
            return r;
        }
        let (l, hi, lo) = self.nodes[a.index()];
        let (h, o) = (self.not(hi), self.not(lo));
        let r = self.mk(l, h, o);
        self.not_cache.insert(a, r);
        r
    }

    pub fn apply(&mut self, op: BddOp, a: BddId, b: BddId) -> BddId {
        if a.is_terminal() && b.is_terminal() {
            return self.constant(op.eval(a == BddId::TRUE, b == BddId::TRUE));
        }
        match (op, a, b) {
            (BddOp::And, BddId::FALSE, _) | (BddOp::And, _, BddId::FALSE) => return BddId::FALSE,
            (BddOp::And, BddId::TRUE, x) | (BddOp::And, x, BddId::TRUE) => return x,
            (BddOp::Or, BddId::TRUE, _) | (BddOp::Or, _, BddId::TRUE) => return BddId::TRUE,
            (BddOp::Or, BddId::FALSE, x) | (BddOp::Or, x, BddId::FALSE) => return x,
            (BddOp::Xor, x, y) if x == y => return BddId::FALSE,
            (BddOp::And | BddOp::Or, x, y) if x == y => return x,
            (BddOp::Implies, BddId::FALSE, _) | (BddOp::Implies, _, BddId::TRUE) => return BddId::TRUE,
            (BddOp::Implies, x, y) if x == y => return BddId::TRUE,
            _ => {}
        }
        let key = match op {
            BddOp::And | BddOp::Or | BddOp::Xor if b < a => (op, b, a),
            _ => (op, a, b),
        };
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let (la, lb) = (self.level_of(a), self.level_of(b));
        let l = la.min(lb);
        let (a1, a0) = if la == l {
            (self.nodes[a.index()].1, self.nodes[a.index()].2)
        } else {
            (a, a)
        };
        let (b1, b0) = if lb == l {
            (self.nodes[b.index()].1, self.nodes[b.index()].2)
        } else {
            (b, b)
        };
        let hi = self.apply(op, a1, b1);
        let lo = self.apply(op, a0, b0);
        let r = self.mk(l, hi, lo);
        self.cache.insert(key, r);
        r
    }

    pub fn and(&mut self, a: BddId, b: BddId) -> BddId {
        self.apply(BddOp::And, a, b)
    }

    pub fn or(&mut self, a: BddId, b: BddId) -> BddId {
        self.apply(BddOp::Or, a, b)
    }

    /// Diagram of the formula at `root`.
    pub fn from_formula(&mut self, dag: &Dag<Var>, root: FormulaId) -> Result<BddId> {
        if let Some(v) = dag.support(root).iter().find(|v| {
            self.level.get(v.index()).copied().flatten().is_none()
        }) {
            return Err(Error::UnorderedVariable(v.get()));
        }
        let mut memo: HashMap<FormulaId, BddId> = HashMap::new();
        for id in dag.reachable(root) {
            let m = |c: &FormulaId| memo[c];
            let r = match dag.node(id) {
                Node::True => BddId::TRUE,
                Node::False => BddId::FALSE,
                Node::Lit(v, p) => self.literal(*v, *p)?,
                Node::And(cs) => {
                    let mut acc = BddId::TRUE;
                    for c in cs.iter() {
                        acc = self.and(acc, m(c));
                    }
                    acc
                }
                Node::Or(cs) => {
                    let mut acc = BddId::FALSE;
                    for c in cs.iter() {
                        acc = self.or(acc, m(c));
                    }
                    acc
                }
                Node::Not(c) => self.not(m(c)),
                Node::Iff(a, b) => {
                    let x = self.apply(BddOp::Xor, m(a), m(b));
                    self.not(x)
                }
                Node::Implies(a, b) => self.apply(BddOp::Implies, m(a), m(b)),
            };
            memo.insert(id, r);
        }
        Ok(memo[&root])
    }

    /// Internal nodes reachable from `root`, children first.
    pub fn reachable(&self, root: BddId) -> Vec<BddId> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if id.is_terminal() {
                continue;
            }
            if expanded {
                out.push(id);
                continue;
            }
            if !seen.insert(id) {
                continue;
            }
            let (_, hi, lo) = self.nodes[id.index()];
            stack.push((id, true));
            stack.push((lo, false));
            stack.push((hi, false));
        }
        out
    }

    /// Number of internal nodes reachable from `root`.
    pub fn size(&self, root: BddId) -> usize {
        self.reachable(root).len()
    }

    /// Models over the variables `1..=num_vars`. Unordered variables among
    /// them are free; ordered variables beyond `num_vars` must not occur in
    /// the diagram.
    pub fn count(&self, root: BddId, num_vars: usize) -> BigUint {
        let n = self.order.len() as u32;
        let level = |id: BddId| if id.is_terminal() { n } else { self.level_of(id) };
        let mut memo: HashMap<BddId, BigUint> = HashMap::new();
        memo.insert(BddId::FALSE, BigUint::zero());
        memo.insert(BddId::TRUE, BigUint::one());
        for id in self.reachable(root) {
            let (l, hi, lo) = self.nodes[id.index()];
            let c = (&memo[&hi] << (level(hi) - l - 1)) + (&memo[&lo] << (level(lo) - l - 1));
            memo.insert(id, c);
        }
        let ordered = self
            .order
            .iter()
            .filter(|v| v.index() < num_vars)
            .count();
        let free = num_vars - ordered;
        let extra = (n as usize) - ordered;
        (&memo[&root] << (level(root) as usize + free)) >> extra
    }

    pub fn eval(&self, root: BddId, value: &dyn Fn(Var) -> bool) -> bool {
        let mut id = root;
        while !id.is_terminal() {
            let (l, hi, lo) = self.nodes[id.index()];
            id = if value(self.order[l as usize]) { hi } else { lo };
        }
        id == BddId::TRUE
    }

    /// Decision-DNNF with one decision node per internal node.
    pub fn to_ddnnf(&self, root: BddId, num_vars: usize) -> Ddnnf {
        let mut out = Ddnnf::new(num_vars);
        let mut map: HashMap<BddId, NodeId> = HashMap::new();
        map.insert(BddId::FALSE, NodeId::FALSE);
        map.insert(BddId::TRUE, NodeId::TRUE);
        for id in self.reachable(root) {
            let (l, hi, lo) = self.nodes[id.index()];
            let n = out.decision(self.order[l as usize], map[&hi], map[&lo]);
            map.insert(id, n);
        }
        out.set_root(map[&root]);
        out
    }

    /// One line per internal node: `id var hiId loId`, children first.
    pub fn export(&self, root: BddId) -> String {
        let mut s = String::new();
        for id in self.reachable(root) {
            let (l, hi, lo) = self.nodes[id.index()];
            let _ = writeln!(s, "{} {} {} {}", id.0, self.order[l as usize], hi.0, lo.0);
        }
        let _ = writeln!(s, "root {}", root.0);
        s
    }
}

pub type SharedManager = Arc<RwLock<ObddManager>>;

/// A diagram handle together with its manager.
#[derive(Clone, Debug)]
pub struct Obdd {
    pub manager: SharedManager,
    pub root: BddId,
}

impl Obdd {
    pub fn new(manager: SharedManager, root: BddId) -> Obdd {
        Obdd { manager, root }
    }

    fn same_manager(&self, other: &Obdd) -> Result<()> {
        if Arc::ptr_eq(&self.manager, &other.manager) {
            Ok(())
        } else {
            Err(Error::MixedManagers)
        }
    }

    pub fn apply(&self, op: BddOp, other: &Obdd) -> Result<Obdd> {
        self.same_manager(other)?;
        let root = self.manager.write().expect("manager lock").apply(op, self.root, other.root);
        Ok(Obdd::new(self.manager.clone(), root))
    }

    /// Handle identity.
    pub fn equal(&self, other: &Obdd) -> Result<bool> {
        self.same_manager(other)?;
        Ok(self.root == other.root)
    }

    pub fn entails(&self, other: &Obdd) -> Result<bool> {
        let imp = self.apply(BddOp::Implies, other)?;
        Ok(imp.root == BddId::TRUE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    #[test]
    fn terminals_and_identities() {
        let mut m = ObddManager::with_vars(3);
        let a = m.var(v(1)).unwrap();
        let b = m.var(v(2)).unwrap();
        let f = m.or(a, b);
        assert_eq!(m.and(f, BddId::TRUE), f);
        assert_eq!(m.apply(BddOp::Xor, f, f), BddId::FALSE);
        let na = m.not(a);
        let nb = m.not(b);
        let g = m.or(na, nb);
        let x = m.and(f, g);
        assert_eq!(m.count(x, 2), BigUint::from(2u32));
        assert_eq!(m.count(x, 3), BigUint::from(4u32));
        assert_eq!(x, m.apply(BddOp::Xor, a, b));
    }

    #[test]
    fn iff_has_three_nodes() {
        let mut dag = Dag::new();
        let a = dag.lit(v(1), true);
        let b = dag.lit(v(2), true);
        let f = dag.iff(a, b);
        let mut m = ObddManager::with_vars(2);
        let r = m.from_formula(&dag, f).unwrap();
        assert_eq!(m.size(r), 3);
        assert_eq!(m.from_formula(&dag, FormulaId::TRUE).unwrap(), BddId::TRUE);
    }

    #[test]
    fn unordered_variable_rejected() {
        let mut dag = Dag::new();
        let c = dag.lit(v(3), true);
        let mut m = ObddManager::new(vec![v(2), v(1)]).unwrap();
        assert!(matches!(m.from_formula(&dag, c), Err(Error::UnorderedVariable(3))));
        assert!(ObddManager::new(vec![v(1), v(1)]).is_err());
    }

    #[test]
    fn custom_order_counts_and_exports() {
        let mut dag = Dag::new();
        let a = dag.lit(v(1), true);
        let c = dag.lit(v(3), false);
        let f = dag.and([a, c]);
        let mut m = ObddManager::new(vec![v(3), v(2), v(1)]).unwrap();
        let r = m.from_formula(&dag, f).unwrap();
        assert_eq!(m.count(r, 3), BigUint::from(2u32));
        let d = m.to_ddnnf(r, 3);
        for bits in 0..8u64 {
            let val = |x: Var| bits >> x.index() & 1 == 1;
            assert_eq!(d.eval(&val), m.eval(r, &val));
        }
        let text = m.export(r);
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn handles_need_one_manager() {
        let m1: SharedManager = Arc::new(RwLock::new(ObddManager::with_vars(1)));
        let m2: SharedManager = Arc::new(RwLock::new(ObddManager::with_vars(1)));
        let x1 = m1.write().unwrap().var(v(1)).unwrap();
        let x2 = m2.write().unwrap().var(v(1)).unwrap();
        let (f, g) = (Obdd::new(m1.clone(), x1), Obdd::new(m2, x2));
        assert!(matches!(f.equal(&g), Err(Error::MixedManagers)));
        assert!(f.equal(&f).unwrap());
        let t = Obdd::new(m1.clone(), BddId::TRUE);
        let bot = Obdd::new(m1, BddId::FALSE);
        assert!(f.entails(&t).unwrap());
        assert!(bot.entails(&f).unwrap());
        assert!(!t.entails(&f).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn apply_matches_truth_tables(ta in 0u16.., tb in 0u16..) {
            // functions over 4 variables given by their truth tables
            let mut m = ObddManager::with_vars(4);
            let build = |m: &mut ObddManager, t: u16| {
                let mut acc = BddId::FALSE;
                for bits in 0..16u32 {
                    if t >> bits & 1 == 1 {
                        let mut cube = BddId::TRUE;
                        for i in 0..4 {
                            let l = m.literal(Var::new(i + 1), bits >> i & 1 == 1).unwrap();
                            cube = m.and(cube, l);
                        }
                        acc = m.or(acc, cube);
                    }
                }
                acc
            };
            let (a, b) = (build(&mut m, ta), build(&mut m, tb));
            for op in [BddOp::And, BddOp::Or, BddOp::Xor, BddOp::Implies] {
                let r = m.apply(op, a, b);
                let mut expect = 0u16;
                for bits in 0..16u16 {
                    if op.eval(ta >> bits & 1 == 1, tb >> bits & 1 == 1) {
                        expect |= 1 << bits;
                    }
                }
                proptest::prop_assert_eq!(r, build(&mut m, expect));
                proptest::prop_assert_eq!(m.count(r, 4), BigUint::from(expect.count_ones()));
            }
            proptest::prop_assert_eq!(m.not(a), build(&mut m, !ta));
        }
    }
}
