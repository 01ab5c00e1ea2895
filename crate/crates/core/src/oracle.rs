//! Brute-force reference semantics.
//!
//! Every total assignment over the atom set is evaluated propositionally;
//! satisfying ones are theory-checked and classified as consistent (CTTA)
//! or inconsistent (ITTA). All query answers are then read off these sets.
//! Refuses atom sets above a configured bound instead of degrading.
//!
//! [`allsmt_count`] is a separate, search-based model counter in the style
//! of AllSMT solvers, used as a baseline in benchmarks.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::atom::{AbstractionMap, Assignment, AtomSet};
use crate::error::{Error, Result};
use crate::formula::{Dag, FormulaId, FormulaStore};
use crate::lit::{Lit, Var};
use crate::theory::{Backend, TheorySolver};

pub const DEFAULT_BOUND: usize = 16;

/// CTTA and ITTA of a formula as bit masks (bit `i` is variable `i + 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentSets {
    pub ctta: BTreeSet<u64>,
    pub itta: BTreeSet<u64>,
    pub num_vars: usize,
}

impl AssignmentSets {
    pub fn ctta_assignments(&self) -> Vec<Assignment> {
        lex(&self.ctta, self.num_vars)
    }

    pub fn itta_assignments(&self) -> Vec<Assignment> {
        lex(&self.itta, self.num_vars)
    }

    /// Consistent models extending the cube.
    pub fn count_assume(&self, cube: &[Lit]) -> usize {
        if contradictory(cube) {
            return 0;
        }
        let (care, val) = cube_mask(cube);
        self.ctta.iter().filter(|&&b| b & care == val).count()
    }

    /// No consistent model falsifies the clause.
    pub fn entails_clause(&self, clause: &[Lit]) -> bool {
        let negated: Vec<Lit> = clause.iter().map(|l| l.negated()).collect();
        self.count_assume(&negated) == 0
    }
}

/// Assignments in lexicographic order over the variables, true first.
pub fn lex(masks: &BTreeSet<u64>, n: usize) -> Vec<Assignment> {
    let mut v: Vec<u64> = masks.iter().copied().collect();
    v.sort_by_key(|&m| lex_key(m, n));
    v.into_iter().map(|m| Assignment::from_bits(n, m)).collect()
}

/// Sort key realizing the true-first lexicographic order.
pub fn lex_key(mask: u64, n: usize) -> u64 {
    let mut k = 0;
    for i in 0..n {
        k = (k << 1) | (!mask >> i & 1);
    }
    k
}

fn cube_mask(lits: &[Lit]) -> (u64, u64) {
    let (mut care, mut val) = (0u64, 0u64);
    for l in lits {
        care |= 1 << l.var().index();
        if l.is_positive() {
            val |= 1 << l.var().index();
        }
    }
    (care, val)
}

/// Exhaustive evaluator over one atom set.
pub struct Oracle {
    alpha: AtomSet,
    solver: Box<dyn TheorySolver>,
    /// Atoms with theory content; Boolean atoms never affect consistency.
    theory_mask: u64,
    memo: HashMap<u64, bool>,
    dag: Dag<Var>,
}

impl Oracle {
    pub fn new(alpha: &AtomSet) -> Result<Oracle> {
        Oracle::with_bound(alpha, DEFAULT_BOUND)
    }

    pub fn with_bound(alpha: &AtomSet, bound: usize) -> Result<Oracle> {
        if alpha.len() > bound || alpha.len() > 63 {
            return Err(Error::OracleBound {
                atoms: alpha.len(),
                bound,
            });
        }
        let theory_mask = alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_boolean())
            .fold(0u64, |m, (i, _)| m | 1 << i);
        Ok(Oracle {
            alpha: alpha.clone(),
            solver: Backend::Lra.solver(alpha)?,
            theory_mask,
            memo: HashMap::new(),
            dag: Dag::new(),
        })
    }

    pub fn alpha(&self) -> &AtomSet {
        &self.alpha
    }

    pub fn num_vars(&self) -> usize {
        self.alpha.len()
    }

    /// Theory consistency of a total assignment.
    pub fn consistent(&mut self, bits: u64) -> Result<bool> {
        let key = bits & self.theory_mask;
        if let Some(&c) = self.memo.get(&key) {
            return Ok(c);
        }
        let lits: Vec<Lit> = (0..self.alpha.len())
            .filter(|i| self.theory_mask >> i & 1 == 1)
            .map(|i| Lit::new(Var::new(i as u32 + 1), bits >> i & 1 == 1))
            .collect();
        let c = self.solver.check(&lits)?.is_sat();
        self.memo.insert(key, c);
        Ok(c)
    }

    /// Imports a formula of `store` over this oracle's atom set.
    pub fn abstract_formula(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<FormulaId> {
        store.abstract_into(phi, &self.alpha, &mut self.dag)
    }

    /// Propositional models of an abstracted formula.
    fn models(&self, root: FormulaId) -> Vec<u64> {
        let n = self.alpha.len();
        (0..1u64 << n)
            .filter(|&b| self.dag.eval(root, &|v| b >> v.index() & 1 == 1))
            .collect()
    }

    fn classify(&mut self, root: FormulaId) -> Result<AssignmentSets> {
        let mut sets = AssignmentSets {
            ctta: BTreeSet::new(),
            itta: BTreeSet::new(),
            num_vars: self.alpha.len(),
        };
        for b in self.models(root) {
            if self.consistent(b)? {
                sets.ctta.insert(b);
            } else {
                sets.itta.insert(b);
            }
        }
        Ok(sets)
    }

    pub fn sets(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<AssignmentSets> {
        let r = self.abstract_formula(store, phi)?;
        self.classify(r)
    }

    pub fn negation_sets(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<AssignmentSets> {
        let r = self.abstract_formula(store, phi)?;
        let n = self.dag.not(r);
        self.classify(n)
    }

    /// Sets of a formula already abstracted over this oracle's atom set.
    pub fn prop_sets(&mut self, dag: &Dag<Var>, root: FormulaId) -> Result<AssignmentSets> {
        let r = self.dag.import(dag, root, &mut |v| Ok(v))?;
        self.classify(r)
    }

    /// All theory-consistent total assignments.
    pub fn consistent_set(&mut self) -> Result<BTreeSet<u64>> {
        let mut s = BTreeSet::new();
        for b in 0..1u64 << self.alpha.len() {
            if self.consistent(b)? {
                s.insert(b);
            }
        }
        Ok(s)
    }

    pub fn check_treduced(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<bool> {
        Ok(self.sets(store, phi)?.itta.is_empty())
    }

    pub fn check_textended(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<bool> {
        Ok(self.negation_sets(store, phi)?.itta.is_empty())
    }

    /// CO: theory satisfiability.
    pub fn co(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<bool> {
        Ok(!self.sets(store, phi)?.ctta.is_empty())
    }

    /// VA: theory validity.
    pub fn va(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<bool> {
        Ok(self.negation_sets(store, phi)?.ctta.is_empty())
    }

    /// CE: `phi` entails the clause modulo the theory.
    pub fn ce(&mut self, store: &FormulaStore, phi: FormulaId, clause: &[Lit]) -> Result<bool> {
        Ok(self.sets(store, phi)?.entails_clause(clause))
    }

    /// IM: the cube implies `phi` modulo the theory.
    pub fn im(&mut self, store: &FormulaStore, phi: FormulaId, cube: &[Lit]) -> Result<bool> {
        Ok(self.negation_sets(store, phi)?.count_assume(cube) == 0)
    }

    /// CT: number of consistent models.
    pub fn ct(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<BigUint> {
        Ok(BigUint::from(self.sets(store, phi)?.ctta.len()))
    }

    /// CT under assumptions.
    pub fn ct_assume(&mut self, store: &FormulaStore, phi: FormulaId, cube: &[Lit]) -> Result<BigUint> {
        Ok(BigUint::from(self.sets(store, phi)?.count_assume(cube)))
    }

    /// ME: consistent models in lexicographic order, true first.
    pub fn me(&mut self, store: &FormulaStore, phi: FormulaId) -> Result<Vec<Assignment>> {
        Ok(self.sets(store, phi)?.ctta_assignments())
    }

    /// EQ: equal consistent model sets.
    pub fn eq(&mut self, store: &FormulaStore, phi: FormulaId, psi: FormulaId) -> Result<bool> {
        Ok(self.sets(store, phi)?.ctta == self.sets(store, psi)?.ctta)
    }

    /// SE: inclusion of consistent model sets.
    pub fn se(&mut self, store: &FormulaStore, phi: FormulaId, psi: FormulaId) -> Result<bool> {
        let a = self.sets(store, phi)?.ctta;
        let b = self.sets(store, psi)?.ctta;
        Ok(a.is_subset(&b))
    }
}

fn contradictory(lits: &[Lit]) -> bool {
    lits.iter().any(|l| lits.contains(&l.negated()))
}

/// Renders a model as a cube over atom names.
pub fn show(map: &AbstractionMap, rho: &Assignment) -> String {
    rho.display_with(map)
}

/// Counts the theory-consistent total models of `root` (abstracted over
/// `alpha`) extending `cube` by explicit search: every model with
/// arithmetic content is reached and theory-checked one by one, and only
/// blocks of purely Boolean atoms left free by a `true` residual are
/// counted in bulk.
pub fn allsmt_count(
    dag: &mut Dag<Var>,
    root: FormulaId,
    alpha: &AtomSet,
    cube: &[Lit],
    deadline: Option<Instant>,
) -> Result<BigUint> {
    let mut solver = Backend::Lra.solver(alpha)?;
    let mut assigned: HashMap<Var, bool> = HashMap::new();
    for l in cube {
        if assigned.insert(l.var(), l.is_positive()) == Some(!l.is_positive()) {
            return Ok(BigUint::zero());
        }
    }
    let start = dag.residual(root, &assigned);
    solver.push();
    for l in cube {
        if solver.assert_lit(*l)?.is_some() {
            return Ok(BigUint::zero());
        }
    }
    if !solver.check_asserted()?.is_sat() {
        return Ok(BigUint::zero());
    }
    let mut s = AllSmt {
        dag,
        alpha,
        solver,
        assigned: vec![false; alpha.len()],
        deadline,
        steps: 0,
    };
    for l in cube {
        s.assigned[l.var().index()] = true;
    }
    s.run(start)
}

struct AllSmt<'a> {
    dag: &'a mut Dag<Var>,
    alpha: &'a AtomSet,
    solver: Box<dyn TheorySolver>,
    assigned: Vec<bool>,
    deadline: Option<Instant>,
    steps: u64,
}

impl AllSmt<'_> {
    fn run(&mut self, residual: FormulaId) -> Result<BigUint> {
        self.steps += 1;
        if self.steps.is_multiple_of(128) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Error::Timeout("model counting"));
                }
            }
        }
        if residual == FormulaId::FALSE {
            return Ok(BigUint::zero());
        }
        let next = if residual == FormulaId::TRUE {
            match (0..self.alpha.len()).find(|&i| !self.assigned[i] && !self.alpha.atom(Var::new(i as u32 + 1)).is_some_and(|a| a.is_boolean())) {
                Some(i) => Var::new(i as u32 + 1),
                None => {
                    let free = self.assigned.iter().filter(|a| !**a).count();
                    return Ok(BigUint::one() << free);
                }
            }
        } else {
            self.dag.support(residual)[0]
        };
        let mut total = BigUint::zero();
        self.assigned[next.index()] = true;
        for value in [true, false] {
            self.solver.push();
            let lit = Lit::new(next, value);
            let ok = self.solver.assert_lit(lit)?.is_none() && self.solver.check_asserted()?.is_sat();
            if ok {
                let r = self.dag.condition(residual, next, value);
                total += self.run(r)?;
            }
            self.solver.pop();
        }
        self.assigned[next.index()] = false;
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{Cmp, Rational};
    use crate::formula::Expr;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn atom(v: &str, cmp: Cmp, c: i64) -> Expr {
        Expr::Linear(vec![(v.to_string(), q(1))], cmp, q(c))
    }

    fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    #[test]
    fn disjunction_sets() {
        let mut s = FormulaStore::new();
        let phi1 = s.intern(&Expr::Or(vec![atom("x", Cmp::Le, 0), atom("x", Cmp::Eq, 1)])).unwrap();
        let phi2 = s
            .intern(&Expr::Iff(Box::new(not(atom("x", Cmp::Le, 0))), Box::new(atom("x", Cmp::Eq, 1))))
            .unwrap();
        let alpha = s.atoms_of(phi1);
        let mut o = Oracle::new(&alpha).unwrap();
        let sets = o.sets(&s, phi1).unwrap();
        assert_eq!(sets.ctta, BTreeSet::from([0b01, 0b10]));
        assert_eq!(sets.itta, BTreeSet::from([0b11]));
        assert!(o.negation_sets(&s, phi1).unwrap().itta.is_empty());
        let sets2 = o.sets(&s, phi2).unwrap();
        assert_eq!(sets2.ctta, sets.ctta);
        assert!(sets2.itta.is_empty());
        assert_eq!(o.ct(&s, phi1).unwrap(), BigUint::from(2u32));
        assert!(o.eq(&s, phi1, phi2).unwrap());
        let shown: Vec<String> = o
            .me(&s, phi1)
            .unwrap()
            .iter()
            .map(|r| show(&AbstractionMap::new(alpha.clone()), r))
            .collect();
        assert_eq!(shown, vec!["(<= x 0) & !(= x 1)", "!(<= x 0) & (= x 1)"]);
    }

    #[test]
    fn larger_alpha_has_more_inconsistent_assignments() {
        let mut s = FormulaStore::new();
        let phi1 = s.intern(&Expr::Or(vec![atom("x", Cmp::Le, 0), atom("x", Cmp::Eq, 1)])).unwrap();
        let ge2 = s.intern(&atom("x", Cmp::Ge, 2)).unwrap();
        let both = s.and([phi1, ge2]);
        let alpha = s.atoms_of(both);
        let mut o = Oracle::new(&alpha).unwrap();
        assert_eq!(o.sets(&s, phi1).unwrap().itta.len(), 4);
    }

    #[test]
    fn reduced_and_extended_checks() {
        let mut s = FormulaStore::new();
        let a = s.intern(&atom("x", Cmp::Ge, 0)).unwrap();
        let b = s.intern(&atom("x", Cmp::Ge, 1)).unwrap();
        let phi = s.and([a, b]);
        let alpha = s.atoms_of(phi);
        let mut o = Oracle::new(&alpha).unwrap();
        assert!(o.check_treduced(&s, phi).unwrap());
        assert!(!o.check_treduced(&s, b).unwrap());

        let c = s.intern(&not(atom("x", Cmp::Eq, 0))).unwrap();
        let d = s.intern(&not(atom("x", Cmp::Le, 1))).unwrap();
        let psi = s.or([c, d]);
        let alpha = s.atoms_of(psi);
        let mut o = Oracle::new(&alpha).unwrap();
        assert!(o.check_textended(&s, psi).unwrap());

        let b1 = s.bool_var("B1");
        let top = s.top();
        let mut o = Oracle::new(&s.atoms_of(b1)).unwrap();
        assert!(o.check_treduced(&s, top).unwrap());
    }

    #[test]
    fn validity_of_lemma() {
        let mut s = FormulaStore::new();
        let lemma = s
            .intern(&Expr::Or(vec![not(atom("x", Cmp::Le, 0)), not(atom("x", Cmp::Eq, 1))]))
            .unwrap();
        let alpha = s.atoms_of(lemma);
        let mut o = Oracle::new(&alpha).unwrap();
        assert!(o.va(&s, lemma).unwrap());
    }

    #[test]
    fn bound_is_enforced() {
        let mut s = FormulaStore::new();
        let vars: Vec<FormulaId> = (0..5).map(|i| s.bool_var(&format!("b{i}"))).collect();
        let f = s.and(vars);
        assert!(matches!(
            Oracle::with_bound(&s.atoms_of(f), 4),
            Err(Error::OracleBound { atoms: 5, bound: 4 })
        ));
    }

    #[test]
    fn search_counter_agrees() {
        let mut s = FormulaStore::new();
        let phi = s
            .intern(&Expr::And(vec![
                Expr::Or(vec![atom("x1", Cmp::Le, 0), atom("x2", Cmp::Le, 0), Expr::Bool("b".into())]),
                Expr::Or(vec![atom("x1", Cmp::Ge, 1), atom("x2", Cmp::Ge, 1)]),
            ]))
            .unwrap();
        let alpha = s.atoms_of(phi);
        let mut o = Oracle::new(&alpha).unwrap();
        let expected = o.ct(&s, phi).unwrap();
        let (p, _) = s.abstract_formula(phi, &alpha).unwrap();
        let mut dag = p.dag;
        assert_eq!(allsmt_count(&mut dag, p.root, &alpha, &[], None).unwrap(), expected);
        let cube = [Lit::pos(1)];
        assert_eq!(
            allsmt_count(&mut dag, p.root, &alpha, &cube, None).unwrap(),
            o.ct_assume(&s, phi, &cube).unwrap()
        );
    }
}
