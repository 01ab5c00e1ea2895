//! Theory solvers: consistency of a conjunction of atom literals, with
//! conflict extraction.
//!
//! Literals are [`Lit`]s over the variables of an [`AtomSet`]; a solver is
//! created for one atom set and may be reused for many checks.

mod boolean;
mod lra;

use std::collections::BTreeMap;

pub use boolean::BooleanSolver;
pub use lra::LraSolver;

use crate::atom::{AtomSet, Rational};
use crate::error::{Error, Result};
use crate::lit::Lit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryVerdict {
    /// Witness assigns every real variable of the queried literals.
    Sat { witness: BTreeMap<String, Rational> },
    /// Conflict: subset of the queried literals, itself unsatisfiable.
    Unsat { conflict: Vec<Lit> },
}

impl TheoryVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, TheoryVerdict::Sat { .. })
    }

    pub fn conflict(&self) -> Option<&[Lit]> {
        match self {
            TheoryVerdict::Unsat { conflict } => Some(conflict),
            TheoryVerdict::Sat { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictCore {
    /// Sorted by variable.
    pub literals: Vec<Lit>,
    pub minimal: bool,
}

/// Backtrackable consistency checker.
///
/// `assert_lit` may report a conflict right away (e.g. two incompatible
/// bounds); otherwise the conflict surfaces at the next `check`.
pub trait TheorySolver: Send {
    fn push(&mut self);

    fn pop(&mut self);

    fn assert_lit(&mut self, lit: Lit) -> Result<Option<Vec<Lit>>>;

    fn check_asserted(&mut self) -> Result<TheoryVerdict>;

    /// One-shot check of `lits`, leaving the solver state unchanged.
    fn check(&mut self, lits: &[Lit]) -> Result<TheoryVerdict> {
        self.push();
        let verdict = (|| {
            for &l in lits {
                if let Some(conflict) = self.assert_lit(l)? {
                    return Ok(TheoryVerdict::Unsat { conflict: canonical(conflict) });
                }
            }
            self.check_asserted()
        })();
        self.pop();
        verdict
    }
}

/// Which theory backend to instantiate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Lra,
    Boolean,
}

impl Backend {
    pub fn solver(self, alpha: &AtomSet) -> Result<Box<dyn TheorySolver>> {
        Ok(match self {
            Backend::Lra => Box::new(LraSolver::new(alpha)?),
            Backend::Boolean => Box::new(BooleanSolver::new(alpha.len())),
        })
    }
}

pub(crate) fn canonical(mut lits: Vec<Lit>) -> Vec<Lit> {
    lits.sort();
    lits.dedup();
    lits
}

/// Deletion-based minimization of `conflict`, dropping literals in
/// descending variable order. The result is a minimal unsatisfiable subset.
pub fn minimize_conflict(
    solver: &mut dyn TheorySolver,
    literals: &[Lit],
    conflict: &[Lit],
) -> Result<ConflictCore> {
    if let Some(l) = conflict.iter().find(|l| !literals.contains(l)) {
        return Err(Error::Invalid(format!(
            "conflict literal {l} is not among the queried literals"
        )));
    }
    let mut core = canonical(conflict.to_vec());
    if solver.check(&core)?.is_sat() {
        return Err(Error::ConflictNotUnsat);
    }
    let order: Vec<Lit> = core.iter().rev().copied().collect();
    for lit in order {
        if !core.contains(&lit) {
            continue;
        }
        let trial: Vec<Lit> = core.iter().copied().filter(|&l| l != lit).collect();
        if let TheoryVerdict::Unsat { conflict } = solver.check(&trial)? {
            // the returned explanation is a subset of `trial`
            core = canonical(conflict);
        }
    }
    debug_assert!(core.len() >= 2, "single literals are never T-inconsistent");
    Ok(ConflictCore {
        literals: core,
        minimal: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{Atom, Cmp, Relation};
    use proptest::prelude::*;
    use num_traits::{Signed, Zero};

    const NAMES: [&str; 3] = ["x", "y", "z"];

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    /// `coeffs . x  (strict ? < : <=)  rhs`
    #[derive(Clone, Debug)]
    struct Ineq {
        coeffs: Vec<Rational>,
        strict: bool,
        rhs: Rational,
    }

    /// Fourier-Motzkin feasibility of a system of inequalities.
    fn fm_feasible(mut sys: Vec<Ineq>, n: usize) -> bool {
        for j in 0..n {
            let (mut pos, mut neg, mut rest) = (vec![], vec![], vec![]);
            for c in sys {
                if c.coeffs[j].is_positive() {
                    pos.push(c);
                } else if c.coeffs[j].is_negative() {
                    neg.push(c);
                } else {
                    rest.push(c);
                }
            }
            for p in &pos {
                for m in &neg {
                    let a = p.coeffs[j].clone();
                    let b = -m.coeffs[j].clone();
                    let coeffs = (0..n).map(|k| &p.coeffs[k] * &b + &m.coeffs[k] * &a).collect();
                    rest.push(Ineq {
                        coeffs,
                        strict: p.strict || m.strict,
                        rhs: &p.rhs * &b + &m.rhs * &a,
                    });
                }
            }
            sys = rest;
        }
        sys.iter().all(|c| if c.strict { c.rhs.is_positive() } else { !c.rhs.is_negative() })
    }

    /// Independent satisfiability check: the polyhedron must be non-empty
    /// and not contained in any excluded hyperplane.
    fn oracle_sat(alpha: &AtomSet, lits: &[Lit]) -> bool {
        let mut sys = Vec::new();
        let mut diseqs = Vec::new();
        for l in lits {
            let lin = alpha.atom(l.var()).unwrap().as_linear().unwrap();
            let mut t = vec![Rational::zero(); NAMES.len()];
            for (v, c) in lin.coeffs() {
                t[NAMES.iter().position(|n| n == v).unwrap()] = Rational::from_integer(c.clone());
            }
            let c = lin.constant().clone();
            let neg: Vec<Rational> = t.iter().map(|x| -x).collect();
            let ineq = |coeffs: &Vec<Rational>, strict, rhs: &Rational| Ineq {
                coeffs: coeffs.clone(),
                strict,
                rhs: rhs.clone(),
            };
            match (lin.relation(), l.is_positive()) {
                (Relation::Le, true) => sys.push(ineq(&t, false, &c)),
                (Relation::Le, false) => sys.push(ineq(&neg, true, &-&c)),
                (Relation::Lt, true) => sys.push(ineq(&t, true, &c)),
                (Relation::Lt, false) => sys.push(ineq(&neg, false, &-&c)),
                (Relation::Eq, true) => {
                    sys.push(ineq(&t, false, &c));
                    sys.push(ineq(&neg, false, &-&c));
                }
                (Relation::Eq, false) => diseqs.push((t, neg, c)),
            }
        }
        if !fm_feasible(sys.clone(), NAMES.len()) {
            return false;
        }
        diseqs.iter().all(|(t, neg, c)| {
            let mut below = sys.clone();
            below.push(Ineq { coeffs: t.clone(), strict: true, rhs: c.clone() });
            let mut above = sys.clone();
            above.push(Ineq { coeffs: neg.clone(), strict: true, rhs: -c });
            fm_feasible(below, NAMES.len()) || fm_feasible(above, NAMES.len())
        })
    }

    fn cmp_of(i: u8) -> Cmp {
        [Cmp::Le, Cmp::Lt, Cmp::Eq, Cmp::Ge, Cmp::Gt][i as usize % 5]
    }

    type RawConstraint = (Vec<(usize, i64)>, u8, i64, bool);

    fn constraint() -> impl Strategy<Value = RawConstraint> {
        (
            prop::collection::vec((0..NAMES.len(), prop_oneof![-2i64..=-1, 1i64..=2]), 1..=2),
            0u8..5,
            -3i64..=3,
            any::<bool>(),
        )
    }

    fn build(raw: &[RawConstraint]) -> (AtomSet, Vec<Lit>) {
        let mut alpha = AtomSet::new();
        let mut lits = Vec::new();
        for (terms, cmp, c, polarity) in raw {
            let terms: Vec<(&str, Rational)> = terms.iter().map(|(v, k)| (NAMES[*v], q(*k))).collect();
            let Ok((atom, pos)) = Atom::linear(terms, cmp_of(*cmp), q(*c)) else {
                continue;
            };
            alpha.insert(atom.clone());
            let lit = Lit::new(alpha.var_of(&atom).unwrap(), pos == *polarity);
            if !lits.contains(&lit.negated()) && !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        (alpha, lits)
    }

    fn holds(alpha: &AtomSet, lits: &[Lit], w: &BTreeMap<String, Rational>) -> bool {
        lits.iter().all(|l| {
            let lin = alpha.atom(l.var()).unwrap().as_linear().unwrap();
            let mut full = w.clone();
            for v in NAMES {
                full.entry(v.to_string()).or_insert_with(Rational::zero);
            }
            lin.eval(&full) == l.is_positive()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn simplex_agrees_with_elimination(raw in prop::collection::vec(constraint(), 1..=6)) {
            let (alpha, lits) = build(&raw);
            prop_assume!(!lits.is_empty());
            let mut solver = LraSolver::new(&alpha).unwrap();
            let verdict = solver.check(&lits).unwrap();
            prop_assert_eq!(verdict.is_sat(), oracle_sat(&alpha, &lits));
            match verdict {
                TheoryVerdict::Sat { witness } => prop_assert!(holds(&alpha, &lits, &witness)),
                TheoryVerdict::Unsat { conflict } => {
                    prop_assert!(conflict.iter().all(|l| lits.contains(l)));
                    prop_assert!(!oracle_sat(&alpha, &conflict));
                    let core = minimize_conflict(solver.as_mut_dyn(), &lits, &conflict).unwrap();
                    prop_assert!(!oracle_sat(&alpha, &core.literals));
                    for drop in &core.literals {
                        let rest: Vec<Lit> = core.literals.iter().copied().filter(|l| l != drop).collect();
                        prop_assert!(oracle_sat(&alpha, &rest), "core {:?} not minimal", core.literals);
                    }
                }
            }
        }

        #[test]
        fn incremental_matches_one_shot(raw in prop::collection::vec(constraint(), 1..=6)) {
            let (alpha, lits) = build(&raw);
            let mut inc = LraSolver::new(&alpha).unwrap();
            let mut fresh = LraSolver::new(&alpha).unwrap();
            for k in 0..lits.len() {
                inc.push();
                let early = inc.assert_lit(lits[k]).unwrap();
                let sat = early.is_none() && inc.check_asserted().unwrap().is_sat();
                prop_assert_eq!(sat, fresh.check(&lits[..=k]).unwrap().is_sat());
                if !sat {
                    break;
                }
            }
        }
    }

    trait AsDyn {
        fn as_mut_dyn(&mut self) -> &mut dyn TheorySolver;
    }

    impl AsDyn for LraSolver {
        fn as_mut_dyn(&mut self) -> &mut dyn TheorySolver {
            self
        }
    }

    /// `{(x <= 0), (x = 1), (y <= 0)}` with literals `A1`, `A2`, `!A3`.
    fn example_alpha() -> (AtomSet, Lit, Lit, Lit) {
        let atoms = [
            Atom::linear([("x", q(1))], Cmp::Le, q(0)).unwrap().0,
            Atom::linear([("x", q(1))], Cmp::Eq, q(1)).unwrap().0,
            Atom::linear([("y", q(1))], Cmp::Le, q(0)).unwrap().0,
        ];
        let alpha = AtomSet::from_atoms(atoms).unwrap();
        (alpha, Lit::pos(1), Lit::pos(2), Lit::neg(3))
    }

    #[test]
    fn minimize_drops_irrelevant_literal() {
        let (alpha, a, b, not_c) = example_alpha();
        let mut solver = LraSolver::new(&alpha).unwrap();
        let lits = [a, b, not_c];
        let core = minimize_conflict(&mut solver, &lits, &lits).unwrap();
        assert_eq!(core.literals, vec![a, b]);
        assert!(core.minimal);
    }

    #[test]
    fn minimize_rejects_satisfiable_conflict() {
        let (alpha, a, _, _) = example_alpha();
        let mut solver = LraSolver::new(&alpha).unwrap();
        assert!(matches!(
            minimize_conflict(&mut solver, &[a], &[a]),
            Err(Error::ConflictNotUnsat)
        ));
    }

    #[test]
    fn boolean_backend_only_sees_complements() {
        let (alpha, a, b, _) = example_alpha();
        let mut solver = Backend::Boolean.solver(&alpha).unwrap();
        assert!(solver.check(&[a, b]).unwrap().is_sat());
        assert!(!solver.check(&[a, !a]).unwrap().is_sat());
    }
}
