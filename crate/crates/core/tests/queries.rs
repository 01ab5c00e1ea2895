use std::sync::{Arc, RwLock};

use dnnfmt::artifact::{build_obdd_artifact, refine_root};
use dnnfmt::ddnnf::validate;
use dnnfmt::query::{
    condition, count_models, count_models_assume, entails_clause, enumerate_models, equivalent, is_consistent,
    is_implicant, is_valid, sentential_entails,
};
use dnnfmt::*;
use num_bigint::BigUint;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn atom(v: &str, cmp: Cmp, c: i64) -> Expr {
    Expr::Linear(vec![(v.to_string(), q(1))], cmp, q(c))
}

fn not(e: Expr) -> Expr {
    Expr::Not(Box::new(e))
}

fn big(n: u32) -> BigUint {
    BigUint::from(n)
}

/// `(x <= 0) | (x = 1)`
fn phi1(s: &mut FormulaStore) -> FormulaId {
    s.intern(&Expr::Or(vec![atom("x", Cmp::Le, 0), atom("x", Cmp::Eq, 1)])).unwrap()
}

/// `!(x <= 0) <-> (x = 1)`
fn phi2(s: &mut FormulaStore) -> FormulaId {
    s.intern(&Expr::Iff(Box::new(not(atom("x", Cmp::Le, 0))), Box::new(atom("x", Cmp::Eq, 1))))
        .unwrap()
}

fn split_clauses(s: &mut FormulaStore) -> FormulaId {
    s.intern(&Expr::And(vec![
        Expr::Or(vec![atom("x1", Cmp::Le, 0), atom("x2", Cmp::Le, 0)]),
        Expr::Or(vec![atom("x1", Cmp::Ge, 1), atom("x2", Cmp::Ge, 1)]),
    ]))
    .unwrap()
}

fn lits(a: &CompiledArtifact, text: &[&str]) -> Vec<Lit> {
    text.iter().map(|t| a.map.parse_lit(t).unwrap()).collect()
}

#[test]
fn reduced_disjunction() {
    let mut s = FormulaStore::new();
    let phi = phi1(&mut s);
    let alpha = s.atoms_of(phi);
    let a = build_tred(&mut s, phi, &alpha).unwrap();
    assert_eq!(a.lemmas.len(), 1);
    assert!(is_consistent(&a).unwrap());
    assert_eq!(count_models(&a).unwrap(), big(2));
    assert!(entails_clause(&a, &lits(&a, &["(<= x 0)", "(= x 1)"])).unwrap());
    assert!(entails_clause(&a, &lits(&a, &["!(<= x 0)", "!(= x 1)"])).unwrap());
    assert!(!entails_clause(&a, &lits(&a, &["!(<= x 0)"])).unwrap());
    let models: Vec<String> = enumerate_models(&a).unwrap().map(|m| m.display_with(&a.map)).collect();
    assert_eq!(models, vec!["(<= x 0) & !(= x 1)", "!(<= x 0) & (= x 1)"]);
    assert_eq!(count_models_assume(&a, &[]).unwrap(), big(2));
    assert_eq!(count_models_assume(&a, &lits(&a, &["(<= x 0)", "(= x 1)"])).unwrap(), big(0));
    let c = condition(&a, &lits(&a, &["(<= x 0)"])).unwrap();
    assert!(c.conditioned);
    assert!(is_consistent(&c).is_err());
    assert_eq!(count_models_assume(&a, &lits(&a, &["(<= x 0)"])).unwrap(), big(1));
    let r = validate(a.ddnnf(), None);
    assert!(r.decomposable && r.deterministic);
    assert_eq!(condition(&a, &[]).unwrap().truth_table(), a.truth_table());
}

#[test]
fn reduced_edge_cases() {
    let mut s = FormulaStore::new();
    let unsat = s
        .intern(&Expr::And(vec![atom("x", Cmp::Le, 0), atom("x", Cmp::Eq, 1)]))
        .unwrap();
    let alpha = s.atoms_of(unsat);
    let a = build_tred(&mut s, unsat, &alpha).unwrap();
    assert_eq!(a.ddnnf().root(), NodeId::FALSE);
    assert!(!is_consistent(&a).unwrap());
    assert_eq!(count_models(&a).unwrap(), big(0));
    assert_eq!(enumerate_models(&a).unwrap().count(), 0);

    let top = s.top();
    let t = build_tred(&mut s, top, &alpha).unwrap();
    assert!(is_consistent(&t).unwrap());
    assert_eq!(count_models(&t).unwrap(), big(3));

    let bot = s.bot();
    let b = build_tred(&mut s, bot, &alpha).unwrap();
    assert_eq!(count_models(&b).unwrap(), big(0));
}

#[test]
fn split_clauses_regression() {
    let mut s = FormulaStore::new();
    let phi = split_clauses(&mut s);
    let alpha = s.atoms_of(phi);
    let a = build_tred(&mut s, phi, &alpha).unwrap();
    assert_eq!(a.lemmas.len(), 2);
    assert_eq!(count_models(&a).unwrap(), big(2));
    assert_eq!(count_models_assume(&a, &lits(&a, &["(<= x1 0)"])).unwrap(), big(1));
    let models: Vec<Assignment> = enumerate_models(&a).unwrap().collect();
    assert_eq!(models.len(), 2);
    let mut oracle = Oracle::new(&alpha).unwrap();
    let refined = refine_root(&mut s, &a).unwrap();
    assert!(oracle.check_treduced(&s, refined).unwrap());
}

#[test]
fn extended_queries() {
    let mut s = FormulaStore::new();
    let lemma = s
        .intern(&Expr::Or(vec![not(atom("x", Cmp::Le, 0)), not(atom("x", Cmp::Eq, 1))]))
        .unwrap();
    let alpha = s.atoms_of(lemma);
    let t = build_text(&mut s, lemma, &alpha).unwrap();
    assert!(is_valid(&t).unwrap());
    assert_eq!(t.truth_table().len(), 4);
    assert!(is_implicant(&t, &lits(&t, &["(<= x 0)"])).unwrap());

    let phi = phi1(&mut s);
    let t1 = build_text(&mut s, phi, &alpha).unwrap();
    assert!(t1.lemmas.is_empty());
    assert!(!is_valid(&t1).unwrap());
    assert!(is_implicant(&t1, &lits(&t1, &["(<= x 0)"])).unwrap());
    assert!(!is_implicant(&t1, &lits(&t1, &["!(<= x 0)", "!(= x 1)"])).unwrap());

    let le = s.intern(&atom("x", Cmp::Le, 0)).unwrap();
    let nle = s.not(le);
    let taut = s.or([le, nle]);
    let tt = build_text(&mut s, taut, &alpha).unwrap();
    assert!(is_valid(&tt).unwrap());

    let bot = s.bot();
    let tb = build_text(&mut s, bot, &alpha).unwrap();
    assert_eq!(tb.truth_table(), vec![0b11]);
}

#[test]
fn mode_guards() {
    let mut s = FormulaStore::new();
    let phi = phi1(&mut s);
    let alpha = s.atoms_of(phi);
    let red = build_tred(&mut s, phi, &alpha).unwrap();
    let ext = build_text(&mut s, phi, &alpha).unwrap();
    let violation = |r: Result<bool>| matches!(r, Err(Error::ModeViolation { .. }));
    assert!(violation(is_valid(&red)));
    assert!(violation(is_implicant(&red, &[])));
    assert!(violation(is_consistent(&ext)));
    assert!(violation(entails_clause(&ext, &[])));
    assert!(matches!(count_models(&ext), Err(Error::ModeViolation { .. })));
    assert!(matches!(count_models_assume(&ext, &[]), Err(Error::ModeViolation { .. })));
    assert!(enumerate_models(&ext).is_err());
    assert!(matches!(equivalent(&red, &red), Err(Error::Unsupported(_))));
}

#[test]
fn obdd_canonicity() {
    let mut s = FormulaStore::new();
    let p1 = phi1(&mut s);
    let p2 = phi2(&mut s);
    let alpha = s.atoms_of(p1);
    let manager = Arc::new(RwLock::new(ObddManager::with_vars(alpha.len())));
    let a1 = build_obdd_artifact(&mut s, p1, &alpha, Mode::TReduced, Some(manager.clone())).unwrap();
    let a2 = build_obdd_artifact(&mut s, p2, &alpha, Mode::TReduced, Some(manager.clone())).unwrap();
    assert_eq!(a1.obdd().unwrap().root, a2.obdd().unwrap().root);
    assert!(equivalent(&a1, &a2).unwrap());
    assert!(equivalent(&a1, &a1).unwrap());
    assert_eq!(count_models(&a1).unwrap(), big(2));

    let bot = s.bot();
    let ab = build_obdd_artifact(&mut s, bot, &alpha, Mode::TReduced, Some(manager.clone())).unwrap();
    assert_eq!(ab.obdd().unwrap().root, BddId::FALSE);
    assert!(!equivalent(&a1, &ab).unwrap());

    let top = s.top();
    let at = build_obdd_artifact(&mut s, top, &alpha, Mode::TReduced, Some(manager.clone())).unwrap();
    assert!(!sentential_entails(&at, &a1).unwrap());
    assert!(sentential_entails(&a1, &at).unwrap());
    assert!(sentential_entails(&a1, &a1).unwrap());

    let le = s.intern(&atom("x", Cmp::Le, 0)).unwrap();
    let stronger = s.and([p1, le]);
    let ast = build_obdd_artifact(&mut s, stronger, &alpha, Mode::TReduced, Some(manager)).unwrap();
    assert!(sentential_entails(&ast, &a1).unwrap());

    let other = build_obdd_artifact(&mut s, p1, &alpha, Mode::TReduced, None).unwrap();
    assert!(matches!(equivalent(&a1, &other), Err(Error::MixedManagers)));
}
