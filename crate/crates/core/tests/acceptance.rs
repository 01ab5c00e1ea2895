use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use dnnfmt::artifact::{refine_root, BuildOptions};
use dnnfmt::bench::sample_clause;
use dnnfmt::ddnnf::{compile, validate, CompileOptions};
use dnnfmt::oracle::allsmt_count;
use dnnfmt::query::{
    count_models, count_models_assume, entails_clause, enumerate_models, equivalent, is_consistent, is_implicant,
    is_valid, sentential_entails,
};
use dnnfmt::*;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = std::result::Result<String, String>;

const CORPUS: usize = 500;
const PAIRS: usize = 1000;
const SCALED: usize = 50;
const CUBES: usize = 10;
const QUERY_BUDGET: Duration = Duration::from_millis(100);
/// Budget of the search-based counter for the same ten cube queries.
const ALLSMT_CAP: Duration = Duration::from_secs(1);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn linear(v: &str, cmp: Cmp, c: i64) -> Expr {
    Expr::Linear(vec![(v.to_string(), q(1))], cmp, q(c))
}

/// The literal over `alpha` that a theory literal abstracts to.
fn abstract_lit(s: &mut FormulaStore, alpha: &AtomSet, e: &Expr) -> std::result::Result<Lit, String> {
    let f = ok(s.intern(e))?;
    match s.node(f).clone() {
        Node::Lit(id, positive) => {
            let var = alpha.var_of(s.atom(id)).ok_or("atom outside the atom set")?;
            Ok(Lit::new(var, positive))
        }
        other => Err(format!("not a literal: {other:?}")),
    }
}

fn bits_of(lits: &[Lit]) -> u64 {
    lits.iter().filter(|l| l.is_positive()).fold(0, |m, l| m | 1 << l.var().index())
}

fn theory_lit(alpha: &AtomSet, l: Lit) -> (Atom, bool) {
    (alpha.atom(l.var()).expect("in range").clone(), l.is_positive())
}

fn random_lit(rng: &mut ChaCha8Rng, n: usize) -> Lit {
    Lit::new(Var::new(rng.gen_range(1..=n as u32)), rng.gen_bool(0.5))
}

/// Random formula over the given atoms.
fn random_over(s: &mut FormulaStore, alpha: &AtomSet, rng: &mut ChaCha8Rng, depth: usize) -> FormulaId {
    if depth == 0 {
        let l = random_lit(rng, alpha.len());
        let (a, p) = theory_lit(alpha, l);
        return s.lit(a, p);
    }
    let k = rng.gen_range(2..=3);
    let cs: Vec<FormulaId> = (0..k).map(|_| random_over(s, alpha, rng, depth - 1)).collect();
    match rng.gen_range(0..5) {
        0 | 1 => s.and(cs),
        2 | 3 => s.or(cs),
        _ => {
            let c = s.and(cs);
            s.not(c)
        }
    }
}

struct Instance {
    store: FormulaStore,
    phi: FormulaId,
    alpha: AtomSet,
}

/// Seeded small instances: at most 10 atoms over at most 5 real variables.
fn corpus() -> Vec<Instance> {
    (0..CORPUS as u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let bool_atoms = rng.gen_range(0..=3);
            let lra_atoms = rng.gen_range(1..=(10 - bool_atoms).min(7));
            let spec = InstanceSpec {
                bool_atoms,
                lra_atoms,
                vars: rng.gen_range(1..=5),
                depth: rng.gen_range(2..=3),
                seed,
                ..InstanceSpec::default()
            };
            let mut store = FormulaStore::new();
            let (phi, alpha) = generate(&mut store, &spec);
            Instance { store, phi, alpha }
        })
        .collect()
}

fn shared_manager(alpha: &AtomSet) -> SharedManager {
    Arc::new(RwLock::new(ObddManager::with_vars(alpha.len())))
}

fn obdd(s: &mut FormulaStore, f: FormulaId, alpha: &AtomSet, mode: Mode, m: &SharedManager) -> std::result::Result<CompiledArtifact, String> {
    ok(build_obdd_artifact(s, f, alpha, mode, Some(m.clone())))
}

fn worked_example() -> Outcome {
    let mut s = FormulaStore::new();
    let phi1 = ok(s.intern(&Expr::Or(vec![linear("x", Cmp::Le, 0), linear("x", Cmp::Eq, 1)])))?;
    let phi2 = ok(s.intern(&Expr::Iff(
        Box::new(Expr::Not(Box::new(linear("x", Cmp::Le, 0)))),
        Box::new(linear("x", Cmp::Eq, 1)),
    )))?;
    let alpha = s.atoms_of(phi1);
    ensure(alpha.len() == 2, || format!("atom set {alpha:?}"))?;
    let le = abstract_lit(&mut s, &alpha, &linear("x", Cmp::Le, 0))?;
    let eq = abstract_lit(&mut s, &alpha, &linear("x", Cmp::Eq, 1))?;

    let mut oracle = ok(Oracle::new(&alpha))?;
    let sets = ok(oracle.sets(&s, phi1))?;
    let ctta: Vec<u64> = sets.ctta.iter().copied().collect();
    let expected_ctta = vec![bits_of(&[eq]), bits_of(&[le])];
    let mut sorted = expected_ctta.clone();
    sorted.sort();
    ensure(ctta == sorted, || format!("CTTA {ctta:?}"))?;
    let itta: Vec<u64> = sets.itta.iter().copied().collect();
    ensure(itta == vec![bits_of(&[le, eq])], || format!("ITTA {itta:?}"))?;
    let neg = ok(oracle.negation_sets(&s, phi1))?;
    ensure(neg.itta.is_empty(), || format!("ITTA of the negation {:?}", neg.itta))?;

    let red = ok(build_tred(&mut s, phi1, &alpha))?;
    let clauses = red.lemmas.clauses();
    let mut want = vec![le.negated(), eq.negated()];
    want.sort();
    ensure(clauses == vec![want.clone()], || format!("lemmas {clauses:?}"))?;
    let ct = ok(count_models(&red))?;
    ensure(ct == BigUint::from(2u32), || format!("count {ct}"))?;
    let me: Vec<Assignment> = ok(enumerate_models(&red))?.collect();
    ensure(me == sets.ctta_assignments(), || format!("models {me:?}"))?;
    let shown: Vec<String> = me.iter().map(|m| m.display_with(&red.map)).collect();
    ensure(shown == ["(<= x 0) & !(= x 1)", "!(<= x 0) & (= x 1)"], || format!("models {shown:?}"))?;

    let m = shared_manager(&alpha);
    let o1 = obdd(&mut s, phi1, &alpha, Mode::TReduced, &m)?;
    let o2 = obdd(&mut s, phi2, &alpha, Mode::TReduced, &m)?;
    ensure(ok(equivalent(&o1, &o2))?, || "EQ(phi1, phi2) is false".into())?;
    Ok("CTTA 2, ITTA {x<=0 & x=1}, 1 lemma, CT 2, EQ true".into())
}

fn split_clauses() -> Outcome {
    let mut s = FormulaStore::new();
    let phi = ok(s.intern(&Expr::And(vec![
        Expr::Or(vec![linear("x1", Cmp::Le, 0), linear("x2", Cmp::Le, 0)]),
        Expr::Or(vec![linear("x1", Cmp::Ge, 1), linear("x2", Cmp::Ge, 1)]),
    ])))?;
    let alpha = s.atoms_of(phi);
    let n = alpha.len();
    let mu1 = vec![
        abstract_lit(&mut s, &alpha, &linear("x1", Cmp::Le, 0))?,
        abstract_lit(&mut s, &alpha, &linear("x2", Cmp::Le, 0))?,
        abstract_lit(&mut s, &alpha, &linear("x1", Cmp::Ge, 1))?,
        abstract_lit(&mut s, &alpha, &Expr::Not(Box::new(linear("x2", Cmp::Ge, 1))))?,
    ];
    ensure(n == 4, || format!("{n} atoms"))?;
    let mu1 = bits_of(&mu1);

    let mut dag: Dag<Var> = Dag::new();
    let p = ok(s.abstract_into(phi, &alpha, &mut dag))?;
    let p = dag.to_nnf(p);
    let naive = ok(compile(&mut dag, p, n, &CompileOptions::default()))?;
    let mut oracle = ok(Oracle::new(&alpha))?;
    let mut audit = |d: &Ddnnf| -> std::result::Result<Vec<u64>, String> {
        let mut bad = Vec::new();
        for b in (0..1u64 << n).filter(|&b| d.eval_bits(b)) {
            if !ok(oracle.consistent(b))? {
                bad.push(b);
            }
        }
        Ok(bad)
    };
    let naive_bad = audit(&naive)?;
    ensure(naive_bad.contains(&mu1), || format!("naive circuit does not admit mu1: {naive_bad:?}"))?;

    let red = ok(build_tred(&mut s, phi, &alpha))?;
    let red_bad = audit(red.ddnnf())?;
    ensure(red_bad.is_empty(), || format!("T-reduced circuit admits {red_bad:?}"))?;
    let ct = ok(count_models(&red))?;
    ensure(ct == BigUint::from(2u32), || format!("count {ct}"))?;
    Ok(format!("naive admits {} inconsistent models incl. mu1, T-reduced admits none, CT 2", naive_bad.len()))
}

/// Formulas over the atoms of `phi` to compare it with.
fn partners(inst: &mut Instance, rng: &mut ChaCha8Rng) -> std::result::Result<Vec<FormulaId>, String> {
    let Instance { store: s, phi, alpha } = inst;
    let (phi, alpha) = (*phi, &*alpha);
    let red = ok(build_tred(s, phi, alpha))?;
    let refined = ok(refine_root(s, &red))?;
    let valid = ok(enumerate_lemmas(s, FormulaId::TRUE, alpha, LemmaTarget::Top, &EnumOptions::default()))?;
    let valid = ok(s.clauses(alpha, &valid.clauses()))?;
    let strengthened = s.and([phi, valid]);
    let not_valid = s.not(valid);
    let weakened = s.or([phi, not_valid]);
    let nnf = s.to_nnf(phi);
    let (a, p) = theory_lit(alpha, random_lit(rng, alpha.len()));
    let l = s.lit(a, p);
    let with_lit = s.and([phi, l]);
    let or_lit = s.or([phi, l]);
    let other = random_over(s, alpha, rng, 2);
    let mixed = s.or([phi, other]);
    Ok(vec![refined, strengthened, weakened, nnf, with_lit, or_lit, other, mixed])
}

fn theorem_suite(corpus: &mut [Instance]) -> Outcome {
    let mut checks = 0usize;
    for (i, inst) in corpus.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let psis = partners(inst, &mut rng)?;
        let Instance { store: s, phi, alpha } = inst;
        let (phi, alpha) = (*phi, &*alpha);
        let n = alpha.len();
        ensure(n <= 10, || format!("instance {i} has {n} atoms"))?;
        let reals: std::collections::BTreeSet<&str> = alpha.iter().flat_map(|a| a.real_vars()).collect();
        ensure(reals.len() <= 5, || format!("instance {i} has {} real variables", reals.len()))?;
        let mut oracle = ok(Oracle::new(alpha))?;
        let red = ok(build_tred(s, phi, alpha))?;
        let ext = ok(build_text(s, phi, alpha))?;
        let mut same = |what: &str, got: String, want: String| {
            checks += 1;
            ensure(got == want, || format!("instance {i} {what}: query {got}, oracle {want}"))
        };

        same("CO", ok(is_consistent(&red))?.to_string(), ok(oracle.co(s, phi))?.to_string())?;
        same("VA", ok(is_valid(&ext))?.to_string(), ok(oracle.va(s, phi))?.to_string())?;
        same("CT", ok(count_models(&red))?.to_string(), ok(oracle.ct(s, phi))?.to_string())?;
        let me: Vec<Assignment> = ok(enumerate_models(&red))?.collect();
        same("ME", format!("{me:?}"), format!("{:?}", ok(oracle.me(s, phi))?))?;
        for _ in 0..3 {
            let c = sample_clause(&mut rng, n);
            same("CE", ok(entails_clause(&red, &c))?.to_string(), ok(oracle.ce(s, phi, &c))?.to_string())?;
            let c = sample_clause(&mut rng, n);
            same("IM", ok(is_implicant(&ext, &c))?.to_string(), ok(oracle.im(s, phi, &c))?.to_string())?;
            let c = sample_clause(&mut rng, n);
            same("CT-assume", ok(count_models_assume(&red, &c))?.to_string(), ok(oracle.ct_assume(s, phi, &c))?.to_string())?;
        }

        let m = shared_manager(alpha);
        let a = obdd(s, phi, alpha, Mode::TReduced, &m)?;
        same("CT on OBDD", ok(count_models(&a))?.to_string(), ok(oracle.ct(s, phi))?.to_string())?;
        let e = obdd(s, phi, alpha, Mode::TExtended, &shared_manager(alpha))?;
        same("VA on OBDD", ok(is_valid(&e))?.to_string(), ok(oracle.va(s, phi))?.to_string())?;
        for psi in psis {
            let b = obdd(s, psi, alpha, Mode::TReduced, &m)?;
            same("EQ", ok(equivalent(&a, &b))?.to_string(), ok(oracle.eq(s, phi, psi))?.to_string())?;
            same("SE", ok(sentential_entails(&a, &b))?.to_string(), ok(oracle.se(s, phi, psi))?.to_string())?;
            same("SE reversed", ok(sentential_entails(&b, &a))?.to_string(), ok(oracle.se(s, psi, phi))?.to_string())?;
        }
    }
    Ok(format!("{} instances, {checks} answers, 0 mismatches", corpus.len()))
}

fn structural(corpus: &mut [Instance]) -> Outcome {
    let mut roots = 0;
    for (i, Instance { store: s, phi, alpha }) in corpus.iter_mut().enumerate() {
        let (phi, n) = (*phi, alpha.len());
        for mode in [Mode::TReduced, Mode::TExtended] {
            for target in [Target::Ddnnf, Target::Obdd] {
                let a = ok(build(s, phi, alpha, mode, &BuildOptions { target, ..BuildOptions::default() }))?;
                let r = validate(a.ddnnf(), None);
                roots += 1;
                ensure(r.decomposable && r.deterministic, || {
                    format!("instance {i} {} {}: {:?}", mode.name(), target.name(), r.violation)
                })?;
                if target == Target::Obdd {
                    continue;
                }
                let plain = a.truth_table();
                let sm = ok(build(s, phi, alpha, mode, &BuildOptions { smooth: true, ..BuildOptions::default() }))?;
                let r = validate(sm.ddnnf(), Some(n));
                ensure(r.decomposable && r.deterministic && r.smooth, || format!("instance {i} smoothed: {:?}", r.violation))?;
                ensure(sm.truth_table() == plain, || format!("instance {i} smoothing changed the model set"))?;
                // count both circuits with the propositional counter
                let as_count = |d: &Ddnnf| {
                    let c = CompiledArtifact::from_parts(
                        Mode::TReduced,
                        a.map.clone(),
                        a.lemmas.clone(),
                        a.scope,
                        Root::Ddnnf(d.clone()),
                        false,
                    );
                    ok(count_models(&c))
                };
                let want = BigUint::from(plain.len());
                let (c1, c2) = (as_count(a.ddnnf())?, as_count(sm.ddnnf())?);
                ensure(c1 == want && c2 == want, || format!("instance {i}: counts {c1} / {c2}, models {want}"))?;
            }
        }
    }
    Ok(format!("{roots} roots decomposable and deterministic, smoothed counts exact"))
}

fn residual_lemmas(corpus: &mut [Instance]) -> Outcome {
    let mut pairs = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    while pairs < PAIRS {
        let inst = &mut corpus[pairs % corpus.len()];
        let Instance { store: s, phi, alpha } = inst;
        let (phi, alpha) = (*phi, &*alpha);
        let l = random_lit(&mut rng, alpha.len());
        let tl = theory_lit(alpha, l);
        let mut oracle = ok(Oracle::new(alpha))?;

        let red = ok(build_tred(s, phi, alpha))?;
        let psi = ok(refine_root(s, &red))?;
        ensure(ok(oracle.check_treduced(s, psi))?, || format!("pair {pairs}: T-reduced input is not"))?;
        let r = s.residual(psi, std::slice::from_ref(&tl));
        let lit = s.lit(tl.0.clone(), tl.1);
        let conj = s.and([r, lit]);
        ensure(ok(oracle.check_treduced(s, conj))?, || format!("pair {pairs}: residual conjoined with the literal is not T-reduced"))?;

        let ext = ok(build_text(s, phi, alpha))?;
        let psi = ok(refine_root(s, &ext))?;
        ensure(ok(oracle.check_textended(s, psi))?, || format!("pair {pairs}: T-extended input is not"))?;
        let r = s.residual(psi, std::slice::from_ref(&tl));
        let nlit = s.not(lit);
        let disj = s.or([nlit, r]);
        ensure(ok(oracle.check_textended(s, disj))?, || format!("pair {pairs}: negated literal or residual is not T-extended"))?;

        let got = ok(is_implicant(&ext, &[l]))?;
        let want = ok(oracle.im(s, phi, &[l]))?;
        ensure(got == want, || format!("pair {pairs}: implicant {got}, oracle {want}"))?;
        pairs += 1;
    }
    Ok(format!("{pairs} (formula, literal) pairs, 0 violations"))
}

fn canonicity(corpus: &mut [Instance]) -> Outcome {
    let (mut equal, mut differ) = (0, 0);
    for (i, inst) in corpus.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64 + 9000);
        let psis = partners(inst, &mut rng)?;
        let Instance { store: s, phi, alpha } = inst;
        let (phi, alpha) = (*phi, &*alpha);
        let mut oracle = ok(Oracle::new(alpha))?;
        let m = shared_manager(alpha);
        let a = obdd(s, phi, alpha, Mode::TReduced, &m)?;
        let ra = a.obdd().expect("OBDD").root;
        for psi in psis {
            let b = obdd(s, psi, alpha, Mode::TReduced, &m)?;
            let same = ra == b.obdd().expect("OBDD").root;
            let certified = ok(oracle.eq(s, phi, psi))?;
            ensure(same == certified, || format!("instance {i}: handles equal {same}, oracle equivalent {certified}"))?;
            if certified {
                equal += 1;
            } else {
                differ += 1;
            }
        }
    }
    ensure(equal >= 100 && differ >= 100, || format!("only {equal} equivalent / {differ} inequivalent pairs"))?;
    Ok(format!("{equal} equivalent pairs share a root, {differ} inequivalent pairs differ"))
}

struct Scaled {
    artifact: CompiledArtifact,
    dag: Dag<Var>,
    root: FormulaId,
    alpha: AtomSet,
}

fn scaled_counting() -> Outcome {
    let built: Vec<std::result::Result<Scaled, String>> = (0..SCALED as u64)
        .into_par_iter()
        .map(|seed| {
            let spec = InstanceSpec { bool_atoms: 2, lra_atoms: 16, vars: 8, depth: 4, seed: 500 + seed, ..InstanceSpec::default() };
            let mut s = FormulaStore::new();
            let (phi, alpha) = generate(&mut s, &spec);
            let artifact = ok(build_tred(&mut s, phi, &alpha))?;
            let mut dag = Dag::new();
            let root = ok(s.abstract_into(phi, &alpha, &mut dag))?;
            Ok(Scaled { artifact, dag, root, alpha })
        })
        .collect();
    let (mut slowest, mut exceeded, mut agreed) = (Duration::ZERO, 0, 0);
    let mut oracle_times = Vec::new();
    for (i, inst) in built.into_iter().enumerate() {
        let Scaled { artifact, mut dag, root, alpha } = inst?;
        ensure((14..=18).contains(&alpha.len()), || format!("instance {i} has {} atoms", alpha.len()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let cubes: Vec<Vec<Lit>> = (0..CUBES).map(|_| sample_clause(&mut rng, alpha.len())).collect();
        let mut answers = Vec::new();
        for c in &cubes {
            let t = Instant::now();
            answers.push(ok(count_models_assume(&artifact, c))?);
            let dt = t.elapsed();
            slowest = slowest.max(dt);
            ensure(dt < QUERY_BUDGET, || format!("instance {i}: cube query took {dt:?}"))?;
        }
        let started = Instant::now();
        let deadline = started + ALLSMT_CAP;
        let mut timed_out = false;
        for (c, want) in cubes.iter().zip(&answers) {
            match allsmt_count(&mut dag, root, &alpha, c, Some(deadline)) {
                Ok(n) => {
                    ensure(&n == want, || format!("instance {i}: compiled count {want}, search count {n}"))?;
                    agreed += 1;
                }
                Err(Error::Timeout(_)) => {
                    timed_out = true;
                    break;
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        oracle_times.push(started.elapsed());
        if timed_out {
            exceeded += 1;
        }
    }
    oracle_times.sort();
    let median = oracle_times[oracle_times.len() / 2];
    let detail = format!(
        "slowest compiled query {slowest:?}; search counter over the {ALLSMT_CAP:?} cap on {exceeded}/{SCALED} (median {median:?}); {agreed} counts cross-checked"
    );
    ensure(2 * exceeded >= SCALED, || detail.clone())?;
    Ok(detail)
}

/// Node-by-node equality of the reachable parts, up to arena positions.
fn same_circuit(a: &Ddnnf, b: &Ddnnf) -> bool {
    let (ra, rb) = (a.reachable(), b.reachable());
    if ra.len() != rb.len() || a.num_vars() != b.num_vars() {
        return false;
    }
    let mut pos = std::collections::HashMap::new();
    for (i, id) in rb.iter().enumerate() {
        pos.insert(*id, i);
    }
    let mut ours = std::collections::HashMap::new();
    for (i, id) in ra.iter().enumerate() {
        ours.insert(*id, i);
    }
    let same_kids = |x: &[NodeId], y: &[NodeId]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| ours[p] == pos[q]);
    ra.iter().zip(&rb).all(|(x, y)| match (a.node(*x), b.node(*y)) {
        (DdnnfNode::And(p), DdnnfNode::And(q)) => same_kids(p, q),
        (DdnnfNode::Or { decision: d, children: p }, DdnnfNode::Or { decision: e, children: q }) => d == e && same_kids(p, q),
        (p, q) => p == q,
    })
}

fn serialization(corpus: &mut [Instance]) -> Outcome {
    let mut artifacts = 0;
    for (i, Instance { store: s, phi, alpha }) in corpus.iter_mut().enumerate() {
        let phi = *phi;
        for mode in [Mode::TReduced, Mode::TExtended] {
            for target in [Target::Ddnnf, Target::Obdd] {
                let m = shared_manager(alpha);
                let options = BuildOptions { target, manager: Some(m.clone()), ..BuildOptions::default() };
                let a = ok(build(s, phi, alpha, mode, &options))?;
                let (nnf, map) = write_artifact(&a);
                let back = ok(read_artifact(&nnf, &map, Some(m)))?;
                let tag = format!("instance {i} {} {}", mode.name(), target.name());
                ensure(write_artifact(&back) == (nnf.clone(), map.clone()), || format!("{tag}: rewrite differs"))?;
                ensure(same_circuit(a.ddnnf(), back.ddnnf()), || format!("{tag}: circuits differ"))?;
                ensure(a.alpha() == back.alpha() && a.lemmas.clauses() == back.lemmas.clauses(), || format!("{tag}: map differs"))?;
                if let (Some(x), Some(y)) = (a.obdd(), back.obdd()) {
                    ensure(x.root == y.root, || format!("{tag}: OBDD root handle differs"))?;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
                let cube = sample_clause(&mut rng, alpha.len());
                let answers = |c: &CompiledArtifact| -> std::result::Result<String, String> {
                    Ok(match mode {
                        Mode::TReduced => format!(
                            "{} {} {} {} {:?}",
                            ok(is_consistent(c))?,
                            ok(count_models(c))?,
                            ok(count_models_assume(c, &cube))?,
                            ok(entails_clause(c, &cube))?,
                            ok(enumerate_models(c))?.collect::<Vec<_>>()
                        ),
                        Mode::TExtended => format!("{} {}", ok(is_valid(c))?, ok(is_implicant(c, &cube))?),
                    })
                };
                ensure(answers(&a)? == answers(&back)?, || format!("{tag}: answers differ"))?;
                artifacts += 1;
            }
        }
    }
    Ok(format!("{artifacts} artifacts round-tripped with equal structure and answers"))
}

/// Runs one criterion and prints its line; `limit` is a wall-clock bound.
fn run(n: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome) -> bool {
    let started = Instant::now();
    let mut outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let took = started.elapsed();
    if let (Ok(_), Some(limit)) = (&outcome, limit) {
        if took >= limit {
            outcome = Err(format!("took longer than {limit:?}"));
        }
    }
    let secs = took.as_secs_f64();
    match &outcome {
        Ok(detail) => println!("criterion {n} {name}: PASS ({secs:.2}s) {detail}"),
        Err(why) => println!("criterion {n} {name}: FAIL ({secs:.2}s) {why}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut corpus = corpus();
    let second = Some(Duration::from_secs(1));
    let results = [
        run(1, "worked-example", second, &mut worked_example),
        run(2, "naive-compile-regression", second, &mut split_clauses),
        run(3, "oracle-equivalence", None, &mut || theorem_suite(&mut corpus)),
        run(4, "structural-invariants", None, &mut || structural(&mut corpus)),
        run(5, "residual-lemmas", None, &mut || residual_lemmas(&mut corpus)),
        run(6, "canonicity", None, &mut || canonicity(&mut corpus)),
        run(7, "scaled-counting", None, &mut scaled_counting),
        run(8, "serialization", None, &mut || serialization(&mut corpus)),
    ];
    if results.iter().all(|&r| r) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
