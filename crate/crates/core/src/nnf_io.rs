//! Artifact files: the circuit in NNF text format, a JSON map sidecar and a
//! DIMACS-like lemma dump.
//!
//! NNF file:
//!
//! ```text
//! c map-hash <sha256 of the atom list>
//! nnf <nodes> <edges> <vars>
//! L <signed var>
//! A <k> <ids...>
//! O <decision var or 0> <k> <ids...>
//! ```
//!
//! Ids are 0-based line numbers among node lines and only refer backwards;
//! the last node is the root. `A 0` is true and `O 0 0` is false.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::artifact::{CompiledArtifact, Mode, Root, Target};
use crate::atom::{AbstractionMap, AtomSet};
use crate::ddnnf::{Ddnnf, DdnnfNode, NodeId};
use crate::error::{Error, Result};
use crate::lemma::{LemmaScope, LemmaSet, LemmaTarget, TLemma};
use crate::lit::{Lit, Var};
use crate::obdd::{BddId, Obdd, ObddManager, SharedManager};
use crate::smt2::parse_atom;

/// Contents of the map sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapFile {
    /// Atoms in variable order, in printed normal form.
    pub atoms: Vec<String>,
    pub mode: String,
    pub target: String,
    pub smooth: bool,
    pub scope: String,
    #[serde(rename = "lemmaTarget")]
    pub lemma_target: String,
    /// OBDD variable order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u32>>,
    /// Lemma clauses as signed variables.
    pub lemmas: Vec<Vec<i64>>,
}

impl MapFile {
    pub fn of(a: &CompiledArtifact) -> MapFile {
        let order = a.obdd().map(|o| {
            let m = o.manager.read().expect("manager lock");
            m.order().iter().map(|v| v.get()).collect()
        });
        MapFile {
            atoms: a.alpha().iter().map(|x| x.to_string()).collect(),
            mode: a.mode.name().into(),
            target: a.target().name().into(),
            smooth: a.smooth,
            scope: a.scope.name().into(),
            lemma_target: a.lemmas.target.name().into(),
            order,
            lemmas: a
                .lemmas
                .lemmas
                .iter()
                .map(|l| l.literals().iter().map(|x| x.to_dimacs()).collect())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<MapFile> {
        serde_json::from_str(text).map_err(|e| Error::Format { line: e.line(), msg: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn alpha(&self) -> Result<AtomSet> {
        let atoms = self
            .atoms
            .iter()
            .map(|t| parse_atom(t))
            .collect::<Result<Vec<_>>>()?;
        AtomSet::from_atoms(atoms)
    }

    pub fn hash(&self) -> String {
        atoms_hash(self.atoms.iter().map(String::as_str))
    }
}

fn atoms_hash<'a>(atoms: impl Iterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for a in atoms {
        h.update(a.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Hash of an atom set as stored in NNF headers.
pub fn map_hash(alpha: &AtomSet) -> String {
    let names: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
    atoms_hash(names.iter().map(String::as_str))
}

/// Serializes the reachable part of a circuit.
pub fn write_nnf(d: &Ddnnf, hash: Option<&str>) -> String {
    let order = d.reachable();
    let mut id = vec![usize::MAX; d.len()];
    for (i, n) in order.iter().enumerate() {
        id[n.index()] = i;
    }
    let (nodes, edges) = d.size();
    let mut s = String::new();
    if let Some(h) = hash {
        let _ = writeln!(s, "c map-hash {h}");
    }
    let _ = writeln!(s, "nnf {nodes} {edges} {}", d.num_vars());
    let ids = |cs: &[NodeId]| cs.iter().map(|c| id[c.index()].to_string()).collect::<Vec<_>>().join(" ");
    for n in order {
        let _ = match d.node(n) {
            DdnnfNode::True => writeln!(s, "A 0"),
            DdnnfNode::False => writeln!(s, "O 0 0"),
            DdnnfNode::Lit(l) => writeln!(s, "L {}", l.to_dimacs()),
            DdnnfNode::And(cs) => writeln!(s, "A {} {}", cs.len(), ids(cs)).map(|_| trim_end(&mut s)),
            DdnnfNode::Or { decision, children } => {
                let v = decision.map_or(0, |v| v.get());
                writeln!(s, "O {v} {} {}", children.len(), ids(children)).map(|_| trim_end(&mut s))
            }
        };
    }
    s
}

/// Drops the trailing space left by an empty id list.
fn trim_end(s: &mut String) {
    if s.ends_with(" \n") {
        s.truncate(s.len() - 2);
        s.push('\n');
    }
}

/// Parsed NNF file.
#[derive(Clone, Debug)]
pub struct NnfFile {
    pub hash: Option<String>,
    pub circuit: Ddnnf,
}

fn int<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Format { line, msg: format!("expected {what}") })
}

pub fn read_nnf(text: &str) -> Result<NnfFile> {
    let mut hash = None;
    let mut header: Option<(usize, usize, usize)> = None;
    let mut circuit = Ddnnf::new(0);
    let mut ids: Vec<NodeId> = Vec::new();
    let mut edges = 0;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let mut toks = raw.split_whitespace();
        let Some(kind) = toks.next() else { continue };
        let fail = |msg: String| Error::Format { line, msg };
        if kind == "c" {
            if toks.next() == Some("map-hash") {
                hash = toks.next().map(str::to_string);
            }
            continue;
        }
        let Some((_, _, vars)) = header else {
            if kind != "nnf" {
                return Err(fail("expected `nnf` header".into()));
            }
            let h = (int(toks.next(), line, "node count")?, int(toks.next(), line, "edge count")?, int(toks.next(), line, "variable count")?);
            circuit = Ddnnf::new(h.2);
            header = Some(h);
            continue;
        };
        let children = |toks: &mut std::str::SplitWhitespace<'_>, ids: &[NodeId]| -> Result<Vec<NodeId>> {
            let k: usize = int(toks.next(), line, "child count")?;
            let mut cs = Vec::with_capacity(k);
            for _ in 0..k {
                let c: usize = int(toks.next(), line, "child id")?;
                let &id = ids.get(c).ok_or_else(|| Error::Format { line, msg: format!("child {c} is not an earlier node") })?;
                cs.push(id);
            }
            Ok(cs)
        };
        let node = match kind {
            "L" => {
                let x: i64 = int(toks.next(), line, "literal")?;
                let l = Lit::from_dimacs(x).ok_or_else(|| fail("literal 0".into()))?;
                if l.var().index() >= vars {
                    return Err(fail(format!("variable {} exceeds header count {vars}", l.var().get())));
                }
                DdnnfNode::Lit(l)
            }
            "A" => {
                let cs = children(&mut toks, &ids)?;
                edges += cs.len();
                if cs.is_empty() {
                    DdnnfNode::True
                } else {
                    DdnnfNode::And(cs.into_boxed_slice())
                }
            }
            "O" => {
                let v: u32 = int(toks.next(), line, "decision variable")?;
                if v as usize > vars {
                    return Err(fail(format!("variable {v} exceeds header count {vars}")));
                }
                let cs = children(&mut toks, &ids)?;
                edges += cs.len();
                if cs.is_empty() {
                    DdnnfNode::False
                } else {
                    DdnnfNode::Or { decision: (v > 0).then(|| Var::new(v)), children: cs.into_boxed_slice() }
                }
            }
            other => return Err(fail(format!("unknown node kind `{other}`"))),
        };
        if toks.next().is_some() {
            return Err(fail("trailing tokens".into()));
        }
        ids.push(circuit.raw(node));
    }
    let Some((nodes, e, _)) = header else {
        return Err(Error::Format { line: last_line.max(1), msg: "missing `nnf` header".into() });
    };
    let Some(&root) = ids.last() else {
        return Err(Error::Format { line: last_line, msg: "no nodes".into() });
    };
    if ids.len() != nodes || edges != e {
        return Err(Error::Format {
            line: last_line,
            msg: format!("header announces {nodes} nodes and {e} edges, found {} and {edges}", ids.len()),
        });
    }
    circuit.set_root(root);
    Ok(NnfFile { hash, circuit })
}

/// NNF text and map sidecar of an artifact.
pub fn write_artifact(a: &CompiledArtifact) -> (String, String) {
    let map = MapFile::of(a);
    (write_nnf(a.ddnnf(), Some(&map.hash())), map.to_json())
}

/// Rebuilds an artifact. OBDD artifacts are built into `manager` when
/// given (its order must match the stored one), else into a fresh manager.
pub fn read_artifact(nnf: &str, map: &str, manager: Option<SharedManager>) -> Result<CompiledArtifact> {
    let map = MapFile::parse(map)?;
    let file = read_nnf(nnf)?;
    if let Some(h) = &file.hash {
        if *h != map.hash() {
            return Err(Error::Format { line: 1, msg: "map hash does not match the map file".into() });
        }
    }
    let alpha = map.alpha()?;
    if file.circuit.num_vars() != alpha.len() {
        return Err(Error::Format {
            line: 1,
            msg: format!("circuit has {} variables, map has {} atoms", file.circuit.num_vars(), alpha.len()),
        });
    }
    let bad = |what: &str, v: &str| Error::Invalid(format!("unknown {what} `{v}` in map file"));
    let mode = Mode::from_name(&map.mode).ok_or_else(|| bad("mode", &map.mode))?;
    let target = Target::from_name(&map.target).ok_or_else(|| bad("target", &map.target))?;
    let scope = LemmaScope::from_name(&map.scope).ok_or_else(|| bad("scope", &map.scope))?;
    let lemma_target = LemmaTarget::from_name(&map.lemma_target).ok_or_else(|| bad("lemma target", &map.lemma_target))?;
    let lemmas = map
        .lemmas
        .iter()
        .map(|c| {
            let lits = c
                .iter()
                .map(|&x| Lit::from_dimacs(x).filter(|l| l.var().index() < alpha.len()).ok_or(Error::UnmappedVariable(x.unsigned_abs() as u32)))
                .collect::<Result<Vec<_>>>()?;
            TLemma::new(lits)
        })
        .collect::<Result<Vec<_>>>()?;
    let lemmas = LemmaSet::new(lemmas, lemma_target, alpha.clone());
    let root = match target {
        Target::Ddnnf => Root::Ddnnf(file.circuit),
        Target::Obdd => {
            let order: Vec<Var> = match &map.order {
                Some(o) => o.iter().map(|&v| Var::new(v)).collect(),
                None => alpha.vars().collect(),
            };
            let manager = match manager {
                Some(m) => {
                    if m.read().expect("manager lock").order() != order.as_slice() {
                        return Err(Error::MixedManagers);
                    }
                    m
                }
                None => Arc::new(RwLock::new(ObddManager::new(order)?)),
            };
            let r = obdd_of(&mut manager.write().expect("manager lock"), &file.circuit)?;
            Root::Obdd(Obdd::new(manager, r))
        }
    };
    Ok(CompiledArtifact::from_parts(mode, AbstractionMap::new(alpha), lemmas, scope, root, map.smooth))
}

fn obdd_of(m: &mut ObddManager, d: &Ddnnf) -> Result<BddId> {
    let mut map = vec![BddId::FALSE; d.len()];
    for id in d.reachable() {
        map[id.index()] = match d.node(id) {
            DdnnfNode::True => BddId::TRUE,
            DdnnfNode::False => BddId::FALSE,
            DdnnfNode::Lit(l) => m.literal(l.var(), l.is_positive())?,
            DdnnfNode::And(cs) => cs.iter().fold(BddId::TRUE, |acc, c| m.and(acc, map[c.index()])),
            DdnnfNode::Or { children, .. } => children.iter().fold(BddId::FALSE, |acc, c| m.or(acc, map[c.index()])),
        };
    }
    Ok(map[d.root().index()])
}

pub fn save_artifact(a: &CompiledArtifact, nnf_path: &Path, map_path: &Path) -> Result<()> {
    let (nnf, map) = write_artifact(a);
    std::fs::write(nnf_path, nnf)?;
    std::fs::write(map_path, map)?;
    Ok(())
}

pub fn load_artifact(nnf_path: &Path, map_path: &Path, manager: Option<SharedManager>) -> Result<CompiledArtifact> {
    let nnf = std::fs::read_to_string(nnf_path)?;
    let map = std::fs::read_to_string(map_path)?;
    read_artifact(&nnf, &map, manager)
}

/// DIMACS-like lemma dump: one clause per line over the map's variables.
pub fn write_lemmas(lemmas: &LemmaSet, map_name: &str) -> String {
    let mut s = format!("c map {map_name}\np cnf {} {}\n", lemmas.alpha.len(), lemmas.len());
    for l in &lemmas.lemmas {
        for x in l.literals() {
            let _ = write!(s, "{} ", x.to_dimacs());
        }
        s.push_str("0\n");
    }
    s
}

/// Reads a lemma dump back, checking variables against `num_vars`.
pub fn read_lemmas(text: &str, num_vars: usize) -> Result<Vec<TLemma>> {
    let mut out = Vec::new();
    let mut declared = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('c') {
            continue;
        }
        if let Some(rest) = raw.strip_prefix("p cnf") {
            let mut t = rest.split_whitespace();
            let vars: usize = int(t.next(), line, "variable count")?;
            let clauses: usize = int(t.next(), line, "clause count")?;
            if vars != num_vars {
                return Err(Error::Format { line, msg: format!("lemma file has {vars} variables, map has {num_vars}") });
            }
            declared = Some(clauses);
            continue;
        }
        let mut lits = Vec::new();
        for tok in raw.split_whitespace() {
            let x: i64 = int(Some(tok), line, "literal")?;
            if x == 0 {
                break;
            }
            if x.unsigned_abs() as usize > num_vars {
                return Err(Error::Format { line, msg: format!("variable {} out of range", x.abs()) });
            }
            lits.push(Lit::from_dimacs(x).expect("non-zero"));
        }
        out.push(TLemma::new(lits).map_err(|e| Error::Format { line, msg: e.to_string() })?);
    }
    if declared.is_some_and(|n| n != out.len()) {
        return Err(Error::Format { line: text.lines().count(), msg: "clause count differs from header".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::{build, build_tred, BuildOptions};
    use crate::formula::{Expr, FormulaStore};
    use crate::query::{count_models, is_consistent};
    use crate::smt2::parse_smt2;

    fn phi1() -> (FormulaStore, crate::formula::FormulaId, AtomSet) {
        let mut s = FormulaStore::new();
        let (f, a) = parse_smt2(&mut s, "(declare-fun x () Real)(assert (or (<= x 0) (= x 1)))").unwrap();
        (s, f, a)
    }

    #[test]
    fn reduced_round_trip_keeps_count() {
        let (mut s, f, alpha) = phi1();
        let a = build_tred(&mut s, f, &alpha).unwrap();
        let (nnf, map) = write_artifact(&a);
        assert!(nnf.starts_with("c map-hash "));
        let b = read_artifact(&nnf, &map, None).unwrap();
        assert_eq!(count_models(&b).unwrap(), 2u32.into());
        assert_eq!(write_artifact(&b), (nnf, map));
        assert_eq!(b.lemmas, a.lemmas);
    }

    #[test]
    fn obdd_round_trip_is_canonical() {
        let (mut s, f, alpha) = phi1();
        let opts = BuildOptions { target: Target::Obdd, ..BuildOptions::default() };
        let a = build(&mut s, f, &alpha, Mode::TReduced, &opts).unwrap();
        let (nnf, map) = write_artifact(&a);
        let m = a.obdd().unwrap().manager.clone();
        let b = read_artifact(&nnf, &map, Some(m)).unwrap();
        assert_eq!(b.obdd().unwrap().root, a.obdd().unwrap().root);
    }

    #[test]
    fn constants() {
        let (mut s, _, alpha) = phi1();
        let top = s.top();
        let a = build(&mut s, top, &alpha, Mode::TExtended, &BuildOptions::default()).unwrap();
        let (nnf, _) = write_artifact(&a);
        assert_eq!(nnf.lines().skip(1).collect::<Vec<_>>(), ["nnf 1 0 2", "A 0"]);
        let bot = s.bot();
        let b = build_tred(&mut s, bot, &alpha).unwrap();
        let (nnf, map) = write_artifact(&b);
        assert!(nnf.ends_with("nnf 1 0 2\nO 0 0\n"));
        assert!(!is_consistent(&read_artifact(&nnf, &map, None).unwrap()).unwrap());
    }

    #[test]
    fn hand_written_literal() {
        let f = read_nnf("c a single literal\nnnf 1 0 1\nL 1\n").unwrap();
        assert_eq!(f.circuit.node(f.circuit.root()), &DdnnfNode::Lit(Lit::pos(1)));
        assert!(f.hash.is_none());
        let mut s = FormulaStore::new();
        let b = s.intern(&Expr::Bool("b".into())).unwrap();
        let alpha = s.atoms_of(b);
        let a = build_tred(&mut s, b, &alpha).unwrap();
        let (_, map) = write_artifact(&a);
        let a = read_artifact("nnf 1 0 1\nL 1\n", &map, None).unwrap();
        assert_eq!(count_models(&a).unwrap(), 1u32.into());
    }

    #[test]
    fn malformed_files() {
        let line = |t: &str| match read_nnf(t) {
            Err(Error::Format { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("L 1\n"), 1);
        assert_eq!(line("nnf 2 1 1\nL 1\nA 1 5\n"), 3);
        assert_eq!(line("nnf 1 0 1\nL 2\n"), 2);
        assert_eq!(line("nnf 1 0 1\nX 2\n"), 2);
        assert_eq!(line("nnf 3 0 1\nL 1\n"), 2);

        let (mut s, f, alpha) = phi1();
        let a = build_tred(&mut s, f, &alpha).unwrap();
        let (nnf, map) = write_artifact(&a);
        let no_hash: String = nnf.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let other = map.replace("(= x 1)", "(= x 2)");
        assert!(matches!(read_artifact(&nnf, &other, None), Err(Error::Format { line: 1, .. })));
        let fewer = map.replace(",\n    \"(= x 1)\"", "");
        assert!(read_artifact(&no_hash, &fewer, None).is_err());
    }

    #[test]
    fn lemma_dump_round_trip() {
        let (mut s, f, alpha) = phi1();
        let a = build_tred(&mut s, f, &alpha).unwrap();
        let text = write_lemmas(&a.lemmas, "phi1.map");
        assert_eq!(text, "c map phi1.map\np cnf 2 1\n-1 -2 0\n");
        assert_eq!(read_lemmas(&text, 2).unwrap(), a.lemmas.lemmas);
        assert!(read_lemmas(&text, 3).is_err());
        assert!(read_lemmas("p cnf 2 1\n1 -1 0\n", 2).is_err());
    }
}
