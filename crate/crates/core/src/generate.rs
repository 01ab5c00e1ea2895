//! Seeded generator of random non-CNF SMT(LRA) instances.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atom::{Atom, AtomSet, Cmp, Rational};
use crate::formula::{FormulaId, FormulaStore};

/// Relative weights of the connectives used for internal nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorMix {
    pub and: u32,
    pub or: u32,
    pub not: u32,
    pub iff: u32,
}

impl Default for OperatorMix {
    fn default() -> Self {
        OperatorMix { and: 4, or: 4, not: 1, iff: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InstanceSpec {
    pub bool_atoms: usize,
    pub lra_atoms: usize,
    /// Real variables shared by the arithmetic atoms.
    pub vars: usize,
    pub depth: usize,
    pub mix: OperatorMix,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec { bool_atoms: 2, lra_atoms: 4, vars: 2, depth: 3, mix: OperatorMix::default(), seed: 0 }
    }
}

#[derive(Clone, Copy)]
enum Op {
    And,
    Or,
    Not,
    Iff,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    store: &'a mut FormulaStore,
    atoms: Vec<Atom>,
    deck: Vec<usize>,
    ops: Vec<(Op, u32)>,
}

impl Gen<'_> {
    fn leaf(&mut self) -> FormulaId {
        if self.deck.is_empty() {
            self.deck = (0..self.atoms.len()).collect();
            self.deck.shuffle(&mut self.rng);
        }
        let i = self.deck.pop().expect("refilled");
        let positive = self.rng.gen_bool(0.5);
        self.store.lit(self.atoms[i].clone(), positive)
    }

    fn op(&mut self) -> Op {
        let total: u32 = self.ops.iter().map(|(_, w)| w).sum();
        if total == 0 {
            return Op::And;
        }
        let mut r = self.rng.gen_range(0..total);
        for &(op, w) in &self.ops {
            if r < w {
                return op;
            }
            r -= w;
        }
        unreachable!("weights sum to total")
    }

    fn tree(&mut self, depth: usize) -> FormulaId {
        if depth == 0 {
            return self.leaf();
        }
        match self.op() {
            Op::Not => {
                let c = self.tree(depth - 1);
                self.store.not(c)
            }
            Op::Iff => {
                let (a, b) = (self.tree(depth - 1), self.tree(depth - 1));
                self.store.iff(a, b)
            }
            op => {
                let k = self.rng.gen_range(2..=3);
                let cs: Vec<FormulaId> = (0..k).map(|_| self.tree(depth - 1)).collect();
                match op {
                    Op::And => self.store.and(cs),
                    _ => self.store.or(cs),
                }
            }
        }
    }

    /// `(l & l') | tree`, the non-CNF block every instance starts with.
    fn or_of_and(&mut self, depth: usize) -> FormulaId {
        let l = self.tree(depth.saturating_sub(1));
        let r = self.tree(depth.saturating_sub(1));
        let and = self.store.and([l, r]);
        let other = self.tree(depth.saturating_sub(1));
        self.store.or([and, other])
    }
}

fn lra_atom(rng: &mut ChaCha8Rng, vars: usize) -> Atom {
    loop {
        let arity = rng.gen_range(1..=vars.min(2));
        let mut names: Vec<usize> = (0..vars).collect();
        names.shuffle(rng);
        let terms: Vec<(String, Rational)> = names[..arity]
            .iter()
            .map(|&v| {
                let mut c = rng.gen_range(-3i64..=2);
                if c >= 0 {
                    c += 1;
                }
                (format!("x{v}"), Rational::from_integer(c.into()))
            })
            .collect();
        let cmp = match rng.gen_range(0..6) {
            0 | 1 => Cmp::Le,
            2 => Cmp::Lt,
            3 => Cmp::Ge,
            4 => Cmp::Gt,
            _ => Cmp::Eq,
        };
        let constant = Rational::from_integer(rng.gen_range(-4i64..=4).into());
        if let Ok((atom, _)) = Atom::linear(terms, cmp, constant) {
            return atom;
        }
    }
}

/// Generates an instance; the same spec always yields the same formula.
/// Every requested atom occurs in the result, which is a conjunction of
/// random blocks and always contains a disjunction of a conjunction. The
/// atom set is in first-occurrence order, as the parser would return it.
pub fn generate(store: &mut FormulaStore, spec: &InstanceSpec) -> (FormulaId, AtomSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut atoms = AtomSet::new();
    for i in 0..spec.bool_atoms {
        atoms.insert(Atom::boolean(format!("b{i}")));
    }
    let vars = spec.vars.max(1);
    let max_distinct = 64 * spec.lra_atoms + 64;
    let mut tries = 0;
    while atoms.len() < spec.bool_atoms + spec.lra_atoms && tries < max_distinct {
        atoms.insert(lra_atom(&mut rng, vars));
        tries += 1;
    }
    if atoms.is_empty() {
        return (FormulaId::TRUE, atoms);
    }
    let mix = &spec.mix;
    let mut g = Gen {
        rng,
        store,
        atoms: atoms.iter().cloned().collect(),
        deck: Vec::new(),
        ops: vec![(Op::And, mix.and), (Op::Or, mix.or), (Op::Not, mix.not), (Op::Iff, mix.iff)],
    };
    let depth = spec.depth.max(1);
    let mut blocks = vec![g.or_of_and(depth)];
    loop {
        let root = g.store.and(blocks.iter().copied());
        let used = g.store.atoms_of(root);
        if used.len() == atoms.len() {
            return (root, used);
        }
        let missing: Vec<Atom> = atoms.iter().filter(|a| !used.contains(a)).cloned().collect();
        if blocks.len() >= 2 && blocks.len() % 4 == 0 {
            // fold the stragglers into one clause
            let lits: Vec<FormulaId> = missing
                .into_iter()
                .map(|a| {
                    let p = g.rng.gen_bool(0.5);
                    g.store.lit(a, p)
                })
                .collect();
            let c = g.store.or(lits);
            blocks.push(c);
        } else {
            let b = g.tree(depth);
            blocks.push(b);
        }
    }
}
