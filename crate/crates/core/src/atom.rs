//! Theory atoms, atom sets and the Boolean abstraction map.
//!
//! Arithmetic atoms are kept in a canonical form so that syntactically
//! different spellings of the same constraint (`x >= 1`, `-x <= -1`,
//! `2x >= 2`) end up as the same atom and therefore the same Boolean
//! variable:
//!
//! * coefficients are coprime integers, variables sorted by name, the first
//!   coefficient positive;
//! * the relation is one of `<=`, `<`, `=`; a `>=`/`>` constraint is stored as
//!   the negation of the complementary `<`/`<=` atom.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lit::{Lit, Var};

pub type Rational = BigRational;

/// Relation of a normalized arithmetic atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        }
    }
}

/// Comparison as written in the input, before normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    fn mirrored(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Ge,
            Cmp::Lt => Cmp::Gt,
            Cmp::Eq => Cmp::Eq,
            Cmp::Ge => Cmp::Le,
            Cmp::Gt => Cmp::Lt,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

/// `sum(coeffs[i].1 * coeffs[i].0) relation constant`, normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    coeffs: Vec<(String, BigInt)>,
    relation: Relation,
    constant: Rational,
}

impl LinearAtom {
    pub fn coeffs(&self) -> &[(String, BigInt)] {
        &self.coeffs
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    /// Value of the linear term at `model`; unassigned variables read as 0.
    pub fn term_value(&self, model: &BTreeMap<String, Rational>) -> Rational {
        let mut acc = Rational::zero();
        for (v, c) in &self.coeffs {
            if let Some(x) = model.get(v) {
                acc += Rational::from_integer(c.clone()) * x;
            }
        }
        acc
    }

    pub fn eval(&self, model: &BTreeMap<String, Rational>) -> bool {
        let t = self.term_value(model);
        match self.relation {
            Relation::Le => t <= self.constant,
            Relation::Lt => t < self.constant,
            Relation::Eq => t == self.constant,
        }
    }
}

/// A theory atom: a Boolean proposition or a linear arithmetic constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Bool(String),
    Lra(LinearAtom),
}

impl Atom {
    pub fn boolean(name: impl Into<String>) -> Atom {
        Atom::Bool(name.into())
    }

    /// Builds the literal `terms cmp constant`, returning the canonical atom
    /// and the polarity under which it expresses the constraint.
    pub fn linear<S, I>(terms: I, cmp: Cmp, constant: Rational) -> Result<(Atom, bool)>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Rational)>,
    {
        let mut acc: BTreeMap<String, Rational> = BTreeMap::new();
        for (v, c) in terms {
            *acc.entry(v.into()).or_insert_with(Rational::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        if acc.is_empty() {
            let zero = Rational::zero();
            let verdict = if cmp.holds(&zero, &constant) { "T-valid" } else { "T-inconsistent" };
            return Err(Error::DegenerateAtom(format!(
                "0 {} {} ({verdict})",
                cmp_symbol(cmp),
                fmt_rational(&constant)
            )));
        }

        let lcm = acc
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let scaled: Vec<(String, BigInt)> = acc
            .into_iter()
            .map(|(v, c)| (v, (c * Rational::from_integer(lcm.clone())).to_integer()))
            .collect();
        let gcd = scaled
            .iter()
            .fold(BigInt::zero(), |g, (_, c)| g.gcd(c));
        let mut factor = Rational::new(lcm, gcd.clone());
        let mut coeffs: Vec<(String, BigInt)> =
            scaled.into_iter().map(|(v, c)| (v, c / &gcd)).collect();
        let mut cmp = cmp;
        if coeffs[0].1.is_negative() {
            for (_, c) in coeffs.iter_mut() {
                *c = -c.clone();
            }
            factor = -factor;
            cmp = cmp.mirrored();
        }
        let constant = constant * factor;
        let (relation, positive) = match cmp {
            Cmp::Le => (Relation::Le, true),
            Cmp::Lt => (Relation::Lt, true),
            Cmp::Eq => (Relation::Eq, true),
            Cmp::Ge => (Relation::Lt, false),
            Cmp::Gt => (Relation::Le, false),
        };
        Ok((
            Atom::Lra(LinearAtom {
                coeffs,
                relation,
                constant,
            }),
            positive,
        ))
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self, Atom::Bool(_))
    }

    pub fn as_linear(&self) -> Option<&LinearAtom> {
        match self {
            Atom::Lra(l) => Some(l),
            Atom::Bool(_) => None,
        }
    }

    /// Real variables mentioned by the atom (empty for Boolean atoms).
    pub fn real_vars(&self) -> impl Iterator<Item = &str> {
        self.as_linear()
            .into_iter()
            .flat_map(|l| l.coeffs.iter().map(|(v, _)| v.as_str()))
    }
}

fn cmp_symbol(cmp: Cmp) -> &'static str {
    match cmp {
        Cmp::Le => "<=",
        Cmp::Lt => "<",
        Cmp::Eq => "=",
        Cmp::Ge => ">=",
        Cmp::Gt => ">",
    }
}

/// SMT-LIB rendering of a rational constant.
pub fn fmt_rational(q: &Rational) -> String {
    let mag = |q: &Rational| {
        if q.is_integer() {
            q.numer().to_string()
        } else {
            format!("(/ {} {})", q.numer(), q.denom())
        }
    };
    if q.is_negative() {
        format!("(- {})", mag(&-q.clone()))
    } else {
        mag(q)
    }
}

/// SMT-LIB spelling of a name: bare when it is a simple symbol, otherwise
/// wrapped in `|...|`.
pub fn fmt_symbol(name: &str) -> std::borrow::Cow<'_, str> {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.into()
    } else {
        format!("|{name}|").into()
    }
}

fn fmt_coeff_var(c: &BigInt, v: &str) -> String {
    let v = fmt_symbol(v);
    if c.is_one() {
        v.into_owned()
    } else if *c == -BigInt::one() {
        format!("(- {v})")
    } else {
        format!("(* {} {v})", fmt_rational(&Rational::from_integer(c.clone())))
    }
}

impl fmt::Display for Atom {
    /// The printed normal form doubles as the atom's external name (map
    /// files, CLI literals), and parses back to the same atom.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Bool(name) => write!(f, "{}", fmt_symbol(name)),
            Atom::Lra(l) => {
                let term = if l.coeffs.len() == 1 {
                    fmt_coeff_var(&l.coeffs[0].1, &l.coeffs[0].0)
                } else {
                    let parts: Vec<String> =
                        l.coeffs.iter().map(|(v, c)| fmt_coeff_var(c, v)).collect();
                    format!("(+ {})", parts.join(" "))
                };
                write!(
                    f,
                    "({} {} {})",
                    l.relation.symbol(),
                    term,
                    fmt_rational(&l.constant)
                )
            }
        }
    }
}

/// Ordered, duplicate-free set of atoms. Position `i` is Boolean variable
/// `i + 1` under abstraction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AtomSet {
    atoms: IndexSet<Atom>,
}

impl AtomSet {
    pub fn new() -> AtomSet {
        AtomSet::default()
    }

    /// Rejects duplicates.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Result<AtomSet> {
        let mut set = AtomSet::new();
        for a in atoms {
            let shown = a.to_string();
            if !set.insert(a) {
                return Err(Error::Invalid(format!("duplicate atom `{shown}` in atom set")));
            }
        }
        Ok(set)
    }

    /// Appends `atom` unless present; returns whether it was new.
    pub fn insert(&mut self, atom: Atom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    /// 1-based variable of `atom`.
    pub fn var_of(&self, atom: &Atom) -> Option<Var> {
        self.atoms.get_index_of(atom).map(|i| Var::new(i as u32 + 1))
    }

    pub fn atom(&self, var: Var) -> Option<&Atom> {
        self.atoms.get_index(var.index())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.atoms.len() as u32).map(Var::new)
    }

    /// Looks an atom up by its printed normal form.
    pub fn find_by_name(&self, name: &str) -> Option<Var> {
        self.atoms
            .iter()
            .position(|a| a.to_string() == name)
            .map(|i| Var::new(i as u32 + 1))
    }

    pub fn is_superset_of<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> bool {
        atoms.into_iter().all(|a| self.contains(a))
    }
}

/// Bijection atom <-> propositional variable (1-based, dense), fixed by the
/// order of an [`AtomSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractionMap {
    alpha: AtomSet,
}

impl AbstractionMap {
    pub fn new(alpha: AtomSet) -> AbstractionMap {
        AbstractionMap { alpha }
    }

    pub fn alpha(&self) -> &AtomSet {
        &self.alpha
    }

    pub fn num_vars(&self) -> usize {
        self.alpha.len()
    }

    pub fn var_of(&self, atom: &Atom) -> Result<Var> {
        self.alpha
            .var_of(atom)
            .ok_or_else(|| Error::AtomNotInAlpha(atom.to_string()))
    }

    pub fn atom_of(&self, var: Var) -> Result<&Atom> {
        self.alpha
            .atom(var)
            .ok_or(Error::UnmappedVariable(var.get()))
    }

    /// Parses a literal in CLI syntax: the atom's printed form, optionally
    /// prefixed by `!` for negation.
    pub fn parse_lit(&self, text: &str) -> Result<Lit> {
        let text = text.trim();
        let (positive, name) = match text.strip_prefix('!') {
            Some(rest) => (false, rest.trim()),
            None => (true, text),
        };
        let var = self
            .alpha
            .find_by_name(name)
            .ok_or_else(|| Error::AtomNotInAlpha(name.to_string()))?;
        Ok(Lit::new(var, positive))
    }

    pub fn lit_name(&self, lit: Lit) -> Result<String> {
        let atom = self.atom_of(lit.var())?;
        Ok(if lit.is_positive() {
            atom.to_string()
        } else {
            format!("!{atom}")
        })
    }
}

/// Truth assignment over an atom set: `values[i]` is the value of variable
/// `i + 1`, `None` when unassigned.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn empty(num_vars: usize) -> Assignment {
        Assignment {
            values: vec![None; num_vars],
        }
    }

    pub fn from_lits(num_vars: usize, lits: impl IntoIterator<Item = Lit>) -> Result<Assignment> {
        let mut a = Assignment::empty(num_vars);
        for l in lits {
            let slot = a
                .values
                .get_mut(l.var().index())
                .ok_or(Error::UnmappedVariable(l.var().get()))?;
            match slot {
                Some(v) if *v != l.is_positive() => {
                    return Err(Error::Invalid(format!(
                        "contradictory literals on variable {}",
                        l.var()
                    )))
                }
                _ => *slot = Some(l.is_positive()),
            }
        }
        Ok(a)
    }

    /// Total assignment from a bitmask (bit `i` = variable `i + 1`).
    pub fn from_bits(num_vars: usize, bits: u64) -> Assignment {
        Assignment {
            values: (0..num_vars).map(|i| Some(bits >> i & 1 == 1)).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, var: Var) -> Option<bool> {
        self.values.get(var.index()).copied().flatten()
    }

    pub fn set(&mut self, var: Var, value: Option<bool>) {
        self.values[var.index()] = value;
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| Lit::new(Var::new(i as u32 + 1), b)))
    }

    pub fn to_bits(&self) -> Option<u64> {
        let mut bits = 0u64;
        for (i, v) in self.values.iter().enumerate() {
            if (*v)? {
                bits |= 1 << i;
            }
        }
        Some(bits)
    }

    /// Renders as a cube of printed atoms, e.g. `(<= x 0) & !(= x 1)`.
    pub fn display_with(&self, map: &AbstractionMap) -> String {
        self.lits()
            .map(|l| map.lit_name(l).unwrap_or_else(|_| l.to_string()))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}
