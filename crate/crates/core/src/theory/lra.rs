//! Exact-rational general simplex for conjunctions of linear constraints.
//!
//! Follows the bound-propagating tableau of DPLL(T)-style arithmetic
//! solvers: every non-trivial linear term gets a slack variable defined by a
//! tableau row, literals only tighten variable bounds, and `check` restores
//! feasibility by Bland-rule pivoting. Strict bounds live in the ordered
//! field Q(δ) of values `c + kδ` with δ a positive infinitesimal, so no
//! epsilon is ever guessed. An infeasible row yields a conflict made of the
//! literals that produced the bounds it mentions.
//!
//! Disequalities `t != c` are not bounds; when the feasible assignment hits
//! `t = c` exactly the solver splits into `t < c` and `t > c`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Signed, Zero};

use super::{canonical, TheorySolver, TheoryVerdict};
use crate::atom::{AtomSet, Rational, Relation};
use crate::error::{Error, Result};
use crate::lit::Lit;

/// `real + inf * δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct DeltaRat {
    real: Rational,
    inf: Rational,
}

impl DeltaRat {
    fn zero() -> DeltaRat {
        DeltaRat::new(Rational::zero(), Rational::zero())
    }

    fn new(real: Rational, inf: Rational) -> DeltaRat {
        DeltaRat { real, inf }
    }

    fn constant(real: Rational) -> DeltaRat {
        DeltaRat::new(real, Rational::zero())
    }

    fn scale(&self, k: &Rational) -> DeltaRat {
        DeltaRat::new(&self.real * k, &self.inf * k)
    }

    fn at(&self, delta: &Rational) -> Rational {
        &self.real + &self.inf * delta
    }
}

impl PartialOrd for DeltaRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeltaRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.real
            .cmp(&other.real)
            .then_with(|| self.inf.cmp(&other.inf))
    }
}

impl Add for &DeltaRat {
    type Output = DeltaRat;
    fn add(self, o: &DeltaRat) -> DeltaRat {
        DeltaRat::new(&self.real + &o.real, &self.inf + &o.inf)
    }
}

impl Sub for &DeltaRat {
    type Output = DeltaRat;
    fn sub(self, o: &DeltaRat) -> DeltaRat {
        DeltaRat::new(&self.real - &o.real, &self.inf - &o.inf)
    }
}

impl Mul<&Rational> for &DeltaRat {
    type Output = DeltaRat;
    fn mul(self, k: &Rational) -> DeltaRat {
        self.scale(k)
    }
}

#[derive(Clone, Debug)]
struct Bound {
    value: DeltaRat,
    reason: Lit,
}

/// How an atom of the atom set constrains the tableau.
#[derive(Clone, Debug)]
struct AtomInfo {
    column: usize,
    relation: Relation,
    constant: Rational,
}

#[derive(Clone, Debug)]
enum Undo {
    Lower(usize, Option<Bound>),
    Upper(usize, Option<Bound>),
    Assigned(usize),
    Diseq,
}

#[derive(Clone, Debug)]
pub struct LraSolver {
    /// Real variable names; columns `0..names.len()` are the originals,
    /// the remaining columns are slacks.
    names: Vec<String>,
    atoms: Vec<Option<AtomInfo>>,
    /// `rows[r]`: basic column `basic_of_row[r]` equals the sum over the map.
    rows: Vec<BTreeMap<usize, Rational>>,
    basic_of_row: Vec<usize>,
    row_of: Vec<Option<usize>>,
    values: Vec<DeltaRat>,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    /// `(column, constant, literal)` for asserted `t != c`.
    diseqs: Vec<(usize, Rational, Lit)>,
    assigned: Vec<Option<bool>>,
    trail: Vec<Undo>,
    levels: Vec<usize>,
}

impl LraSolver {
    pub fn new(alpha: &AtomSet) -> Result<LraSolver> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for atom in alpha.iter() {
            for v in atom.real_vars() {
                if !index.contains_key(v) {
                    index.insert(v.to_string(), names.len());
                    names.push(v.to_string());
                }
            }
        }
        let mut solver = LraSolver {
            names,
            atoms: Vec::with_capacity(alpha.len()),
            rows: Vec::new(),
            basic_of_row: Vec::new(),
            row_of: Vec::new(),
            values: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            diseqs: Vec::new(),
            assigned: vec![None; alpha.len()],
            trail: Vec::new(),
            levels: Vec::new(),
        };
        for _ in 0..solver.names.len() {
            solver.add_column(None);
        }
        let mut slack_of: HashMap<Vec<(usize, Rational)>, usize> = HashMap::new();
        for atom in alpha.iter() {
            let info = match atom.as_linear() {
                None => None,
                Some(lin) => {
                    let term: Vec<(usize, Rational)> = lin
                        .coeffs()
                        .iter()
                        .map(|(v, c)| (index[v], Rational::from_integer(c.clone())))
                        .collect();
                    let column = if term.len() == 1 && term[0].1.is_one() {
                        term[0].0
                    } else if let Some(&s) = slack_of.get(&term) {
                        s
                    } else {
                        let s = solver.add_column(Some(term.iter().cloned().collect()));
                        slack_of.insert(term, s);
                        s
                    };
                    Some(AtomInfo {
                        column,
                        relation: lin.relation(),
                        constant: lin.constant().clone(),
                    })
                }
            };
            solver.atoms.push(info);
        }
        Ok(solver)
    }

    fn add_column(&mut self, row: Option<BTreeMap<usize, Rational>>) -> usize {
        let col = self.values.len();
        self.values.push(DeltaRat::zero());
        self.lower.push(None);
        self.upper.push(None);
        match row {
            None => self.row_of.push(None),
            Some(r) => {
                // all original columns are non-basic at construction time
                self.row_of.push(Some(self.rows.len()));
                self.rows.push(r);
                self.basic_of_row.push(col);
            }
        }
        col
    }

    fn set_lower(&mut self, col: usize, value: DeltaRat, reason: Lit) -> Option<Vec<Lit>> {
        if let Some(b) = &self.lower[col] {
            if b.value >= value {
                return None;
            }
        }
        if let Some(u) = &self.upper[col] {
            if u.value < value {
                return Some(vec![u.reason, reason]);
            }
        }
        let old = self.lower[col].replace(Bound {
            value: value.clone(),
            reason,
        });
        self.trail.push(Undo::Lower(col, old));
        if self.row_of[col].is_none() && self.values[col] < value {
            self.update(col, value);
        }
        None
    }

    fn set_upper(&mut self, col: usize, value: DeltaRat, reason: Lit) -> Option<Vec<Lit>> {
        if let Some(b) = &self.upper[col] {
            if b.value <= value {
                return None;
            }
        }
        if let Some(l) = &self.lower[col] {
            if l.value > value {
                return Some(vec![l.reason, reason]);
            }
        }
        let old = self.upper[col].replace(Bound {
            value: value.clone(),
            reason,
        });
        self.trail.push(Undo::Upper(col, old));
        if self.row_of[col].is_none() && self.values[col] > value {
            self.update(col, value);
        }
        None
    }

    /// Moves non-basic `col` to `value`, keeping rows satisfied.
    fn update(&mut self, col: usize, value: DeltaRat) {
        let diff = &value - &self.values[col];
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(a) = row.get(&col) {
                let b = self.basic_of_row[r];
                self.values[b] = &self.values[b] + &diff.scale(a);
            }
        }
        self.values[col] = value;
    }

    /// Makes non-basic `entering` basic in the row of basic `leaving`.
    fn pivot(&mut self, leaving: usize, entering: usize) {
        let r = self.row_of[leaving].expect("leaving column is basic");
        let mut row = std::mem::take(&mut self.rows[r]);
        let a = row.remove(&entering).expect("entering column occurs in row");
        // entering = (leaving - sum_{k != entering} row[k] x_k) / a
        let inv = Rational::one() / &a;
        let mut new_row: BTreeMap<usize, Rational> = row
            .into_iter()
            .map(|(k, c)| (k, -(c * &inv)))
            .collect();
        new_row.insert(leaving, inv);
        for (other, orow) in self.rows.iter_mut().enumerate() {
            if other == r {
                continue;
            }
            if let Some(c) = orow.remove(&entering) {
                for (k, d) in &new_row {
                    let e = orow.entry(*k).or_insert_with(Rational::zero);
                    *e += &c * d;
                    if e.is_zero() {
                        orow.remove(k);
                    }
                }
            }
        }
        self.rows[r] = new_row;
        self.basic_of_row[r] = entering;
        self.row_of[entering] = Some(r);
        self.row_of[leaving] = None;
    }

    fn pivot_and_update(&mut self, basic: usize, nonbasic: usize, target: DeltaRat) {
        let r = self.row_of[basic].expect("basic");
        let a = self.rows[r][&nonbasic].clone();
        let theta = (&target - &self.values[basic]).scale(&(Rational::one() / &a));
        self.values[basic] = target;
        let new_nb = &self.values[nonbasic] + &theta;
        self.values[nonbasic] = new_nb;
        for (other, row) in self.rows.iter().enumerate() {
            if other == r {
                continue;
            }
            if let Some(c) = row.get(&nonbasic) {
                let b = self.basic_of_row[other];
                self.values[b] = &self.values[b] + &theta.scale(c);
            }
        }
        self.pivot(basic, nonbasic);
    }

    /// Restores bound feasibility or returns a conflict.
    fn simplex(&mut self) -> Option<Vec<Lit>> {
        loop {
            // Bland: smallest violating basic column
            let mut violated: Option<(usize, bool)> = None;
            for col in 0..self.values.len() {
                if self.row_of[col].is_none() {
                    continue;
                }
                let v = &self.values[col];
                if matches!(&self.lower[col], Some(b) if *v < b.value) {
                    violated = Some((col, true));
                    break;
                }
                if matches!(&self.upper[col], Some(b) if *v > b.value) {
                    violated = Some((col, false));
                    break;
                }
            }
            let (basic, below) = violated?;
            let r = self.row_of[basic].unwrap();
            let row = &self.rows[r];
            let mut entering = None;
            for (&k, a) in row {
                let can_increase = self.upper[k].as_ref().is_none_or(|b| self.values[k] < b.value);
                let can_decrease = self.lower[k].as_ref().is_none_or(|b| self.values[k] > b.value);
                let ok = if below {
                    (a.is_positive() && can_increase) || (a.is_negative() && can_decrease)
                } else {
                    (a.is_positive() && can_decrease) || (a.is_negative() && can_increase)
                };
                if ok {
                    entering = Some(k);
                    break;
                }
            }
            match entering {
                Some(k) => {
                    let target = if below {
                        self.lower[basic].as_ref().unwrap().value.clone()
                    } else {
                        self.upper[basic].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(basic, k, target);
                }
                None => {
                    let mut conflict = Vec::with_capacity(row.len() + 1);
                    if below {
                        conflict.push(self.lower[basic].as_ref().unwrap().reason);
                        for (&k, a) in row {
                            let b = if a.is_positive() { &self.upper[k] } else { &self.lower[k] };
                            conflict.push(b.as_ref().expect("blocking bound").reason);
                        }
                    } else {
                        conflict.push(self.upper[basic].as_ref().unwrap().reason);
                        for (&k, a) in row {
                            let b = if a.is_positive() { &self.lower[k] } else { &self.upper[k] };
                            conflict.push(b.as_ref().expect("blocking bound").reason);
                        }
                    }
                    return Some(canonical(conflict));
                }
            }
        }
    }

    /// Simplex plus case splits on disequalities hit exactly.
    fn solve(&mut self) -> std::result::Result<Rational, Vec<Lit>> {
        if let Some(conflict) = self.simplex() {
            return Err(conflict);
        }
        let hit = self
            .diseqs
            .iter()
            .find(|(col, c, _)| self.values[*col] == DeltaRat::constant(c.clone()))
            .cloned();
        let Some((col, c, lit)) = hit else {
            return Ok(self.choose_delta());
        };
        let branch = |this: &mut LraSolver, below: bool| {
            this.push();
            let value = DeltaRat::new(c.clone(), if below { -Rational::one() } else { Rational::one() });
            let immediate = if below {
                this.set_upper(col, value, lit)
            } else {
                this.set_lower(col, value, lit)
            };
            let r = match immediate {
                Some(conflict) => Err(canonical(conflict)),
                None => this.solve(),
            };
            // a satisfying branch stays pushed until the witness is read
            if r.is_err() {
                this.pop();
            }
            r
        };
        let lo = match branch(self, true) {
            Ok(delta) => return Ok(delta),
            Err(c) => c,
        };
        let hi = match branch(self, false) {
            Ok(delta) => return Ok(delta),
            Err(c) => c,
        };
        if !lo.contains(&lit) {
            return Err(lo);
        }
        if !hi.contains(&lit) {
            return Err(hi);
        }
        let mut both = lo;
        both.extend(hi);
        Err(canonical(both))
    }

    /// Largest convenient δ for which every bound and disequality holds.
    fn choose_delta(&self) -> Rational {
        let mut delta = Rational::one();
        for col in 0..self.values.len() {
            let v = &self.values[col];
            if let Some(l) = &self.lower[col] {
                if l.value.real < v.real && l.value.inf > v.inf {
                    delta = delta.min((&v.real - &l.value.real) / (&l.value.inf - &v.inf));
                }
            }
            if let Some(u) = &self.upper[col] {
                if v.real < u.value.real && v.inf > u.value.inf {
                    delta = delta.min((&u.value.real - &v.real) / (&v.inf - &u.value.inf));
                }
            }
        }
        for (col, c, _) in &self.diseqs {
            let v = &self.values[*col];
            if !v.inf.is_zero() {
                let bad = (c - &v.real) / &v.inf;
                if bad.is_positive() && bad <= delta {
                    delta = bad / Rational::from_integer(2.into());
                }
            }
        }
        delta
    }

    fn witness(&self, delta: &Rational) -> BTreeMap<String, Rational> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), self.values[i].at(delta)))
            .collect()
    }

    fn pop_level(&mut self) {
        let mark = self.levels.pop().unwrap_or(0);
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Lower(c, b) => self.lower[c] = b,
                Undo::Upper(c, b) => self.upper[c] = b,
                Undo::Assigned(i) => self.assigned[i] = None,
                Undo::Diseq => {
                    self.diseqs.pop();
                }
            }
        }
    }
}

impl TheorySolver for LraSolver {
    fn push(&mut self) {
        self.levels.push(self.trail.len());
    }

    fn pop(&mut self) {
        self.pop_level();
    }

    fn assert_lit(&mut self, lit: Lit) -> Result<Option<Vec<Lit>>> {
        let i = lit.var().index();
        let info = self
            .atoms
            .get(i)
            .ok_or(Error::UnmappedVariable(lit.var().get()))?
            .clone();
        match self.assigned[i] {
            Some(v) if v == lit.is_positive() => return Ok(None),
            Some(_) => return Ok(Some(vec![lit.negated(), lit])),
            None => {
                self.assigned[i] = Some(lit.is_positive());
                self.trail.push(Undo::Assigned(i));
            }
        }
        let Some(AtomInfo {
            column,
            relation,
            constant,
        }) = info
        else {
            return Ok(None);
        };
        let c = constant;
        let one = Rational::one;
        let conflict = match (relation, lit.is_positive()) {
            (Relation::Le, true) => self.set_upper(column, DeltaRat::constant(c), lit),
            (Relation::Le, false) => self.set_lower(column, DeltaRat::new(c, one()), lit),
            (Relation::Lt, true) => self.set_upper(column, DeltaRat::new(c, -one()), lit),
            (Relation::Lt, false) => self.set_lower(column, DeltaRat::constant(c), lit),
            (Relation::Eq, true) => self
                .set_upper(column, DeltaRat::constant(c.clone()), lit)
                .or_else(|| self.set_lower(column, DeltaRat::constant(c), lit)),
            (Relation::Eq, false) => {
                self.diseqs.push((column, c, lit));
                self.trail.push(Undo::Diseq);
                None
            }
        };
        Ok(conflict.map(canonical))
    }

    fn check_asserted(&mut self) -> Result<TheoryVerdict> {
        let depth = self.levels.len();
        let verdict = match self.solve() {
            Ok(delta) => TheoryVerdict::Sat {
                witness: self.witness(&delta),
            },
            Err(conflict) => TheoryVerdict::Unsat { conflict },
        };
        while self.levels.len() > depth {
            self.pop_level();
        }
        Ok(verdict)
    }
}
