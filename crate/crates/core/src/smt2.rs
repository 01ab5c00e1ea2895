//! SMT-LIB 2 subset for quantifier-free linear real arithmetic.
//!
//! Accepted: `set-logic`, `declare-fun`/`declare-const` of sort `Real` or
//! `Bool`, `assert`, and the informational commands `set-info`,
//! `set-option`, `check-sat`, `get-model`, `exit`. Terms use `and`, `or`,
//! `not`, `=>`, `xor`, `iff`, `=`, `distinct`, `ite` (Boolean branches),
//! `let`, the comparisons `<= < >= > =` (chainable), and linear arithmetic
//! built from `+`, `-`, `*` by a constant and `/` by a constant.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::atom::{fmt_symbol, Atom, AtomSet, Cmp, Rational};
use crate::error::{Error, Result};
use crate::formula::{FormulaId, FormulaStore, Node};

#[derive(Clone, Debug)]
enum Sexp {
    Sym { text: String, quoted: bool, line: usize, col: usize },
    List { items: Vec<Sexp>, line: usize, col: usize },
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Sym { line, col, .. } | Sexp::List { line, col, .. } => (*line, *col),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.pos();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Sym { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Reader<'a> {
        Reader { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, col: self.col, msg: msg.into() })
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    /// Next top-level expression, or `None` at end of input.
    fn next(&mut self) -> Result<Option<Sexp>> {
        self.skip_blank();
        let (line, col) = (self.line, self.col);
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => {
                            return Err(Error::Parse { line, col, msg: "unbalanced `(`".into() });
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List { items, line, col }));
                        }
                        Some(_) => items.push(self.next()?.expect("non-empty input")),
                    }
                }
            }
            ')' => self.error("unexpected `)`"),
            '|' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Error::Parse { line, col, msg: "unterminated `|` symbol".into() }),
                        Some('|') => break,
                        Some(c) => text.push(c),
                    }
                }
                Ok(Some(Sexp::Sym { text, quoted: true, line, col }))
            }
            '"' => self.error("string literals are not supported"),
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || "()|;\"".contains(c) {
                        break;
                    }
                    text.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Sym { text, quoted: false, line, col }))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sort {
    Bool,
    Real,
}

/// Linear term `sum coeffs[v] * v + constant`.
#[derive(Clone, Debug, Default)]
struct Linear {
    coeffs: BTreeMap<String, Rational>,
    constant: Rational,
}

impl Linear {
    fn constant(q: Rational) -> Linear {
        Linear { coeffs: BTreeMap::new(), constant: q }
    }

    fn var(name: &str) -> Linear {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rational::one());
        Linear { coeffs, constant: Rational::zero() }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add(mut self, other: &Linear, sign: &Rational) -> Linear {
        for (v, c) in &other.coeffs {
            *self.coeffs.entry(v.clone()).or_insert_with(Rational::zero) += c * sign;
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        self.constant += &other.constant * sign;
        self
    }

    fn scale(mut self, k: &Rational) -> Linear {
        if k.is_zero() {
            return Linear::default();
        }
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

#[derive(Clone, Debug)]
enum Value {
    Bool(FormulaId),
    Real(Linear),
}

struct Interp<'s> {
    store: &'s mut FormulaStore,
    sorts: HashMap<String, Sort>,
    /// Undeclared symbols get a sort from their context.
    implicit: bool,
    scopes: Vec<HashMap<String, Value>>,
}

fn numeral(text: &str) -> Option<Rational> {
    if text.is_empty() || !text.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    match text.split_once('.') {
        None => BigInt::from_str(text).ok().map(Rational::from_integer),
        Some((int, frac)) => {
            if int.is_empty() || frac.is_empty() || frac.contains('.') {
                return None;
            }
            let num = BigInt::from_str(&format!("{int}{frac}")).ok()?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            Some(Rational::new(num, den))
        }
    }
}

fn cmp_of(op: &str) -> Option<Cmp> {
    Some(match op {
        "<=" => Cmp::Le,
        "<" => Cmp::Lt,
        ">=" => Cmp::Ge,
        ">" => Cmp::Gt,
        _ => return None,
    })
}

impl Interp<'_> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    /// Sort of a term when it can be told without interpreting it.
    fn sort_hint(&self, s: &Sexp) -> Option<Sort> {
        match s {
            Sexp::Sym { text, quoted, .. } => {
                if !quoted && (text == "true" || text == "false") {
                    return Some(Sort::Bool);
                }
                if !quoted && numeral(text).is_some() {
                    return Some(Sort::Real);
                }
                match self.lookup(text) {
                    Some(Value::Bool(_)) => Some(Sort::Bool),
                    Some(Value::Real(_)) => Some(Sort::Real),
                    None => self.sorts.get(text.as_str()).copied(),
                }
            }
            Sexp::List { items, .. } => match items.first().and_then(Sexp::symbol) {
                Some("+" | "-" | "*" | "/") => Some(Sort::Real),
                Some("let") => None,
                _ => Some(Sort::Bool),
            },
        }
    }

    fn bool_arg(&mut self, s: &Sexp) -> Result<FormulaId> {
        match self.term(s, Some(Sort::Bool))? {
            Value::Bool(f) => Ok(f),
            Value::Real(_) => s.err("expected a Boolean term"),
        }
    }

    fn real_arg(&mut self, s: &Sexp) -> Result<Linear> {
        match self.term(s, Some(Sort::Real))? {
            Value::Real(l) => Ok(l),
            Value::Bool(_) => s.err("expected an arithmetic term"),
        }
    }

    fn bool_args(&mut self, args: &[Sexp]) -> Result<Vec<FormulaId>> {
        args.iter().map(|a| self.bool_arg(a)).collect()
    }

    fn symbol_term(&mut self, s: &Sexp, text: &str, quoted: bool, expect: Option<Sort>) -> Result<Value> {
        if !quoted {
            match text {
                "true" => return Ok(Value::Bool(FormulaId::TRUE)),
                "false" => return Ok(Value::Bool(FormulaId::FALSE)),
                _ => {}
            }
            if let Some(q) = numeral(text) {
                return Ok(Value::Real(Linear::constant(q)));
            }
        }
        if let Some(v) = self.lookup(text) {
            return Ok(v.clone());
        }
        let sort = match self.sorts.get(text) {
            Some(&sort) => sort,
            None if self.implicit => expect.unwrap_or(Sort::Bool),
            None => return s.err(format!("undeclared symbol `{text}`")),
        };
        Ok(match sort {
            Sort::Bool => Value::Bool(self.store.bool_var(text)),
            Sort::Real => Value::Real(Linear::var(text)),
        })
    }

    fn compare(&mut self, s: &Sexp, lhs: &Linear, cmp: Cmp, rhs: &Linear) -> Result<FormulaId> {
        let diff = lhs.clone().add(rhs, &-Rational::one());
        if diff.is_constant() {
            let zero = Rational::zero();
            let c = &diff.constant;
            let holds = match cmp {
                Cmp::Le => *c <= zero,
                Cmp::Lt => *c < zero,
                Cmp::Eq => *c == zero,
                Cmp::Ge => *c >= zero,
                Cmp::Gt => *c > zero,
            };
            return Ok(if holds { FormulaId::TRUE } else { FormulaId::FALSE });
        }
        match Atom::linear(diff.coeffs, cmp, -diff.constant) {
            Ok((atom, positive)) => Ok(self.store.lit(atom, positive)),
            Err(e) => s.err(e.to_string()),
        }
    }

    fn chain(&mut self, s: &Sexp, args: &[Sexp], cmp: Cmp) -> Result<FormulaId> {
        if args.len() < 2 {
            return s.err("comparison needs at least two arguments");
        }
        let terms = args.iter().map(|a| self.real_arg(a)).collect::<Result<Vec<_>>>()?;
        let mut parts = Vec::new();
        for w in terms.windows(2) {
            parts.push(self.compare(s, &w[0], cmp, &w[1])?);
        }
        Ok(self.store.and(parts))
    }

    fn equality(&mut self, s: &Sexp, args: &[Sexp]) -> Result<FormulaId> {
        if args.len() < 2 {
            return s.err("`=` needs at least two arguments");
        }
        let expect = args.iter().find_map(|a| self.sort_hint(a)).unwrap_or(Sort::Bool);
        let mut values = Vec::new();
        for a in args {
            values.push(self.term(a, Some(expect))?);
        }
        let mut parts = Vec::new();
        for (i, w) in values.windows(2).enumerate() {
            parts.push(match (&w[0], &w[1]) {
                (Value::Bool(a), Value::Bool(b)) => self.store.iff(*a, *b),
                (Value::Real(a), Value::Real(b)) => self.compare(s, a, Cmp::Eq, b)?,
                _ => return args[i + 1].err("`=` over mixed sorts"),
            });
        }
        Ok(self.store.and(parts))
    }

    fn let_term(&mut self, s: &Sexp, args: &[Sexp], expect: Option<Sort>) -> Result<Value> {
        let [Sexp::List { items: bindings, .. }, body] = args else {
            return s.err("malformed `let`");
        };
        let mut scope = HashMap::new();
        for b in bindings {
            match b {
                Sexp::List { items, .. } if items.len() == 2 && items[0].symbol().is_some() => {
                    let v = self.term(&items[1], None)?;
                    scope.insert(items[0].symbol().expect("checked").to_string(), v);
                }
                _ => return b.err("malformed `let` binding"),
            }
        }
        self.scopes.push(scope);
        let r = self.term(body, expect);
        self.scopes.pop();
        r
    }

    fn term(&mut self, s: &Sexp, expect: Option<Sort>) -> Result<Value> {
        let items = match s {
            Sexp::Sym { text, quoted, .. } => return self.symbol_term(s, text, *quoted, expect),
            Sexp::List { items, .. } => items,
        };
        let Some((head, args)) = items.split_first() else {
            return s.err("empty term");
        };
        let Some(op) = head.symbol() else {
            return head.err("expected an operator");
        };
        let b = Value::Bool;
        Ok(match op {
            "not" => {
                let [a] = args else { return s.err("`not` takes one argument") };
                let f = self.bool_arg(a)?;
                b(self.store.not(f))
            }
            "and" => {
                let fs = self.bool_args(args)?;
                b(self.store.and(fs))
            }
            "or" => {
                let fs = self.bool_args(args)?;
                b(self.store.or(fs))
            }
            "=>" => {
                if args.len() < 2 {
                    return s.err("`=>` needs at least two arguments");
                }
                let fs = self.bool_args(args)?;
                let mut acc = *fs.last().expect("non-empty");
                for &f in fs[..fs.len() - 1].iter().rev() {
                    acc = self.store.implies(f, acc);
                }
                b(acc)
            }
            "xor" => {
                if args.len() < 2 {
                    return s.err("`xor` needs at least two arguments");
                }
                let fs = self.bool_args(args)?;
                let mut acc = fs[0];
                for &f in &fs[1..] {
                    acc = self.store.xor(acc, f);
                }
                b(acc)
            }
            "iff" => {
                let [x, y] = args else { return s.err("`iff` takes two arguments") };
                let (x, y) = (self.bool_arg(x)?, self.bool_arg(y)?);
                b(self.store.iff(x, y))
            }
            "=" => b(self.equality(s, args)?),
            "distinct" => {
                let [_, _] = args else { return s.err("`distinct` is supported with two arguments") };
                let e = self.equality(s, args)?;
                b(self.store.not(e))
            }
            "ite" => {
                let [c, t, e] = args else { return s.err("`ite` takes three arguments") };
                let c = self.bool_arg(c)?;
                let Value::Bool(t) = self.term(t, Some(Sort::Bool))? else {
                    return s.err("`ite` over arithmetic terms is not supported");
                };
                let e = self.bool_arg(e)?;
                let nc = self.store.not(c);
                let l = self.store.and([c, t]);
                let r = self.store.and([nc, e]);
                b(self.store.or([l, r]))
            }
            "let" => return self.let_term(s, args, expect),
            "+" => {
                let mut acc = Linear::default();
                for a in args {
                    let t = self.real_arg(a)?;
                    acc = acc.add(&t, &Rational::one());
                }
                Value::Real(acc)
            }
            "-" => {
                let ts = args.iter().map(|a| self.real_arg(a)).collect::<Result<Vec<_>>>()?;
                match ts.split_first() {
                    None => return s.err("`-` needs an argument"),
                    Some((t, [])) => Value::Real(t.clone().scale(&-Rational::one())),
                    Some((t, rest)) => Value::Real(
                        rest.iter().fold(t.clone(), |acc, r| acc.add(r, &-Rational::one())),
                    ),
                }
            }
            "*" => {
                let ts = args.iter().map(|a| self.real_arg(a)).collect::<Result<Vec<_>>>()?;
                let mut k = Rational::one();
                let mut var: Option<Linear> = None;
                for t in ts {
                    if t.is_constant() {
                        k *= t.constant;
                    } else if var.is_some() {
                        return s.err("non-linear term");
                    } else {
                        var = Some(t);
                    }
                }
                Value::Real(match var {
                    Some(t) => t.scale(&k),
                    None => Linear::constant(k),
                })
            }
            "/" => {
                let [n, d] = args else { return s.err("`/` takes two arguments") };
                let n = self.real_arg(n)?;
                let den = self.real_arg(d)?;
                if !den.is_constant() {
                    return s.err("non-linear term");
                }
                if den.constant.is_zero() {
                    return d.err("division by zero");
                }
                Value::Real(n.scale(&den.constant.recip()))
            }
            _ => {
                if let Some(cmp) = cmp_of(op) {
                    b(self.chain(s, args, cmp)?)
                } else {
                    return head.err(format!("unsupported construct `{op}`"));
                }
            }
        })
    }

    fn declare(&mut self, name: &Sexp, sort: &Sexp) -> Result<()> {
        let Some(n) = name.symbol() else {
            return name.err("expected a symbol");
        };
        let sort = match sort.symbol() {
            Some("Bool") => Sort::Bool,
            Some("Real") => Sort::Real,
            _ => return sort.err("only Bool and Real declarations are supported"),
        };
        if self.sorts.insert(n.to_string(), sort).is_some() {
            return name.err(format!("`{n}` declared twice"));
        }
        Ok(())
    }

    fn command(&mut self, s: &Sexp, asserts: &mut Vec<FormulaId>) -> Result<()> {
        let Sexp::List { items, .. } = s else {
            return s.err("expected a command");
        };
        let Some(cmd) = items.first().and_then(Sexp::symbol) else {
            return s.err("expected a command");
        };
        let args = &items[1..];
        match cmd {
            "set-logic" => match args {
                [l] if matches!(l.symbol(), Some("QF_LRA" | "QF_RDL" | "QF_UF" | "ALL")) => {}
                _ => return s.err("unsupported logic"),
            },
            "set-info" | "set-option" | "check-sat" | "get-model" | "get-info" | "exit" => {}
            "declare-const" => {
                let [name, sort] = args else { return s.err("malformed `declare-const`") };
                self.declare(name, sort)?;
            }
            "declare-fun" => match args {
                [name, Sexp::List { items, .. }, sort] if items.is_empty() => self.declare(name, sort)?,
                _ => return s.err("only nullary `declare-fun` is supported"),
            },
            "assert" => {
                let [t] = args else { return s.err("`assert` takes one term") };
                let f = self.bool_arg(t)?;
                asserts.push(f);
            }
            other => return items[0].err(format!("unsupported command `{other}`")),
        }
        Ok(())
    }
}

/// Parses a script; the result is the conjunction of its assertions
/// together with its atoms in first-occurrence order.
pub fn parse_smt2(store: &mut FormulaStore, text: &str) -> Result<(FormulaId, AtomSet)> {
    let mut reader = Reader::new(text);
    let mut interp = Interp { store, sorts: HashMap::new(), implicit: false, scopes: Vec::new() };
    let mut asserts = Vec::new();
    while let Some(s) = reader.next()? {
        interp.command(&s, &mut asserts)?;
    }
    let root = interp.store.and(asserts);
    let alpha = interp.store.atoms_of(root);
    Ok((root, alpha))
}

/// Parses a single atom in its printed form. Bare symbols are Boolean
/// atoms; symbols inside arithmetic are real variables.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut store = FormulaStore::new();
    let mut reader = Reader::new(text);
    let s = reader.next()?.ok_or(Error::Parse { line: 1, col: 1, msg: "empty atom".into() })?;
    if reader.next()?.is_some() {
        return reader.error("trailing input after atom");
    }
    let mut interp = Interp { store: &mut store, sorts: HashMap::new(), implicit: true, scopes: Vec::new() };
    let f = interp.bool_arg(&s)?;
    match store.node(f) {
        Node::Lit(a, true) => Ok(store.atom(*a).clone()),
        _ => s.err(format!("`{text}` is not an atom in normal form")),
    }
}

/// Prints `root` as a script that [`parse_smt2`] reads back to the same
/// DAG. Shared compound subterms are bound with `let`.
pub fn print_smt2(store: &FormulaStore, root: FormulaId) -> String {
    let dag = store.dag();
    let order = dag.reachable(root);
    let mut parents: HashMap<FormulaId, usize> = HashMap::new();
    for &id in &order {
        for c in dag.operands(id) {
            *parents.entry(c).or_default() += 1;
        }
    }
    let alpha = store.atoms_of(root);
    let mut out = String::from("(set-logic QF_LRA)\n");
    let mut declared = std::collections::HashSet::new();
    for atom in alpha.iter() {
        let (names, sort): (Vec<&str>, &str) = match atom {
            Atom::Bool(n) => (vec![n.as_str()], "Bool"),
            Atom::Lra(_) => (atom.real_vars().collect(), "Real"),
        };
        for n in names {
            if declared.insert(n.to_string()) {
                out.push_str(&format!("(declare-fun {} () {sort})\n", fmt_symbol(n)));
            }
        }
    }

    let shared = |id: FormulaId| parents.get(&id).copied().unwrap_or(0) > 1;
    let mut text: HashMap<FormulaId, String> = HashMap::new();
    let mut bindings = Vec::new();
    for &id in &order {
        let sub = |c: &FormulaId| text[c].clone();
        let t = match dag.node(id) {
            Node::True => "true".to_string(),
            Node::False => "false".to_string(),
            Node::Lit(a, true) => store.atom(*a).to_string(),
            Node::Lit(a, false) => format!("(not {})", store.atom(*a)),
            Node::And(cs) => format!("(and {})", cs.iter().map(sub).collect::<Vec<_>>().join(" ")),
            Node::Or(cs) => format!("(or {})", cs.iter().map(sub).collect::<Vec<_>>().join(" ")),
            Node::Not(a) => format!("(not {})", sub(a)),
            Node::Iff(a, b) => format!("(= {} {})", sub(a), sub(b)),
            Node::Implies(a, b) => format!("(=> {} {})", sub(a), sub(b)),
        };
        let compound = !matches!(dag.node(id), Node::True | Node::False | Node::Lit(..));
        if compound && shared(id) && id != root {
            let name = format!("|let {}|", bindings.len());
            bindings.push((name.clone(), t));
            text.insert(id, name);
        } else {
            text.insert(id, t);
        }
    }
    let mut body = text.remove(&root).unwrap_or_default();
    for (name, t) in bindings.into_iter().rev() {
        body = format!("(let (({name} {t}))\n  {body})");
    }
    if root != FormulaId::TRUE {
        out.push_str(&format!("(assert {body})\n"));
    }
    out
}
