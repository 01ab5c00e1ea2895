use std::fmt;

/// Propositional variable, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn new(v: u32) -> Var {
        assert!(v > 0, "variables are 1-based");
        Var(v)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based position.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Signed variable. Orders by (variable, polarity) with the negative
/// literal first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    pub fn pos(v: u32) -> Lit {
        Lit::new(Var::new(v), true)
    }

    pub fn neg(v: u32) -> Lit {
        Lit::new(Var::new(v), false)
    }

    /// DIMACS-style signed integer.
    pub fn from_dimacs(x: i64) -> Option<Lit> {
        if x == 0 || x.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Lit::new(Var::new(x.unsigned_abs() as u32), x > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var.0 as i64
        } else {
            -(self.var.0 as i64)
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        self.negated()
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}
