use std::collections::BTreeMap;

use super::{TheorySolver, TheoryVerdict};
use crate::error::{Error, Result};
use crate::lit::Lit;

/// Degenerate theory: every atom is an opaque proposition, so the only
/// conflicts are complementary literal pairs.
#[derive(Clone, Debug)]
pub struct BooleanSolver {
    values: Vec<Option<bool>>,
    trail: Vec<usize>,
    levels: Vec<usize>,
}

impl BooleanSolver {
    pub fn new(num_vars: usize) -> BooleanSolver {
        BooleanSolver {
            values: vec![None; num_vars],
            trail: Vec::new(),
            levels: Vec::new(),
        }
    }
}

impl TheorySolver for BooleanSolver {
    fn push(&mut self) {
        self.levels.push(self.trail.len());
    }

    fn pop(&mut self) {
        let mark = self.levels.pop().unwrap_or(0);
        for i in self.trail.drain(mark..) {
            self.values[i] = None;
        }
    }

    fn assert_lit(&mut self, lit: Lit) -> Result<Option<Vec<Lit>>> {
        let i = lit.var().index();
        let slot = self
            .values
            .get_mut(i)
            .ok_or(Error::UnmappedVariable(lit.var().get()))?;
        match *slot {
            Some(v) if v == lit.is_positive() => Ok(None),
            Some(_) => Ok(Some(vec![lit.negated(), lit])),
            None => {
                *slot = Some(lit.is_positive());
                self.trail.push(i);
                Ok(None)
            }
        }
    }

    fn check_asserted(&mut self) -> Result<TheoryVerdict> {
        Ok(TheoryVerdict::Sat {
            witness: BTreeMap::new(),
        })
    }
}
