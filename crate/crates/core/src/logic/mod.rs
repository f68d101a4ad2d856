//! Propositional constraints: expressions, clause form and a complete DPLL
//! solver with assumption support.

mod cnf;
mod expr;
mod solver;

pub use cnf::{to_cnf, Cnf, CnfBuilder, VarAllocator};
pub use expr::{BoolExpr, Literal, VarId};
pub use solver::{solve, solve_with_assumptions, SatOutcome, Solver};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("variable {0} is not bound by the assignment")]
    UnboundVariable(VarId),
}

/// Total valuation over variables `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn from_bools(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all_false(len: usize) -> Self {
        Assignment(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.0.get(v.index()).copied()
    }

    /// Panics on an unbound variable.
    pub fn value(&self, v: VarId) -> bool {
        self.0[v.index()]
    }

    pub fn set(&mut self, v: VarId, value: bool) {
        self.0[v.index()] = value;
    }

    pub fn satisfies(&self, l: Literal) -> bool {
        self.value(l.var()) == l.is_positive()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Keeps only the first `len` variables.
    pub fn truncated(mut self, len: usize) -> Self {
        self.0.truncate(len);
        self
    }
}
