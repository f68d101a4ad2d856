use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use super::{Assignment, LogicError};

/// Dense index of a propositional variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable with a polarity, packed as `var << 1 | negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    pub fn new(var: VarId, positive: bool) -> Self {
        Literal(var.0 << 1 | u32::from(!positive))
    }

    pub fn positive(var: VarId) -> Self {
        Self::new(var, true)
    }

    pub fn negative(var: VarId) -> Self {
        Self::new(var, false)
    }

    pub fn var(self) -> VarId {
        VarId(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Index usable for per-literal tables (`2 * var + negated`).
    pub fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(self.0 ^ 1)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "¬{}", self.var())
        }
    }
}

/// Propositional formula over atoms of type `A`.
///
/// Solver-facing formulas use the default `A = VarId`. Model documents carry
/// formulas over named atoms which encoders compile down with
/// [`BoolExpr::try_map_atoms`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr<A = VarId> {
    Const(bool),
    Atom(A),
    Not(Box<BoolExpr<A>>),
    /// Non-empty; use [`BoolExpr::and`] to build.
    And(Vec<BoolExpr<A>>),
    /// Non-empty; use [`BoolExpr::or`] to build.
    Or(Vec<BoolExpr<A>>),
    Implies(Box<BoolExpr<A>>, Box<BoolExpr<A>>),
    Iff(Box<BoolExpr<A>>, Box<BoolExpr<A>>),
}

impl<A> BoolExpr<A> {
    pub fn atom(a: A) -> Self {
        BoolExpr::Atom(a)
    }

    /// Conjunction; the empty conjunction is `true` and a singleton collapses.
    pub fn and(mut children: Vec<Self>) -> Self {
        match children.len() {
            0 => BoolExpr::Const(true),
            1 => children.pop().unwrap(),
            _ => BoolExpr::And(children),
        }
    }

    /// Disjunction; the empty disjunction is `false` and a singleton collapses.
    pub fn or(mut children: Vec<Self>) -> Self {
        match children.len() {
            0 => BoolExpr::Const(false),
            1 => children.pop().unwrap(),
            _ => BoolExpr::Or(children),
        }
    }

    pub fn negate(self) -> Self {
        BoolExpr::Not(Box::new(self))
    }

    pub fn implies(self, rhs: Self) -> Self {
        BoolExpr::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn iff(self, rhs: Self) -> Self {
        BoolExpr::Iff(Box::new(self), Box::new(rhs))
    }

    /// Exactly one of `items` holds, as one at-least-one clause plus pairwise
    /// at-most-one clauses.
    pub fn exactly_one(items: Vec<Self>) -> Self
    where
        A: Clone,
    {
        let mut parts = Vec::with_capacity(1 + items.len() * items.len().saturating_sub(1) / 2);
        parts.push(BoolExpr::or(items.clone()));
        parts.push(Self::at_most_one(items));
        BoolExpr::and(parts)
    }

    pub fn at_most_one(items: Vec<Self>) -> Self
    where
        A: Clone,
    {
        let mut parts = Vec::new();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                parts.push(BoolExpr::or(vec![items[i].clone().negate(), items[j].clone().negate()]));
            }
        }
        BoolExpr::and(parts)
    }

    /// Evaluates with a caller-supplied atom valuation; `None` from the
    /// valuation aborts with that atom.
    pub fn eval_with<F>(&self, value: &mut F) -> Result<bool, &A>
    where
        F: FnMut(&A) -> Option<bool>,
    {
        Ok(match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Atom(a) => value(a).ok_or(a)?,
            BoolExpr::Not(e) => !e.eval_with(value)?,
            BoolExpr::And(es) => {
                let mut all = true;
                for e in es {
                    all &= e.eval_with(value)?;
                }
                all
            }
            BoolExpr::Or(es) => {
                let mut any = false;
                for e in es {
                    any |= e.eval_with(value)?;
                }
                any
            }
            BoolExpr::Implies(a, b) => !a.eval_with(value)? | b.eval_with(value)?,
            BoolExpr::Iff(a, b) => a.eval_with(value)? == b.eval_with(value)?,
        })
    }

    pub fn try_map_atoms<B, E, F>(&self, f: &mut F) -> Result<BoolExpr<B>, E>
    where
        F: FnMut(&A) -> Result<BoolExpr<B>, E>,
    {
        Ok(match self {
            BoolExpr::Const(b) => BoolExpr::Const(*b),
            BoolExpr::Atom(a) => f(a)?,
            BoolExpr::Not(e) => BoolExpr::Not(Box::new(e.try_map_atoms(f)?)),
            BoolExpr::And(es) => BoolExpr::And(es.iter().map(|e| e.try_map_atoms(f)).collect::<Result<_, _>>()?),
            BoolExpr::Or(es) => BoolExpr::Or(es.iter().map(|e| e.try_map_atoms(f)).collect::<Result<_, _>>()?),
            BoolExpr::Implies(a, b) => BoolExpr::Implies(Box::new(a.try_map_atoms(f)?), Box::new(b.try_map_atoms(f)?)),
            BoolExpr::Iff(a, b) => BoolExpr::Iff(Box::new(a.try_map_atoms(f)?), Box::new(b.try_map_atoms(f)?)),
        })
    }

    pub fn for_each_atom<F: FnMut(&A)>(&self, f: &mut F) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Atom(a) => f(a),
            BoolExpr::Not(e) => e.for_each_atom(f),
            BoolExpr::And(es) | BoolExpr::Or(es) => es.iter().for_each(|e| e.for_each_atom(f)),
            BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }
}

impl BoolExpr<VarId> {
    pub fn var(v: VarId) -> Self {
        BoolExpr::Atom(v)
    }

    pub fn lit(l: Literal) -> Self {
        if l.is_positive() {
            BoolExpr::Atom(l.var())
        } else {
            BoolExpr::Atom(l.var()).negate()
        }
    }

    /// Standard propositional semantics; fails on a variable the assignment
    /// does not cover.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<bool, LogicError> {
        self.eval_with(&mut |v: &VarId| assignment.get(*v)).map_err(|v| LogicError::UnboundVariable(*v))
    }

    /// One past the largest variable index mentioned, 0 for a closed formula.
    pub fn var_bound(&self) -> u32 {
        let mut bound = 0;
        self.for_each_atom(&mut |v: &VarId| bound = bound.max(v.0 + 1));
        bound
    }

    /// The literals of a literal or a flat conjunction of literals, `None`
    /// for anything else. Such formulas can be asserted as solver
    /// assumptions without a definitional encoding.
    pub fn as_literal_conjunction(&self) -> Option<Vec<Literal>> {
        fn literal(e: &BoolExpr) -> Option<Literal> {
            match e {
                BoolExpr::Atom(v) => Some(Literal::positive(*v)),
                BoolExpr::Not(inner) => literal(inner).map(|l| !l),
                _ => None,
            }
        }
        match self {
            BoolExpr::And(es) => es.iter().map(literal).collect(),
            BoolExpr::Const(true) => Some(Vec::new()),
            e => literal(e).map(|l| vec![l]),
        }
    }
}

impl<A: fmt::Display> fmt::Display for BoolExpr<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

// Binding strength used for minimal parenthesisation:
// <-> 1, -> 2, || 3, && 4, ! 5.
fn strength<A>(e: &BoolExpr<A>) -> u8 {
    match e {
        BoolExpr::Const(_) | BoolExpr::Atom(_) => 6,
        BoolExpr::Not(_) => 5,
        BoolExpr::And(_) => 4,
        BoolExpr::Or(_) => 3,
        BoolExpr::Implies(..) => 2,
        BoolExpr::Iff(..) => 1,
    }
}

fn write_expr<A: fmt::Display>(e: &BoolExpr<A>, f: &mut fmt::Formatter<'_>, context: u8) -> fmt::Result {
    let wrap = strength(e) < context;
    if wrap {
        write!(f, "(")?;
    }
    match e {
        BoolExpr::Const(b) => write!(f, "{b}")?,
        BoolExpr::Atom(a) => write!(f, "{a}")?,
        BoolExpr::Not(inner) => {
            write!(f, "!")?;
            write_expr(inner, f, 5)?;
        }
        BoolExpr::And(es) => write_list(es, " && ", 4, f)?,
        BoolExpr::Or(es) => write_list(es, " || ", 3, f)?,
        BoolExpr::Implies(a, b) => {
            // right associative: a parenthesised left operand
            write_expr(a, f, 3)?;
            write!(f, " -> ")?;
            write_expr(b, f, 2)?;
        }
        BoolExpr::Iff(a, b) => {
            write_expr(a, f, 1)?;
            write!(f, " <-> ")?;
            write_expr(b, f, 2)?;
        }
    }
    if wrap {
        write!(f, ")")?;
    }
    Ok(())
}

fn write_list<A: fmt::Display>(es: &[BoolExpr<A>], sep: &str, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        // nested lists of the same operator keep their grouping
        write_expr(e, f, level + 1)?;
    }
    Ok(())
}
