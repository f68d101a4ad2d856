//! One solver instance over `M` plus a definition for every requirement, so
//! that any conjunction `M ∧ r1 ∧ … ∧ rk` is a single assumption query.

use crate::logic::{BoolExpr, Cnf, CnfBuilder, Literal, SatOutcome, Solver, VarAllocator};
use crate::spaces::SpaceEncoding;

#[derive(Clone, Debug)]
pub struct RequirementPool {
    cnf: Cnf,
    solver: Solver,
    literals: Vec<Vec<Literal>>,
}

impl RequirementPool {
    /// Requirements that are conjunctions of literals are assumed directly;
    /// anything else gets a Tseitin selector literal.
    pub fn new<'a>(enc: &SpaceEncoding, exprs: impl IntoIterator<Item = &'a BoolExpr>) -> Self {
        let base = enc.cnf();
        let mut builder = CnfBuilder::new(VarAllocator::starting_at(base.var_count));
        for clause in &base.clauses {
            builder.add_clause(clause.clone());
        }
        let literals =
            exprs.into_iter().map(|e| e.as_literal_conjunction().unwrap_or_else(|| vec![builder.define(e)])).collect();
        let cnf = builder.finish();
        let solver = Solver::new(&cnf);
        RequirementPool { cnf, solver, literals }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Assumption literals asserting requirement `i`.
    pub fn literals(&self, i: usize) -> &[Literal] {
        &self.literals[i]
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    /// Decides `M ∧ assume` on the shared solver.
    pub fn check(&mut self, assume: &[Literal]) -> SatOutcome {
        self.solver.solve_with_assumptions(assume)
    }

    /// `M ∧ r_i` satisfiable.
    pub fn is_valid(&mut self, i: usize) -> bool {
        let lits = self.literals[i].clone();
        self.check(&lits).is_sat()
    }

    /// Satisfiability of `M ∧ ⋀ members` from a freshly built solver; the
    /// model depends only on the formula and the assumption order.
    pub fn fresh_model(&self, members: &[usize]) -> SatOutcome {
        let assume: Vec<Literal> = members.iter().flat_map(|&i| self.literals[i].iter().copied()).collect();
        Solver::new(&self.cnf).solve_with_assumptions(&assume)
    }

    /// Validity of every requirement, split over `jobs` worker threads. The
    /// verdicts do not depend on the job count.
    pub fn validity(&self, jobs: usize) -> Vec<bool> {
        let n = self.literals.len();
        let jobs = jobs.clamp(1, n.max(1));
        if jobs == 1 {
            let mut solver = self.solver.clone();
            return self.literals.iter().map(|l| solver.solve_with_assumptions(l).is_sat()).collect();
        }
        let chunk = n.div_ceil(jobs);
        std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .literals
                .chunks(chunk)
                .map(|part| {
                    let mut solver = self.solver.clone();
                    scope.spawn(move || {
                        part.iter().map(|l| solver.solve_with_assumptions(l).is_sat()).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("validity worker panicked")).collect()
        })
    }
}
