use super::{Assignment, Cnf, Literal, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Assignment),
    Unsat,
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn model(self) -> Option<Assignment> {
        match self {
            SatOutcome::Sat(a) => Some(a),
            SatOutcome::Unsat => None,
        }
    }
}

pub fn solve(cnf: &Cnf) -> SatOutcome {
    Solver::new(cnf).solve_with_assumptions(&[])
}

pub fn solve_with_assumptions(cnf: &Cnf, assume: &[Literal]) -> SatOutcome {
    Solver::new(cnf).solve_with_assumptions(assume)
}

#[derive(Clone, Copy, Debug)]
struct Decision {
    trail_start: usize,
    lit: Literal,
    flipped: bool,
}

/// DPLL with two-watched-literal unit propagation and chronological
/// backtracking. Decisions take the lowest-index unassigned variable and try
/// `false` first; there is no randomness anywhere.
///
/// Each query starts from an empty trail, so one instance can answer many
/// assumption queries over the same formula. Clauses may be added between
/// queries (for example to block models already seen).
#[derive(Clone, Debug)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
    units: Vec<Literal>,
    trivially_unsat: bool,
    // watchers[code(l)] lists clauses currently watching l (l is at index 0 or 1)
    watchers: Vec<Vec<u32>>,
    values: Vec<Option<bool>>,
    trail: Vec<Literal>,
    queue_head: usize,
    decisions: Vec<Decision>,
    cursor: usize,
}

impl Solver {
    pub fn new(cnf: &Cnf) -> Self {
        let num_vars = cnf.var_count as usize;
        let mut solver = Solver {
            num_vars,
            clauses: Vec::new(),
            units: Vec::new(),
            trivially_unsat: false,
            watchers: vec![Vec::new(); 2 * num_vars],
            values: vec![None; num_vars],
            trail: Vec::with_capacity(num_vars),
            queue_head: 0,
            decisions: Vec::new(),
            cursor: 0,
        };
        for clause in &cnf.clauses {
            solver.add_clause(clause.clone());
        }
        solver
    }

    /// Adds a clause for all later queries. Variables beyond the current
    /// count are declared on the fly.
    pub fn add_clause(&mut self, mut c: Vec<Literal>) {
        self.reset();
        if let Some(max) = c.iter().map(|l| l.var().index() + 1).max() {
            if max > self.num_vars {
                self.num_vars = max;
                self.values.resize(max, None);
                self.watchers.resize(2 * max, Vec::new());
            }
        }
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        match c.len() {
            0 => self.trivially_unsat = true,
            1 => self.units.push(c[0]),
            _ => {
                let idx = self.clauses.len() as u32;
                self.watchers[c[0].code()].push(idx);
                self.watchers[c[1].code()].push(idx);
                self.clauses.push(c);
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn solve(&mut self) -> SatOutcome {
        self.solve_with_assumptions(&[])
    }

    /// Decides `cnf ∧ assume` where every assumption acts as a unit clause
    /// for this query only.
    pub fn solve_with_assumptions(&mut self, assume: &[Literal]) -> SatOutcome {
        self.reset();
        if self.trivially_unsat {
            return SatOutcome::Unsat;
        }
        for i in 0..self.units.len() {
            let u = self.units[i];
            if !self.assert_root(u) {
                return SatOutcome::Unsat;
            }
        }
        for &a in assume {
            assert!(a.var().index() < self.num_vars, "assumption on undeclared variable {}", a.var());
            if !self.assert_root(a) {
                return SatOutcome::Unsat;
            }
        }
        if self.search() {
            let model = self.values.iter().map(|v| v.unwrap_or(false)).collect();
            SatOutcome::Sat(Assignment::from_bools(model))
        } else {
            SatOutcome::Unsat
        }
    }

    fn reset(&mut self) {
        for l in self.trail.drain(..) {
            self.values[l.var().index()] = None;
        }
        self.queue_head = 0;
        self.decisions.clear();
        self.cursor = 0;
    }

    fn assert_root(&mut self, l: Literal) -> bool {
        match self.value(l) {
            Some(true) => true,
            Some(false) => false,
            None => {
                self.enqueue(l);
                self.propagate()
            }
        }
    }

    fn search(&mut self) -> bool {
        loop {
            let Some(var) = self.next_unassigned() else {
                return true;
            };
            let lit = Literal::negative(var);
            self.decisions.push(Decision { trail_start: self.trail.len(), lit, flipped: false });
            self.enqueue(lit);
            while !self.propagate() {
                if !self.backtrack() {
                    return false;
                }
            }
        }
    }

    /// Undoes decisions up to the most recent unflipped one and takes its
    /// other branch. Returns false when the search space is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            self.undo_to(d.trail_start);
            if !d.flipped {
                let lit = !d.lit;
                self.decisions.push(Decision { trail_start: d.trail_start, lit, flipped: true });
                self.enqueue(lit);
                return true;
            }
        }
        false
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().unwrap();
            let v = l.var().index();
            self.values[v] = None;
            self.cursor = self.cursor.min(v);
        }
        self.queue_head = len;
    }

    fn next_unassigned(&mut self) -> Option<VarId> {
        while self.cursor < self.num_vars {
            if self.values[self.cursor].is_none() {
                return Some(VarId(self.cursor as u32));
            }
            self.cursor += 1;
        }
        None
    }

    fn value(&self, l: Literal) -> Option<bool> {
        self.values[l.var().index()].map(|v| v == l.is_positive())
    }

    fn enqueue(&mut self, l: Literal) {
        debug_assert!(self.values[l.var().index()].is_none());
        self.values[l.var().index()] = Some(l.is_positive());
        self.trail.push(l);
    }

    /// Unit propagation over the pending trail suffix; false on conflict.
    fn propagate(&mut self) -> bool {
        while self.queue_head < self.trail.len() {
            let falsified = !self.trail[self.queue_head];
            self.queue_head += 1;
            let mut watching = std::mem::take(&mut self.watchers[falsified.code()]);
            let mut keep = 0;
            let mut i = 0;
            let mut conflict = false;
            while i < watching.len() {
                let ci = watching[i] as usize;
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_value = self.values[other.var().index()].map(|v| v == other.is_positive());
                if other_value == Some(true) {
                    watching[keep] = ci as u32;
                    keep += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    if self.values[l.var().index()].map(|v| v == l.is_positive()) != Some(false) {
                        clause.swap(1, k);
                        self.watchers[l.code()].push(ci as u32);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                watching[keep] = ci as u32;
                keep += 1;
                match other_value {
                    Some(false) => {
                        conflict = true;
                        break;
                    }
                    _ => self.enqueue(other),
                }
            }
            while i < watching.len() {
                watching[keep] = watching[i];
                keep += 1;
                i += 1;
            }
            watching.truncate(keep);
            self.watchers[falsified.code()] = watching;
            if conflict {
                return false;
            }
        }
        true
    }
}
