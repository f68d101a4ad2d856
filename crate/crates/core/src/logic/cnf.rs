use super::{BoolExpr, Literal, VarId};

/// Hands out fresh variable indices above everything allocated so far.
#[derive(Clone, Debug, Default)]
pub struct VarAllocator {
    next: u32,
}

impl VarAllocator {
    /// Allocator whose first fresh variable is `start`.
    pub fn starting_at(start: u32) -> Self {
        VarAllocator { next: start }
    }

    pub fn fresh(&mut self) -> VarId {
        let v = VarId(self.next);
        self.next += 1;
        v
    }

    pub fn count(&self) -> u32 {
        self.next
    }

    fn reserve_below(&mut self, bound: u32) {
        self.next = self.next.max(bound);
    }
}

/// Clause-form formula. An empty clause marks a formula that is
/// unsatisfiable by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub clauses: Vec<Vec<Literal>>,
    pub var_count: u32,
}

impl Cnf {
    pub fn new(var_count: u32) -> Self {
        Cnf { clauses: Vec::new(), var_count }
    }

    pub fn add_clause(&mut self, clause: Vec<Literal>) {
        for l in &clause {
            self.var_count = self.var_count.max(l.var().0 + 1);
        }
        self.clauses.push(clause);
    }

    /// Evaluates every clause; `None` if some literal is outside `values`.
    pub fn is_satisfied_by(&self, values: &[bool]) -> Option<bool> {
        let mut all = true;
        for clause in &self.clauses {
            let mut sat = false;
            for l in clause {
                let v = *values.get(l.var().index())?;
                sat |= v == l.is_positive();
            }
            all &= sat;
        }
        Some(all)
    }
}

/// Tseitin transformation of `expr` with auxiliaries drawn from `fresh`.
pub fn to_cnf(expr: &BoolExpr, fresh: &mut VarAllocator) -> Cnf {
    let mut builder = CnfBuilder::new(fresh.clone());
    builder.assert(expr);
    let cnf = builder.finish();
    fresh.reserve_below(cnf.var_count);
    cnf
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Const(bool),
    Lit(Literal),
}

impl std::ops::Not for Node {
    type Output = Node;

    fn not(self) -> Node {
        match self {
            Node::Const(b) => Node::Const(!b),
            Node::Lit(l) => Node::Lit(!l),
        }
    }
}

/// Incremental CNF construction: top-level assertions become clauses
/// directly where their shape allows, everything nested gets a
/// bidirectional definition over a fresh variable.
#[derive(Clone, Debug)]
pub struct CnfBuilder {
    cnf: Cnf,
    fresh: VarAllocator,
}

impl CnfBuilder {
    pub fn new(fresh: VarAllocator) -> Self {
        let cnf = Cnf::new(fresh.count());
        CnfBuilder { cnf, fresh }
    }

    /// Adds `expr` as a constraint that must hold.
    pub fn assert(&mut self, expr: &BoolExpr) {
        self.fresh.reserve_below(expr.var_bound());
        self.assert_polarity(expr, true);
    }

    /// Returns a literal equivalent to `expr` under the added definitions.
    /// A constant folds to a literal fixed by a unit clause.
    pub fn define(&mut self, expr: &BoolExpr) -> Literal {
        self.fresh.reserve_below(expr.var_bound());
        match self.node(expr) {
            Node::Lit(l) => l,
            Node::Const(b) => {
                let v = self.fresh.fresh();
                let l = Literal::new(v, b);
                self.push(vec![l]);
                l
            }
        }
    }

    pub fn add_clause(&mut self, clause: Vec<Literal>) {
        for l in &clause {
            self.fresh.reserve_below(l.var().0 + 1);
        }
        self.push(clause);
    }

    pub fn finish(mut self) -> Cnf {
        self.cnf.var_count = self.cnf.var_count.max(self.fresh.count());
        self.cnf
    }

    fn push(&mut self, mut clause: Vec<Literal>) {
        clause.sort_unstable();
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == !w[1]) {
            return; // tautology
        }
        self.cnf.add_clause(clause);
    }

    fn assert_polarity(&mut self, expr: &BoolExpr, positive: bool) {
        match (expr, positive) {
            (BoolExpr::Const(b), _) => {
                if *b != positive {
                    self.cnf.clauses.push(Vec::new());
                }
            }
            (BoolExpr::Not(inner), _) => self.assert_polarity(inner, !positive),
            (BoolExpr::And(es), true) => es.iter().for_each(|e| self.assert_polarity(e, true)),
            (BoolExpr::Or(es), false) => es.iter().for_each(|e| self.assert_polarity(e, false)),
            (BoolExpr::Implies(a, b), false) => {
                self.assert_polarity(a, true);
                self.assert_polarity(b, false);
            }
            (BoolExpr::Iff(a, b), _) => {
                let (la, lb) = (self.node(a), self.node(b));
                let lb = if positive { lb } else { !lb };
                self.emit(&[!la, lb]);
                self.emit(&[la, !lb]);
            }
            _ => {
                let mut clause = Vec::new();
                self.disjuncts(expr, positive, &mut clause);
                self.emit(&clause);
            }
        }
    }

    /// Flattens a disjunction (under the given polarity) into nodes.
    fn disjuncts(&mut self, expr: &BoolExpr, positive: bool, out: &mut Vec<Node>) {
        match (expr, positive) {
            (BoolExpr::Not(inner), _) => self.disjuncts(inner, !positive, out),
            (BoolExpr::Or(es), true) | (BoolExpr::And(es), false) => {
                for e in es {
                    self.disjuncts(e, positive, out);
                }
            }
            (BoolExpr::Implies(a, b), true) => {
                self.disjuncts(a, false, out);
                self.disjuncts(b, true, out);
            }
            _ => {
                let n = self.node(expr);
                out.push(if positive { n } else { !n });
            }
        }
    }

    fn emit(&mut self, nodes: &[Node]) {
        let mut clause = Vec::with_capacity(nodes.len());
        for n in nodes {
            match *n {
                Node::Const(true) => return,
                Node::Const(false) => {}
                Node::Lit(l) => clause.push(l),
            }
        }
        if clause.is_empty() {
            self.cnf.clauses.push(Vec::new());
        } else {
            self.push(clause);
        }
    }

    fn node(&mut self, expr: &BoolExpr) -> Node {
        match expr {
            BoolExpr::Const(b) => Node::Const(*b),
            BoolExpr::Atom(v) => Node::Lit(Literal::positive(*v)),
            BoolExpr::Not(inner) => !self.node(inner),
            BoolExpr::And(es) => {
                let children: Vec<Node> = es.iter().map(|e| self.node(e)).collect();
                self.define_and(children)
            }
            BoolExpr::Or(es) => {
                let children: Vec<Node> = es.iter().map(|e| !self.node(e)).collect();
                !self.define_and(children)
            }
            BoolExpr::Implies(a, b) => {
                let children = vec![self.node(a), !self.node(b)];
                !self.define_and(children)
            }
            BoolExpr::Iff(a, b) => {
                let (la, lb) = (self.node(a), self.node(b));
                match (la, lb) {
                    (Node::Const(x), n) | (n, Node::Const(x)) => {
                        if x {
                            n
                        } else {
                            !n
                        }
                    }
                    (Node::Lit(la), Node::Lit(lb)) => {
                        let d = Literal::positive(self.fresh.fresh());
                        self.push(vec![!d, !la, lb]);
                        self.push(vec![!d, la, !lb]);
                        self.push(vec![d, la, lb]);
                        self.push(vec![d, !la, !lb]);
                        Node::Lit(d)
                    }
                }
            }
        }
    }

    fn define_and(&mut self, children: Vec<Node>) -> Node {
        let mut lits = Vec::with_capacity(children.len());
        for c in children {
            match c {
                Node::Const(false) => return Node::Const(false),
                Node::Const(true) => {}
                Node::Lit(l) => lits.push(l),
            }
        }
        match lits.len() {
            0 => Node::Const(true),
            1 => Node::Lit(lits[0]),
            _ => {
                let d = Literal::positive(self.fresh.fresh());
                for &l in &lits {
                    self.push(vec![!d, l]);
                }
                let mut back: Vec<Literal> = lits.iter().map(|&l| !l).collect();
                back.push(d);
                self.push(back);
                Node::Lit(d)
            }
        }
    }
}
