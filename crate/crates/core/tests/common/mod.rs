//! Brute-force oracles shared by the integration tests. Nothing here goes
//! through the propositional encoding except `decoded_models`, which is the
//! thing being compared.

#![allow(dead_code)]

use std::collections::BTreeSet;

use indexmap::IndexMap;
use itertools::Itertools;
use proptest::prelude::*;
use ucit_core::logic::{Literal, SatOutcome, Solver, VarId};
use ucit_core::spaces::SemAtom;
use ucit_core::{
    Atom, Constraint, CoveringArrayModel, Factor, FsmModel, FsmPath, Requirement, SequenceModel, SequenceVariant,
    SpaceEncoding, SpaceModel, Target, TestCase, Transition,
};

pub fn row_value(row: &IndexMap<String, String>, factor: &str, value: &str) -> bool {
    row.get(factor).map(String::as_str) == Some(value)
}

pub fn holds_on_values(c: &Constraint, value_of: impl Fn(&str) -> Option<String>) -> bool {
    c.eval_with(&mut |a: &Atom| match a {
        Atom::Value { factor, value } => Some(value_of(factor).as_deref() == Some(value.as_str())),
        Atom::Before(..) => None,
    })
    .expect("value constraint")
}

/// `a` occurs somewhere before `b`.
pub fn occurs_before(seq: &[String], a: &str, b: &str) -> bool {
    seq.iter().position(|e| e == a).is_some_and(|i| seq[i + 1..].iter().any(|e| e == b))
}

pub fn holds_on_sequence(c: &Constraint, seq: &[String]) -> bool {
    c.eval_with(&mut |a: &Atom| match a {
        Atom::Before(x, y) => Some(occurs_before(seq, x, y)),
        Atom::Value { .. } => None,
    })
    .expect("sequence constraint")
}

pub fn is_subsequence<T: PartialEq>(needle: &[T], hay: &[T]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Every row of the full product that satisfies the constraint.
pub fn valid_rows(m: &CoveringArrayModel) -> Vec<TestCase> {
    m.factors
        .iter()
        .map(|f| f.domain.iter())
        .multi_cartesian_product()
        .map(|values| m.factors.iter().map(|f| f.name.clone()).zip(values.into_iter().cloned()).collect())
        .filter(|row: &IndexMap<String, String>| {
            m.constraint.as_ref().is_none_or(|c| holds_on_values(c, |f| row.get(f).cloned()))
        })
        .map(TestCase::Row)
        .collect()
}

pub fn valid_sequences(m: &SequenceModel) -> Vec<TestCase> {
    let all: Vec<Vec<String>> = match m.variant {
        SequenceVariant::Permutation => m.events.iter().cloned().permutations(m.events.len()).collect(),
        SequenceVariant::VariableLength { max_len } => {
            let mut all = vec![Vec::new()];
            for len in 1..=max_len {
                all.extend((0..len).map(|_| m.events.iter().cloned()).multi_cartesian_product());
            }
            all
        }
    };
    all.into_iter()
        .filter(|s| m.constraint.as_ref().is_none_or(|c| holds_on_sequence(c, s)))
        .map(TestCase::EventSeq)
        .collect()
}

/// Transition-index paths from the initial to the final state with at most
/// `bound + 1` states.
pub fn fsm_paths(m: &FsmModel, bound: usize) -> Vec<Vec<usize>> {
    fn walk(m: &FsmModel, at: &str, bound: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == m.final_state {
            out.push(path.clone());
            return;
        }
        if path.len() == bound {
            return;
        }
        for (i, t) in m.transitions.iter().enumerate() {
            if t.from == at {
                path.push(i);
                walk(m, &t.to, bound, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(m, &m.initial, bound, &mut Vec::new(), &mut out);
    out
}

fn path_states(m: &FsmModel, transitions: &[usize]) -> Vec<String> {
    let mut states = vec![m.initial.clone()];
    states.extend(transitions.iter().map(|&t| m.transitions[t].to.clone()));
    states
}

/// Every path with every assignment to the factors of its visited states,
/// kept when all guards of taken transitions and the system constraint hold.
pub fn valid_fsm_tests(m: &FsmModel, bound: usize) -> Vec<TestCase> {
    let mut out = Vec::new();
    for path in fsm_paths(m, bound) {
        let states = path_states(m, &path);
        let live: Vec<&Factor> = m.factors.iter().filter(|f| states.contains(&m.bindings[&f.name])).collect();
        for values in live.iter().map(|f| f.domain.iter()).multi_cartesian_product() {
            let mut assigned: IndexMap<String, Option<String>> =
                m.factors.iter().map(|f| (f.name.clone(), None)).collect();
            for (f, v) in live.iter().zip(&values) {
                assigned[&f.name] = Some((*v).clone());
            }
            let test = TestCase::FsmPath(FsmPath {
                states: states.clone(),
                transitions: path.iter().map(|&t| m.transitions[t].name.clone()).collect(),
                values: assigned,
            });
            if fsm_test_is_valid(m, bound, &test) {
                out.push(test);
            }
        }
    }
    out
}

/// Independent validity check of a test against the model definition.
pub fn test_is_valid(enc: &SpaceEncoding, test: &TestCase) -> bool {
    match (enc.model(), test) {
        (SpaceModel::Ca(m), TestCase::Row(row)) => {
            row.len() == m.factors.len()
                && m.factors.iter().all(|f| row.get(&f.name).is_some_and(|v| f.value_index(v).is_some()))
                && m.constraint.as_ref().is_none_or(|c| holds_on_values(c, |f| row.get(f).cloned()))
        }
        (SpaceModel::Sequence(m), TestCase::EventSeq(seq)) => {
            let shape = match m.variant {
                SequenceVariant::Permutation => {
                    seq.len() == m.events.len() && m.events.iter().all(|e| seq.iter().filter(|x| *x == e).count() == 1)
                }
                SequenceVariant::VariableLength { max_len } => {
                    seq.len() <= max_len && seq.iter().all(|e| m.events.contains(e))
                }
            };
            shape && m.constraint.as_ref().is_none_or(|c| holds_on_sequence(c, seq))
        }
        (SpaceModel::Fsm(m), TestCase::FsmPath(_)) => fsm_test_is_valid(m, enc.path_bound(), test),
        _ => false,
    }
}

pub fn fsm_test_is_valid(m: &FsmModel, bound: usize, test: &TestCase) -> bool {
    let TestCase::FsmPath(p) = test else { return false };
    if p.states.first() != Some(&m.initial)
        || p.states.last() != Some(&m.final_state)
        || p.states.len() > bound + 1
        || p.transitions.len() + 1 != p.states.len()
    {
        return false;
    }
    for (k, name) in p.transitions.iter().enumerate() {
        let Some(t) = m.transitions.iter().find(|t| &t.name == name) else { return false };
        if t.from != p.states[k] || t.to != p.states[k + 1] {
            return false;
        }
    }
    let value_of = |f: &str| p.values.get(f).cloned().flatten();
    for f in &m.factors {
        let visited = p.states.contains(&m.bindings[&f.name]);
        match value_of(&f.name) {
            Some(v) if visited && f.value_index(&v).is_some() => {}
            None if !visited => {}
            _ => return false,
        }
    }
    let guards_hold = p.transitions.iter().all(|name| {
        let t: &Transition = m.transitions.iter().find(|t| &t.name == name).unwrap();
        t.guard.as_ref().is_none_or(|g| holds_on_values(g, value_of))
    });
    guards_hold && m.constraint.as_ref().is_none_or(|c| holds_on_values(c, value_of))
}

/// Whether the test contains what the requirement's target asks for.
pub fn contains(enc: &SpaceEncoding, req: &Requirement, test: &TestCase) -> bool {
    match (&req.target, test) {
        (Target::Values(pairs), _) => pairs.iter().all(|&(f, v)| {
            let factor = &enc.factors()[f];
            let want = &factor.domain[v];
            match test {
                TestCase::Row(row) => row_value(row, &factor.name, want),
                TestCase::FsmPath(p) => p.values.get(&factor.name).cloned().flatten().as_ref() == Some(want),
                TestCase::EventSeq(_) => false,
            }
        }),
        (Target::Events(events), TestCase::EventSeq(seq)) => {
            let SpaceModel::Sequence(m) = enc.model() else { return false };
            let names: Vec<String> = events.iter().map(|&e| m.events[e].clone()).collect();
            is_subsequence(&names, seq)
        }
        (Target::States(states), TestCase::FsmPath(p)) => {
            let SpaceModel::Fsm(m) = enc.model() else { return false };
            let names: Vec<String> = states.iter().map(|&s| m.states[s].clone()).collect();
            is_subsequence(&names, &p.states)
        }
        _ => false,
    }
}

/// All models of `M` projected onto the dictionary atoms, decoded. Solver
/// enumeration with blocking clauses over `vars` (all atoms by default),
/// which must determine the decoded test.
pub fn decoded_models(enc: &SpaceEncoding) -> Vec<TestCase> {
    let atoms: Vec<VarId> = (0..enc.dictionary().len() as u32).map(VarId).collect();
    let mut solver = Solver::new(enc.cnf());
    enumerate_blocked(enc, &mut solver, &[], &atoms)
}

fn enumerate_blocked(enc: &SpaceEncoding, solver: &mut Solver, assume: &[Literal], vars: &[VarId]) -> Vec<TestCase> {
    let mut out = Vec::new();
    while let SatOutcome::Sat(model) = solver.solve_with_assumptions(assume) {
        out.push(enc.decode(&model.clone().truncated(enc.dictionary().len())).expect("models decode"));
        let mut block: Vec<Literal> = vars.iter().map(|&v| Literal::new(v, !model.value(v))).collect();
        // only blocks models under these assumptions
        block.extend(assume.iter().map(|&l| !l));
        solver.add_clause(block);
    }
    out
}

/// FSM variant of [`decoded_models`]: enumerate the distinct paths first
/// (blocking on state and done atoms), then the factor values along each.
pub fn decoded_fsm_models(enc: &SpaceEncoding) -> Vec<TestCase> {
    let d = enc.dictionary();
    let (mut path_vars, mut value_vars) = (Vec::new(), Vec::new());
    for (i, atom) in d.atoms().iter().enumerate() {
        match atom {
            SemAtom::At { .. } | SemAtom::Done { .. } | SemAtom::Taken { .. } => path_vars.push(VarId(i as u32)),
            SemAtom::Value { .. } => value_vars.push(VarId(i as u32)),
            _ => {}
        }
    }
    let mut solver = Solver::new(enc.cnf());
    let mut out = Vec::new();
    for path in enumerate_blocked(enc, &mut solver.clone(), &[], &path_vars) {
        let assignment = enc.encode_test(&path).unwrap();
        let fixed: Vec<Literal> = path_vars.iter().map(|&v| Literal::new(v, assignment.value(v))).collect();
        out.extend(enumerate_blocked(enc, &mut solver, &fixed, &value_vars));
    }
    out
}

pub fn as_set(tests: Vec<TestCase>) -> BTreeSet<String> {
    tests.iter().map(|t| serde_json::to_string(t).unwrap()).collect()
}

// Random desk-scale models.

fn boolean(name: String) -> Factor {
    Factor::boolean(name)
}

pub fn arb_ca() -> impl Strategy<Value = (SpaceModel, usize)> {
    (prop::collection::vec(2usize..=3, 2..=4), any::<bool>(), any::<prop::sample::Index>(), 1usize..=3).prop_map(
        |(domains, constrained, pick, t)| {
            let factors: Vec<Factor> = domains
                .iter()
                .enumerate()
                .map(|(i, &d)| Factor::new(format!("f{i}"), (0..d).map(|v| format!("v{v}"))))
                .collect();
            let mut m = CoveringArrayModel::new(factors);
            if constrained {
                let a = pick.index(m.factors.len());
                let b = (a + 1) % m.factors.len();
                m.constraint = Some(
                    Constraint::and(vec![
                        Constraint::atom(Atom::value(format!("f{a}"), "v0")),
                        Constraint::atom(Atom::value(format!("f{b}"), "v0")),
                    ])
                    .negate(),
                );
            }
            let t = t.min(m.factors.len());
            (SpaceModel::Ca(m), t)
        },
    )
}

pub fn arb_seq() -> impl Strategy<Value = (SpaceModel, usize)> {
    (3usize..=4, prop::option::of(2usize..=3), any::<bool>()).prop_map(|(n, max_len, constrained)| {
        let events: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let mut m = match max_len {
            None => SequenceModel::permutation(events),
            Some(l) => SequenceModel::variable_length(events, l),
        };
        if constrained {
            m.constraint = Some(Constraint::atom(Atom::Before("e1".into(), "e0".into())).negate());
        }
        (SpaceModel::Sequence(m), 2)
    })
}

/// Chain `i -> A0 -> ... -> f` with random exits and skips; every guard
/// tests a factor of its source state, so the chain stays satisfiable.
pub fn arb_fsm() -> impl Strategy<Value = (SpaceModel, usize)> {
    (2usize..=4, prop::collection::vec((0usize..=2, any::<bool>(), any::<bool>(), any::<bool>()), 4)).prop_map(
        |(n, shape)| {
            let inner: Vec<String> = (0..n).map(|k| format!("A{k}")).collect();
            let mut states = vec!["i".to_string()];
            states.extend(inner.iter().cloned());
            states.push("f".into());
            let mut factors = Vec::new();
            let mut bindings = IndexMap::new();
            let mut transitions = vec![Transition::new("t_i", "i", "A0")];
            for (k, name) in inner.iter().enumerate() {
                let (nf, exit, skip, guard_true) = shape[k];
                for j in 0..nf {
                    let f = format!("{name}_{j}");
                    bindings.insert(f.clone(), name.clone());
                    factors.push(boolean(f));
                }
                let guard = (nf > 0)
                    .then(|| Constraint::atom(Atom::value(format!("{name}_0"), if guard_true { "T" } else { "F" })));
                let next = inner.get(k + 1).cloned().unwrap_or_else(|| "f".into());
                let mut chain = Transition::new(format!("t_{name}"), name.clone(), next);
                chain.guard = guard.clone();
                transitions.push(chain);
                if exit && k + 1 < n {
                    transitions.push(Transition::new(format!("x_{name}"), name.clone(), "f"));
                }
                if skip && k + 2 < n {
                    let mut t = Transition::new(format!("s_{name}"), name.clone(), inner[k + 2].clone());
                    t.guard = guard.map(Constraint::negate);
                    transitions.push(t);
                }
            }
            let m = FsmModel {
                states,
                initial: "i".into(),
                final_state: "f".into(),
                transitions,
                factors,
                bindings,
                constraint: None,
                path_bound: None,
            };
            (SpaceModel::Fsm(m), 2)
        },
    )
}

pub fn arb_model() -> impl Strategy<Value = (SpaceModel, usize)> {
    prop_oneof![arb_ca(), arb_seq(), arb_fsm()]
}
