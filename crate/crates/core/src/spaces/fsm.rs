use indexmap::IndexMap;
use itertools::Itertools;

use super::{
    check_factors, check_unique, compile_value_constraint, one_hot_value, resolve_value, Constraint, Dictionary,
    Factor, FsmPath, Result, SemAtom, SpaceEncoding, SpaceError, SpaceModel, TestCase,
};
use crate::logic::{Assignment, BoolExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub from: String,
    pub to: String,
    /// Over `factor=value` atoms; `None` means always enabled.
    pub guard: Option<Constraint>,
}

impl Transition {
    pub fn new(name: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        Transition { name: name.into(), from: from.into(), to: to.into(), guard: None }
    }

    pub fn guarded(mut self, guard: Constraint) -> Self {
        self.guard = Some(guard);
        self
    }
}

/// State machine whose tests are paths from `initial` to `final_state`.
/// Every factor is set in exactly one state (its binding) and only when
/// that state is visited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmModel {
    pub states: Vec<String>,
    pub initial: String,
    pub final_state: String,
    pub transitions: Vec<Transition>,
    pub factors: Vec<Factor>,
    /// Factor name to the state defining it.
    pub bindings: IndexMap<String, String>,
    pub constraint: Option<Constraint>,
    /// Last step index of the unrolling; defaults to `states.len() + 1`.
    pub path_bound: Option<usize>,
}

impl FsmModel {
    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states.iter().position(|s| s == name).ok_or_else(|| SpaceError::UnknownState(name.to_string()))
    }

    pub fn transition_index(&self, name: &str) -> Result<usize> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| SpaceError::UnknownTransition(name.to_string()))
    }

    pub fn initial_index(&self) -> Result<usize> {
        self.state_index(&self.initial)
    }

    pub fn final_index(&self) -> Result<usize> {
        self.state_index(&self.final_state)
    }

    pub fn effective_path_bound(&self) -> usize {
        self.path_bound.unwrap_or(self.states.len() + 1)
    }

    /// State index defining each factor, in factor order.
    pub fn factor_states(&self) -> Result<Vec<usize>> {
        self.factors
            .iter()
            .map(|f| {
                let state = self
                    .bindings
                    .get(&f.name)
                    .ok_or_else(|| SpaceError::InvalidModel(format!("factor `{}` is not bound to a state", f.name)))?;
                self.state_index(state)
            })
            .collect()
    }

    /// `reach[a][b]` iff `b` is reachable from `a` (reflexive), guards ignored.
    pub fn reachability(&self) -> Result<Vec<Vec<bool>>> {
        let n = self.states.len();
        let mut succ = vec![Vec::new(); n];
        for t in &self.transitions {
            succ[self.state_index(&t.from)?].push(self.state_index(&t.to)?);
        }
        let mut reach = vec![vec![false; n]; n];
        for (s, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![s];
            row[s] = true;
            while let Some(u) = stack.pop() {
                for &v in &succ[u] {
                    if !row[v] {
                        row[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        Ok(reach)
    }

    /// States that can appear together on one path: one reaches the other.
    pub fn co_occurrence(&self) -> Result<Vec<Vec<bool>>> {
        let reach = self.reachability()?;
        let n = reach.len();
        Ok((0..n).map(|a| (0..n).map(|b| reach[a][b] || reach[b][a]).collect()).collect())
    }

    fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(SpaceError::InvalidModel("no states".into()));
        }
        check_unique("state", self.states.iter().map(String::as_str))?;
        check_unique("transition", self.transitions.iter().map(|t| t.name.as_str()))?;
        check_factors(&self.factors)?;
        let initial = self.initial_index()?;
        let fin = self.final_index()?;
        if initial == fin {
            return Err(SpaceError::InvalidModel("initial and final state coincide".into()));
        }
        for t in &self.transitions {
            if self.state_index(&t.to)? == initial {
                return Err(SpaceError::InvalidModel(format!("transition `{}` enters the initial state", t.name)));
            }
            if self.state_index(&t.from)? == fin {
                return Err(SpaceError::InvalidModel(format!("transition `{}` leaves the final state", t.name)));
            }
        }
        for (factor, state) in &self.bindings {
            if !self.factors.iter().any(|f| &f.name == factor) {
                return Err(SpaceError::UnknownFactor(factor.clone()));
            }
            self.state_index(state)?;
        }
        self.factor_states()?;
        if self.effective_path_bound() < 2 {
            return Err(SpaceError::InvalidModel("path bound must be at least 2".into()));
        }
        Ok(())
    }
}

/// Step-indexed unrolling of the machine up to the path bound.
///
/// Atoms, in allocation order: per step `k` the state atoms `at(s, k)`, the
/// padding atom `done(k)` and the transition atoms `taken(t, k)` (k below
/// the bound); then `visited(s)` per state; then the one-hot factor atoms.
/// A factor of an unvisited state has all its atoms false.
pub fn encode_fsm_space(m: &FsmModel) -> Result<SpaceEncoding> {
    m.validate()?;
    let bound = m.effective_path_bound();
    let initial = m.initial_index()?;
    let fin = m.final_index()?;
    let n_states = m.states.len();
    let ends: Vec<(usize, usize)> =
        m.transitions.iter().map(|t| Ok((m.state_index(&t.from)?, m.state_index(&t.to)?))).collect::<Result<_>>()?;
    let factor_states = m.factor_states()?;

    let mut d = Dictionary::default();
    for step in 0..=bound {
        for state in 0..n_states {
            d.add(SemAtom::At { state, step });
        }
        d.add(SemAtom::Done { step });
        if step < bound {
            for transition in 0..m.transitions.len() {
                d.add(SemAtom::Taken { transition, step });
            }
        }
    }
    for state in 0..n_states {
        d.add(SemAtom::Visited { state });
    }
    for (fi, f) in m.factors.iter().enumerate() {
        for vi in 0..f.domain.len() {
            d.add(SemAtom::Value { factor: fi, value: vi });
        }
    }

    let at = |state, step| d.lit(SemAtom::At { state, step });
    let done = |step| d.lit(SemAtom::Done { step });
    let taken = |transition, step| d.lit(SemAtom::Taken { transition, step });
    let guards: Vec<Option<BoolExpr>> = m
        .transitions
        .iter()
        .map(|t| t.guard.as_ref().map(|g| compile_value_constraint(&m.factors, &d, g)).transpose())
        .collect::<Result<_>>()?;

    let mut parts = vec![at(initial, 0)];
    for step in 0..=bound {
        let mut slot: Vec<BoolExpr> = (0..n_states).map(|s| at(s, step)).collect();
        slot.push(done(step));
        parts.push(BoolExpr::exactly_one(slot));
    }
    for step in 0..bound {
        for (ti, &(from, to)) in ends.iter().enumerate() {
            let mut effect = vec![at(from, step), at(to, step + 1)];
            if let Some(g) = &guards[ti] {
                effect.push(g.clone());
            }
            parts.push(taken(ti, step).implies(BoolExpr::and(effect)));
        }
        parts.push(BoolExpr::at_most_one((0..ends.len()).map(|t| taken(t, step)).collect()));
        parts.push(at(fin, step).implies(done(step + 1)));
        parts.push(done(step).implies(done(step + 1)));
        parts.push(done(step + 1).implies(BoolExpr::or(vec![at(fin, step), done(step)])));
        for s in 0..n_states {
            let incoming = ends.iter().positions(|&(_, to)| to == s).map(|t| taken(t, step)).collect();
            parts.push(at(s, step + 1).implies(BoolExpr::or(incoming)));
        }
    }
    for step in 0..=bound {
        for s in (0..n_states).filter(|&s| s != fin) {
            let outgoing = if step < bound {
                ends.iter().positions(|&(from, _)| from == s).map(|t| taken(t, step)).collect()
            } else {
                Vec::new()
            };
            parts.push(at(s, step).implies(BoolExpr::or(outgoing)));
        }
    }
    parts.push(BoolExpr::or((0..=bound).map(|step| at(fin, step)).collect()));
    for s in 0..n_states {
        let visited = d.lit(SemAtom::Visited { state: s });
        parts.push(visited.iff(BoolExpr::or((0..=bound).map(|step| at(s, step)).collect())));
    }
    for (fi, f) in m.factors.iter().enumerate() {
        let visited = d.lit(SemAtom::Visited { state: factor_states[fi] });
        let atoms: Vec<BoolExpr> =
            (0..f.domain.len()).map(|vi| d.lit(SemAtom::Value { factor: fi, value: vi })).collect();
        parts.push(visited.clone().implies(BoolExpr::exactly_one(atoms.clone())));
        parts.push(visited.negate().implies(BoolExpr::and(atoms.into_iter().map(BoolExpr::negate).collect())));
    }
    if let Some(c) = &m.constraint {
        parts.push(compile_value_constraint(&m.factors, &d, c)?);
    }
    SpaceEncoding::new(SpaceModel::Fsm(m.clone()), d, BoolExpr::and(parts), bound)
}

/// `s1` is visited at some step before `s2`.
pub fn encode_state_pair_requirement(enc: &SpaceEncoding, s1: &str, s2: &str) -> Result<BoolExpr> {
    encode_state_sequence(enc, &[s1, s2])
}

/// The states are visited in this order, other states interleaved.
pub fn encode_state_sequence(enc: &SpaceEncoding, states: &[&str]) -> Result<BoolExpr> {
    let SpaceModel::Fsm(m) = enc.model() else {
        return Err(SpaceError::InvalidRequirement("state order requires an fsm space".into()));
    };
    if states.len() < 2 {
        return Err(SpaceError::InvalidRequirement("a state order needs at least two states".into()));
    }
    let idx = states.iter().map(|s| m.state_index(s)).collect::<Result<Vec<_>>>()?;
    if !idx.iter().all_unique() {
        return Err(SpaceError::InvalidRequirement(format!("states repeat in `{}`", states.join(", "))));
    }
    let d = enc.dictionary();
    let terms = (0..=enc.path_bound())
        .combinations(idx.len())
        .map(|steps| {
            BoolExpr::and(idx.iter().zip(steps).map(|(&state, step)| d.lit(SemAtom::At { state, step })).collect())
        })
        .collect();
    Ok(BoolExpr::or(terms))
}

pub fn decode_fsm_test(enc: &SpaceEncoding, a: &Assignment) -> Result<TestCase> {
    let SpaceModel::Fsm(m) = enc.model() else {
        return Err(SpaceError::MalformedAssignment("not an fsm space".into()));
    };
    let d = enc.dictionary();
    let truth = |atom| {
        let v = d.var(atom).expect("fsm atom");
        a.get(v).ok_or_else(|| SpaceError::MalformedAssignment(format!("missing {}", enc.atom_name(v))))
    };
    let bound = enc.path_bound();
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut visited = vec![false; m.states.len()];
    for step in 0..=bound {
        if truth(SemAtom::Done { step })? {
            break;
        }
        let here: Vec<usize> =
            (0..m.states.len()).filter_map(|s| truth(SemAtom::At { state: s, step }).ok()?.then_some(s)).collect();
        let [s] = here[..] else {
            return Err(SpaceError::MalformedAssignment(format!("{} states at step {step}", here.len())));
        };
        visited[s] = true;
        states.push(m.states[s].clone());
        if step < bound {
            let fired: Vec<usize> = (0..m.transitions.len())
                .filter_map(|t| truth(SemAtom::Taken { transition: t, step }).ok()?.then_some(t))
                .collect();
            match fired[..] {
                [] => {}
                [t] => transitions.push(m.transitions[t].name.clone()),
                _ => return Err(SpaceError::MalformedAssignment(format!("two transitions at step {step}"))),
            }
        }
    }
    if states.last() != Some(&m.final_state) {
        return Err(SpaceError::MalformedAssignment("path does not end in the final state".into()));
    }
    let factor_states = m.factor_states()?;
    let mut values = IndexMap::new();
    for (fi, f) in m.factors.iter().enumerate() {
        let v = one_hot_value(enc, a, fi)?;
        let value = match (visited[factor_states[fi]], v) {
            (true, Some(v)) => Some(f.domain[v].clone()),
            (false, None) => None,
            (true, None) => {
                return Err(SpaceError::MalformedAssignment(format!("factor `{}` unset on a visited state", f.name)))
            }
            (false, Some(_)) => {
                return Err(SpaceError::MalformedAssignment(format!("factor `{}` set on an unvisited state", f.name)))
            }
        };
        values.insert(f.name.clone(), value);
    }
    Ok(TestCase::FsmPath(FsmPath { states, transitions, values }))
}

pub(super) fn encode_path(enc: &SpaceEncoding, m: &FsmModel, path: &FsmPath) -> Result<Assignment> {
    let undecodable = |e: SpaceError| SpaceError::Undecodable(e.to_string());
    let bound = enc.path_bound();
    if path.states.len() > bound + 1 || path.transitions.len() > bound {
        return Err(SpaceError::Undecodable(format!("path longer than the bound of {bound} steps")));
    }
    let d = enc.dictionary();
    let mut a = Assignment::all_false(d.len());
    let mut set = |atom| a.set(d.var(atom).expect("fsm atom"), true);
    for (step, name) in path.states.iter().enumerate() {
        let state = m.state_index(name).map_err(undecodable)?;
        set(SemAtom::At { state, step });
        set(SemAtom::Visited { state });
    }
    for step in path.states.len()..=bound {
        set(SemAtom::Done { step });
    }
    for (step, name) in path.transitions.iter().enumerate() {
        let transition = m.transition_index(name).map_err(undecodable)?;
        set(SemAtom::Taken { transition, step });
    }
    for (factor, value) in &path.values {
        if let Some(value) = value {
            let (fi, vi) = resolve_value(&m.factors, factor, value).map_err(undecodable)?;
            set(SemAtom::Value { factor: fi, value: vi });
        } else if !m.factors.iter().any(|f| &f.name == factor) {
            return Err(SpaceError::Undecodable(format!("unknown factor `{factor}`")));
        }
    }
    Ok(a)
}
