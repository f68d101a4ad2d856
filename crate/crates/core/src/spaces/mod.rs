//! Space models compiled to propositional form.
//!
//! Each encoder allocates its semantic atoms first (dense from variable 0,
//! recorded in a [`Dictionary`]), builds the model constraint `M` as a
//! [`BoolExpr`] over those atoms only, and clause-forms it with Tseitin
//! auxiliaries numbered above the atoms. Keeping `M` as an expression lets
//! the verifier evaluate tests without going through the solver.

mod ca;
mod fsm;
mod seq;

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::logic::{to_cnf, Assignment, BoolExpr, Cnf, SatOutcome, Solver, VarAllocator, VarId};

pub use ca::{decode_ca_test, encode_ca_space, encode_value_tuple, CoveringArrayModel};
pub use fsm::{
    decode_fsm_test, encode_fsm_space, encode_state_pair_requirement, encode_state_sequence, FsmModel, Transition,
};
pub use seq::{decode_seq_test, encode_order_requirement, encode_seq_space, SequenceModel, SequenceVariant};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("factor `{0}` needs at least two values")]
    DomainTooSmall(String),
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("unknown value `{value}` for factor `{factor}`")]
    UnknownValue { factor: String, value: String },
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("atom `{0}` is not meaningful in this kind of model")]
    ForeignAtom(String),
    #[error("model constraint is unsatisfiable: {0}")]
    UnsatisfiableModel(String),
    #[error("invalid requirement: {0}")]
    InvalidRequirement(String),
    #[error("malformed assignment: {0}")]
    MalformedAssignment(String),
    #[error("test case cannot be encoded: {0}")]
    Undecodable(String),
}

pub type Result<T, E = SpaceError> = std::result::Result<T, E>;

/// A parameter with a finite, ordered domain of value labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub name: String,
    pub domain: Vec<String>,
}

impl Factor {
    pub fn new<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Factor { name: name.into(), domain: domain.into_iter().map(Into::into).collect() }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Factor::new(name, ["T", "F"])
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

/// Named atom used in user-written constraints and guards.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `factor=value`
    Value { factor: String, value: String },
    /// `before(a, b)`: some occurrence of `a` precedes some occurrence of `b`.
    Before(String, String),
}

impl Atom {
    pub fn value(factor: impl Into<String>, value: impl Into<String>) -> Self {
        Atom::Value { factor: factor.into(), value: value.into() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Value { factor, value } => write!(f, "{factor}={value}"),
            Atom::Before(a, b) => write!(f, "before({a}, {b})"),
        }
    }
}

/// Constraint over named atoms.
pub type Constraint = BoolExpr<Atom>;

/// Dictionary key: what a solver variable means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemAtom {
    Value { factor: usize, value: usize },
    Occupy { event: usize, pos: usize },
    Empty { pos: usize },
    At { state: usize, step: usize },
    Done { step: usize },
    Taken { transition: usize, step: usize },
    Visited { state: usize },
}

/// Bidirectional map between semantic atoms and the dense variables
/// `0..len()`.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    atoms: Vec<SemAtom>,
    index: HashMap<SemAtom, VarId>,
}

impl Dictionary {
    pub(crate) fn add(&mut self, atom: SemAtom) -> VarId {
        let v = VarId(self.atoms.len() as u32);
        let previous = self.index.insert(atom, v);
        debug_assert!(previous.is_none(), "atom {atom:?} allocated twice");
        self.atoms.push(atom);
        v
    }

    pub fn var(&self, atom: SemAtom) -> Option<VarId> {
        self.index.get(&atom).copied()
    }

    pub fn atom(&self, v: VarId) -> Option<SemAtom> {
        self.atoms.get(v.index()).copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[SemAtom] {
        &self.atoms
    }

    pub(crate) fn lit(&self, atom: SemAtom) -> BoolExpr {
        BoolExpr::var(self.index[&atom])
    }
}

/// Any of the three supported space models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceModel {
    Ca(CoveringArrayModel),
    Sequence(SequenceModel),
    Fsm(FsmModel),
}

impl SpaceModel {
    pub fn kind(&self) -> SpaceKind {
        match self {
            SpaceModel::Ca(_) => SpaceKind::Ca,
            SpaceModel::Sequence(_) => SpaceKind::Sequence,
            SpaceModel::Fsm(_) => SpaceKind::Fsm,
        }
    }

    pub fn encode(&self) -> Result<SpaceEncoding> {
        match self {
            SpaceModel::Ca(m) => encode_ca_space(m),
            SpaceModel::Sequence(m) => encode_seq_space(m),
            SpaceModel::Fsm(m) => encode_fsm_space(m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Ca,
    Sequence,
    Fsm,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::Ca => "ca",
            SpaceKind::Sequence => "sequence",
            SpaceKind::Fsm => "fsm",
        })
    }
}

/// A space model compiled to solver form.
#[derive(Clone, Debug)]
pub struct SpaceEncoding {
    model: SpaceModel,
    dictionary: Dictionary,
    constraint: BoolExpr,
    cnf: Cnf,
    // FSM only: the unrolling depth actually used
    path_bound: usize,
}

impl SpaceEncoding {
    fn new(model: SpaceModel, dictionary: Dictionary, constraint: BoolExpr, path_bound: usize) -> Result<Self> {
        let mut fresh = VarAllocator::starting_at(dictionary.len() as u32);
        let mut cnf = to_cnf(&constraint, &mut fresh);
        cnf.var_count = cnf.var_count.max(dictionary.len() as u32);
        let enc = SpaceEncoding { model, dictionary, constraint, cnf, path_bound };
        if let SatOutcome::Unsat = Solver::new(&enc.cnf).solve() {
            return Err(SpaceError::UnsatisfiableModel(match enc.kind() {
                SpaceKind::Fsm => format!("final state is unreachable within {} steps", path_bound),
                kind => format!("no valid {kind} test case exists"),
            }));
        }
        Ok(enc)
    }

    pub fn model(&self) -> &SpaceModel {
        &self.model
    }

    pub fn kind(&self) -> SpaceKind {
        self.model.kind()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    /// `M` as an expression over dictionary atoms only.
    pub fn constraint(&self) -> &BoolExpr {
        &self.constraint
    }

    /// `M` in clause form; variables at or above `dictionary().len()` are
    /// Tseitin auxiliaries.
    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    pub fn path_bound(&self) -> usize {
        self.path_bound
    }

    /// Factors with one-hot value atoms (CA and FSM models).
    pub fn factors(&self) -> &[Factor] {
        match &self.model {
            SpaceModel::Ca(m) => &m.factors,
            SpaceModel::Fsm(m) => &m.factors,
            SpaceModel::Sequence(_) => &[],
        }
    }

    pub fn factor_index(&self, name: &str) -> Result<usize> {
        self.factors().iter().position(|f| f.name == name).ok_or_else(|| SpaceError::UnknownFactor(name.to_string()))
    }

    pub fn atom_name(&self, v: VarId) -> String {
        let Some(atom) = self.dictionary.atom(v) else {
            return format!("aux{}", v.0);
        };
        match (atom, &self.model) {
            (SemAtom::Value { factor, value }, _) => {
                let f = &self.factors()[factor];
                format!("{}={}", f.name, f.domain[value])
            }
            (SemAtom::Occupy { event, pos }, SpaceModel::Sequence(m)) => format!("{}@{pos}", m.events[event]),
            (SemAtom::Empty { pos }, _) => format!("_@{pos}"),
            (SemAtom::At { state, step }, SpaceModel::Fsm(m)) => format!("{}@{step}", m.states[state]),
            (SemAtom::Done { step }, _) => format!("done@{step}"),
            (SemAtom::Taken { transition, step }, SpaceModel::Fsm(m)) => {
                format!("{}@{step}", m.transitions[transition].name)
            }
            (SemAtom::Visited { state }, SpaceModel::Fsm(m)) => format!("visited({})", m.states[state]),
            (atom, _) => format!("{atom:?}"),
        }
    }

    /// Reads a test case off a model of `M`.
    pub fn decode(&self, a: &Assignment) -> Result<TestCase> {
        match self.kind() {
            SpaceKind::Ca => decode_ca_test(self, a),
            SpaceKind::Sequence => decode_seq_test(self, a),
            SpaceKind::Fsm => decode_fsm_test(self, a),
        }
    }

    /// Re-encodes a test case as a total assignment over the dictionary
    /// atoms. The result need not satisfy `M`; that is for the caller to
    /// evaluate.
    pub fn encode_test(&self, test: &TestCase) -> Result<Assignment> {
        match (&self.model, test) {
            (SpaceModel::Ca(_), TestCase::Row(row)) => ca::encode_row(self, row),
            (SpaceModel::Sequence(m), TestCase::EventSeq(events)) => seq::encode_events(self, m, events),
            (SpaceModel::Fsm(m), TestCase::FsmPath(path)) => fsm::encode_path(self, m, path),
            (_, other) => {
                Err(SpaceError::Undecodable(format!("{} test case in a {} space", other.kind(), self.kind())))
            }
        }
    }

    /// SHA-256 over the dictionary and the clause form.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind().to_string().as_bytes());
        for i in 0..self.dictionary.len() {
            h.update(self.atom_name(VarId(i as u32)).as_bytes());
            h.update([0]);
        }
        h.update(self.cnf.var_count.to_le_bytes());
        for clause in &self.cnf.clauses {
            for l in clause {
                h.update((l.code() as u32).to_le_bytes());
            }
            h.update(u32::MAX.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// What a requirement asks a test to contain, by model indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    /// `(factor, value)` pairs over distinct factors.
    Values(Vec<(usize, usize)>),
    /// Events in order, interleaving allowed.
    Events(Vec<usize>),
    /// FSM states in visiting order, interleaving allowed.
    States(Vec<usize>),
}

/// One coverage entity as a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Requirement {
    pub id: usize,
    pub expr: BoolExpr,
    pub descriptor: String,
    pub target: Target,
}

impl Requirement {
    pub fn new(enc: &SpaceEncoding, target: Target) -> Result<Self> {
        let (expr, descriptor) = match &target {
            Target::Values(pairs) => {
                let factors = enc.factors();
                let mut named = Vec::with_capacity(pairs.len());
                for &(f, v) in pairs {
                    let factor = factors.get(f).ok_or_else(|| SpaceError::UnknownFactor(format!("#{f}")))?;
                    let value = factor.domain.get(v).ok_or_else(|| SpaceError::UnknownValue {
                        factor: factor.name.clone(),
                        value: format!("#{v}"),
                    })?;
                    named.push((factor.name.as_str(), value.as_str()));
                }
                let expr = encode_value_tuple(enc, &named)?;
                let descriptor = named.iter().map(|(f, v)| format!("{f}={v}")).collect::<Vec<_>>().join(", ");
                (expr, descriptor)
            }
            Target::Events(events) => {
                let SpaceModel::Sequence(m) = enc.model() else {
                    return Err(SpaceError::InvalidRequirement("event order outside a sequence space".into()));
                };
                let names = events
                    .iter()
                    .map(|&e| {
                        m.events.get(e).map(String::as_str).ok_or_else(|| SpaceError::UnknownEvent(format!("#{e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (encode_order_requirement(enc, &names)?, names.join(" before "))
            }
            Target::States(states) => {
                let SpaceModel::Fsm(m) = enc.model() else {
                    return Err(SpaceError::InvalidRequirement("state order outside an fsm space".into()));
                };
                let names = states
                    .iter()
                    .map(|&s| {
                        m.states.get(s).map(String::as_str).ok_or_else(|| SpaceError::UnknownState(format!("#{s}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (encode_state_sequence(enc, &names)?, names.join(" before "))
            }
        };
        Ok(Requirement { id: 0, expr, descriptor, target })
    }
}

/// A concrete test case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestCase {
    /// Factor name to value label, in factor order.
    Row(IndexMap<String, String>),
    #[serde(rename = "events")]
    EventSeq(Vec<String>),
    #[serde(rename = "path")]
    FsmPath(FsmPath),
}

impl TestCase {
    pub fn kind(&self) -> SpaceKind {
        match self {
            TestCase::Row(_) => SpaceKind::Ca,
            TestCase::EventSeq(_) => SpaceKind::Sequence,
            TestCase::FsmPath(_) => SpaceKind::Fsm,
        }
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestCase::Row(row) => {
                let cells: Vec<String> = row.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "{}", cells.join(" "))
            }
            TestCase::EventSeq(events) => write!(f, "[{}]", events.join(", ")),
            TestCase::FsmPath(p) => {
                write!(f, "[{}]", p.states.join(", "))?;
                let set: Vec<String> =
                    p.values.iter().filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}"))).collect();
                if !set.is_empty() {
                    write!(f, " {}", set.join(" "))?;
                }
                Ok(())
            }
        }
    }
}

/// A path from the initial to the final state with the factor values set
/// along it. Factors of unvisited states are `None` ("unset").
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmPath {
    pub states: Vec<String>,
    pub transitions: Vec<String>,
    pub values: IndexMap<String, Option<String>>,
}

pub(crate) fn check_unique<'a>(what: &str, names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(SpaceError::InvalidModel(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

pub(crate) fn check_factors(factors: &[Factor]) -> Result<()> {
    check_unique("factor", factors.iter().map(|f| f.name.as_str()))?;
    for f in factors {
        if f.domain.len() < 2 {
            return Err(SpaceError::DomainTooSmall(f.name.clone()));
        }
        check_unique(&format!("value of `{}`", f.name), f.domain.iter().map(String::as_str))?;
    }
    Ok(())
}

/// Compiles a `factor=value` constraint against one-hot factor atoms.
pub(crate) fn compile_value_constraint(
    factors: &[Factor],
    dictionary: &Dictionary,
    constraint: &Constraint,
) -> Result<BoolExpr> {
    constraint.try_map_atoms(&mut |atom: &Atom| match atom {
        Atom::Value { factor, value } => {
            let (fi, vi) = resolve_value(factors, factor, value)?;
            Ok(dictionary.lit(SemAtom::Value { factor: fi, value: vi }))
        }
        other => Err(SpaceError::ForeignAtom(other.to_string())),
    })
}

pub(crate) fn resolve_value(factors: &[Factor], factor: &str, value: &str) -> Result<(usize, usize)> {
    let fi =
        factors.iter().position(|f| f.name == factor).ok_or_else(|| SpaceError::UnknownFactor(factor.to_string()))?;
    let vi = factors[fi]
        .value_index(value)
        .ok_or_else(|| SpaceError::UnknownValue { factor: factor.to_string(), value: value.to_string() })?;
    Ok((fi, vi))
}

pub(crate) fn one_hot_value(enc: &SpaceEncoding, a: &Assignment, factor: usize) -> Result<Option<usize>> {
    let f = &enc.factors()[factor];
    let mut found = None;
    for v in 0..f.domain.len() {
        let var = enc.dictionary.var(SemAtom::Value { factor, value: v }).expect("value atom");
        if a.get(var).ok_or_else(|| SpaceError::MalformedAssignment(format!("missing {}", enc.atom_name(var))))? {
            if found.is_some() {
                return Err(SpaceError::MalformedAssignment(format!("factor `{}` has two values", f.name)));
            }
            found = Some(v);
        }
    }
    Ok(found)
}
