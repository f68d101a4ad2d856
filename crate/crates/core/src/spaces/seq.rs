use itertools::Itertools;

use super::{
    check_unique, Atom, Constraint, Dictionary, Result, SemAtom, SpaceEncoding, SpaceError, SpaceModel, TestCase,
};
use crate::logic::{Assignment, BoolExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceVariant {
    /// Every event exactly once.
    Permutation,
    /// Up to `max_len` events; events may repeat or be absent.
    VariableLength { max_len: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceModel {
    pub events: Vec<String>,
    pub variant: SequenceVariant,
    /// Over `before(a, b)` atoms.
    pub constraint: Option<Constraint>,
}

impl SequenceModel {
    pub fn permutation<S: Into<String>>(events: impl IntoIterator<Item = S>) -> Self {
        SequenceModel {
            events: events.into_iter().map(Into::into).collect(),
            variant: SequenceVariant::Permutation,
            constraint: None,
        }
    }

    pub fn variable_length<S: Into<String>>(events: impl IntoIterator<Item = S>, max_len: usize) -> Self {
        SequenceModel {
            events: events.into_iter().map(Into::into).collect(),
            variant: SequenceVariant::VariableLength { max_len },
            constraint: None,
        }
    }

    pub fn with_constraint(mut self, constraint: Constraint) -> Self {
        self.constraint = Some(constraint);
        self
    }

    /// Number of positions in the encoding.
    pub fn length(&self) -> usize {
        match self.variant {
            SequenceVariant::Permutation => self.events.len(),
            SequenceVariant::VariableLength { max_len } => max_len,
        }
    }

    pub fn event_index(&self, name: &str) -> Result<usize> {
        self.events.iter().position(|e| e == name).ok_or_else(|| SpaceError::UnknownEvent(name.to_string()))
    }
}

/// Atoms `occupy(event, pos)` (plus `empty(pos)` for variable length),
/// position-major.
pub fn encode_seq_space(m: &SequenceModel) -> Result<SpaceEncoding> {
    if m.events.is_empty() {
        return Err(SpaceError::InvalidModel("no events".into()));
    }
    check_unique("event", m.events.iter().map(String::as_str))?;
    let len = m.length();
    let variable = matches!(m.variant, SequenceVariant::VariableLength { .. });
    if len == 0 {
        return Err(SpaceError::InvalidModel("max length must be at least 1".into()));
    }

    let mut dictionary = Dictionary::default();
    for pos in 0..len {
        for event in 0..m.events.len() {
            dictionary.add(SemAtom::Occupy { event, pos });
        }
        if variable {
            dictionary.add(SemAtom::Empty { pos });
        }
    }

    let occupy = |event, pos| dictionary.lit(SemAtom::Occupy { event, pos });
    let mut parts = Vec::new();
    for pos in 0..len {
        let mut slot: Vec<BoolExpr> = (0..m.events.len()).map(|e| occupy(e, pos)).collect();
        if variable {
            slot.push(dictionary.lit(SemAtom::Empty { pos }));
        }
        parts.push(BoolExpr::exactly_one(slot));
    }
    if variable {
        for pos in 1..len {
            let empty = |pos| dictionary.lit(SemAtom::Empty { pos });
            parts.push(empty(pos - 1).implies(empty(pos)));
        }
    } else {
        for event in 0..m.events.len() {
            parts.push(BoolExpr::exactly_one((0..len).map(|pos| occupy(event, pos)).collect()));
        }
    }
    if let Some(c) = &m.constraint {
        parts.push(c.try_map_atoms(&mut |atom: &Atom| match atom {
            Atom::Before(a, b) => Ok(subsequence(&dictionary, len, &[m.event_index(a)?, m.event_index(b)?])),
            other => Err(SpaceError::ForeignAtom(other.to_string())),
        })?);
    }
    SpaceEncoding::new(SpaceModel::Sequence(m.clone()), dictionary, BoolExpr::and(parts), 0)
}

/// The events occur in this order at strictly increasing positions.
fn subsequence(dictionary: &Dictionary, len: usize, events: &[usize]) -> BoolExpr {
    let terms = (0..len)
        .combinations(events.len())
        .map(|positions| {
            BoolExpr::and(
                events
                    .iter()
                    .zip(positions)
                    .map(|(&event, pos)| dictionary.lit(SemAtom::Occupy { event, pos }))
                    .collect(),
            )
        })
        .collect();
    BoolExpr::or(terms)
}

/// Subsequence containment of `ordered_events`, interleaving allowed.
pub fn encode_order_requirement(enc: &SpaceEncoding, ordered_events: &[&str]) -> Result<BoolExpr> {
    let SpaceModel::Sequence(m) = enc.model() else {
        return Err(SpaceError::InvalidRequirement("event order requires a sequence space".into()));
    };
    if ordered_events.len() < 2 {
        return Err(SpaceError::InvalidRequirement("an event order needs at least two events".into()));
    }
    let events = ordered_events.iter().map(|e| m.event_index(e)).collect::<Result<Vec<_>>>()?;
    if m.variant == SequenceVariant::Permutation && !events.iter().all_unique() {
        return Err(SpaceError::InvalidRequirement(format!(
            "events repeat in `{}` but a permutation holds each event once",
            ordered_events.join(", ")
        )));
    }
    Ok(subsequence(enc.dictionary(), m.length(), &events))
}

pub fn decode_seq_test(enc: &SpaceEncoding, a: &Assignment) -> Result<TestCase> {
    let SpaceModel::Sequence(m) = enc.model() else {
        return Err(SpaceError::MalformedAssignment("not a sequence space".into()));
    };
    let d = enc.dictionary();
    let truth = |atom| {
        let v = d.var(atom).expect("sequence atom");
        a.get(v).ok_or_else(|| SpaceError::MalformedAssignment(format!("missing {}", enc.atom_name(v))))
    };
    let mut out = Vec::new();
    let mut ended = false;
    for pos in 0..m.length() {
        let mut here = None;
        for event in 0..m.events.len() {
            if truth(SemAtom::Occupy { event, pos })? {
                if here.is_some() {
                    return Err(SpaceError::MalformedAssignment(format!("two events at position {pos}")));
                }
                here = Some(event);
            }
        }
        match here {
            Some(_) if ended => {
                return Err(SpaceError::MalformedAssignment(format!("event after the end at position {pos}")))
            }
            Some(e) => out.push(m.events[e].clone()),
            None => ended = true,
        }
    }
    if m.variant == SequenceVariant::Permutation && out.len() != m.events.len() {
        return Err(SpaceError::MalformedAssignment("permutation with empty positions".into()));
    }
    Ok(TestCase::EventSeq(out))
}

pub(super) fn encode_events(enc: &SpaceEncoding, m: &SequenceModel, events: &[String]) -> Result<Assignment> {
    let len = m.length();
    if events.len() > len {
        return Err(SpaceError::Undecodable(format!("{} events exceed the length bound {len}", events.len())));
    }
    let d = enc.dictionary();
    let mut a = Assignment::all_false(d.len());
    for (pos, name) in events.iter().enumerate() {
        let event = m.event_index(name).map_err(|e| SpaceError::Undecodable(e.to_string()))?;
        a.set(d.var(SemAtom::Occupy { event, pos }).expect("occupy atom"), true);
    }
    if let SequenceVariant::VariableLength { .. } = m.variant {
        for pos in events.len()..len {
            a.set(d.var(SemAtom::Empty { pos }).expect("empty atom"), true);
        }
    }
    Ok(a)
}
