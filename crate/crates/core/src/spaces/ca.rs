use indexmap::IndexMap;

use super::{
    check_factors, compile_value_constraint, one_hot_value, resolve_value, Constraint, Dictionary, Factor, Result,
    SemAtom, SpaceEncoding, SpaceError, SpaceModel, TestCase,
};
use crate::logic::{Assignment, BoolExpr};

/// Factors with finite domains plus an optional system-wide constraint over
/// `factor=value` atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringArrayModel {
    pub factors: Vec<Factor>,
    pub constraint: Option<Constraint>,
}

impl CoveringArrayModel {
    pub fn new(factors: Vec<Factor>) -> Self {
        CoveringArrayModel { factors, constraint: None }
    }

    pub fn with_constraint(mut self, constraint: Constraint) -> Self {
        self.constraint = Some(constraint);
        self
    }
}

/// One atom per `(factor, value)`; `M` is an exactly-one group per factor
/// conjoined with the system constraint.
pub fn encode_ca_space(m: &CoveringArrayModel) -> Result<SpaceEncoding> {
    check_factors(&m.factors)?;
    let mut dictionary = Dictionary::default();
    for (fi, f) in m.factors.iter().enumerate() {
        for vi in 0..f.domain.len() {
            dictionary.add(SemAtom::Value { factor: fi, value: vi });
        }
    }
    let mut parts = one_hot_groups(&m.factors, &dictionary);
    if let Some(c) = &m.constraint {
        parts.push(compile_value_constraint(&m.factors, &dictionary, c)?);
    }
    SpaceEncoding::new(SpaceModel::Ca(m.clone()), dictionary, BoolExpr::and(parts), 0)
}

pub(super) fn one_hot_groups(factors: &[Factor], dictionary: &Dictionary) -> Vec<BoolExpr> {
    factors
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let atoms =
                (0..f.domain.len()).map(|vi| dictionary.lit(SemAtom::Value { factor: fi, value: vi })).collect();
            BoolExpr::exactly_one(atoms)
        })
        .collect()
}

/// Conjunction of the positive atoms for `factor=value` pairs over distinct
/// factors.
pub fn encode_value_tuple(enc: &SpaceEncoding, assignments: &[(&str, &str)]) -> Result<BoolExpr> {
    let mut seen = Vec::with_capacity(assignments.len());
    let mut atoms = Vec::with_capacity(assignments.len());
    for &(factor, value) in assignments {
        let (fi, vi) = resolve_value(enc.factors(), factor, value)?;
        if seen.contains(&fi) {
            return Err(SpaceError::InvalidRequirement(format!("factor `{factor}` repeated in tuple")));
        }
        seen.push(fi);
        atoms.push(enc.dictionary().lit(SemAtom::Value { factor: fi, value: vi }));
    }
    if atoms.is_empty() {
        return Err(SpaceError::InvalidRequirement("empty tuple".into()));
    }
    Ok(BoolExpr::and(atoms))
}

pub fn decode_ca_test(enc: &SpaceEncoding, a: &Assignment) -> Result<TestCase> {
    let mut row = IndexMap::new();
    for (fi, f) in enc.factors().iter().enumerate() {
        let v = one_hot_value(enc, a, fi)?
            .ok_or_else(|| SpaceError::MalformedAssignment(format!("factor `{}` has no value", f.name)))?;
        row.insert(f.name.clone(), f.domain[v].clone());
    }
    Ok(TestCase::Row(row))
}

pub(super) fn encode_row(enc: &SpaceEncoding, row: &IndexMap<String, String>) -> Result<Assignment> {
    let mut a = Assignment::all_false(enc.dictionary().len());
    for (factor, value) in row {
        let (fi, vi) =
            resolve_value(enc.factors(), factor, value).map_err(|e| SpaceError::Undecodable(e.to_string()))?;
        a.set(enc.dictionary().var(SemAtom::Value { factor: fi, value: vi }).expect("value atom"), true);
    }
    Ok(a)
}
