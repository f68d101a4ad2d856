//! Candidate requirements implied by a coverage criterion, filtered to the
//! valid ones (`r ∧ M` satisfiable).

use std::collections::HashSet;
use std::fmt;

use itertools::Itertools;

use crate::pool::RequirementPool;
use crate::spaces::{Requirement, SequenceVariant, SpaceEncoding, SpaceError, SpaceKind, SpaceModel, Target};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerateError {
    #[error("criterion `{criterion}` does not apply to a {kind} model")]
    Mismatch { criterion: String, kind: SpaceKind },
    #[error("strength {strength} is out of range: {reason}")]
    StrengthOutOfRange { strength: usize, reason: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Coverage criterion. On FSM models `CaStrength` covers value tuples of
/// co-occurring factors and `SeqStrength` covers state orderings, so
/// `FsmHybrid { v, s }` is `Composite([CaStrength(v), SeqStrength(s)])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Criterion {
    CaStrength(usize),
    SeqStrength(usize),
    FsmHybrid { value_t: usize, seq_t: usize },
    Composite(Vec<Criterion>),
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::CaStrength(t) => write!(f, "strength {t}"),
            Criterion::SeqStrength(t) => write!(f, "seq-strength {t}"),
            Criterion::FsmHybrid { value_t, seq_t } => write!(f, "hybrid value={value_t} seq={seq_t}"),
            Criterion::Composite(parts) => {
                if parts.is_empty() {
                    return f.write_str("none");
                }
                write!(f, "{}", parts.iter().join(" + "))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerateOptions {
    /// Whether FSM state orderings may mention the initial and final states.
    pub include_terminal_states: bool,
    /// Worker threads for the validity filter.
    pub jobs: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { include_terminal_states: false, jobs: 1 }
    }
}

/// Valid requirements in candidate order with dense ids.
#[derive(Clone, Debug, Default)]
pub struct RequirementSet {
    pub criterion: String,
    pub requirements: Vec<Requirement>,
    pub candidates: usize,
    /// Descriptors of candidates whose conjunction with `M` is unsatisfiable.
    pub invalid: Vec<String>,
}

impl RequirementSet {
    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn valid(&self) -> usize {
        self.requirements.len()
    }

    pub fn get(&self, id: usize) -> Option<&Requirement> {
        self.requirements.get(id)
    }

    fn from_parts(criterion: String, candidates: usize, kept: Vec<Requirement>, invalid: Vec<String>) -> Self {
        let requirements = kept
            .into_iter()
            .enumerate()
            .map(|(id, mut r)| {
                r.id = id;
                r
            })
            .collect();
        RequirementSet { criterion, requirements, candidates, invalid }
    }
}

/// Candidate targets in enumeration order; `false` marks candidates the
/// reachability pre-filter already rejected.
type Candidates = Vec<(Target, bool)>;

/// Runs the validity filter over candidate targets in order.
fn filter(
    enc: &SpaceEncoding,
    candidates: Candidates,
    jobs: usize,
    criterion: String,
) -> Result<RequirementSet, EnumerateError> {
    let mut reqs = Vec::with_capacity(candidates.len());
    for (target, _) in &candidates {
        reqs.push(Requirement::new(enc, target.clone())?);
    }
    let pool = RequirementPool::new(enc, reqs.iter().zip(&candidates).filter(|(_, c)| c.1).map(|(r, _)| &r.expr));
    let mut verdicts = pool.validity(jobs).into_iter();
    let total = reqs.len();
    let mut kept = Vec::new();
    let mut invalid = Vec::new();
    for (r, (_, checked)) in reqs.into_iter().zip(candidates) {
        if checked && verdicts.next().expect("one verdict per checked candidate") {
            kept.push(r);
        } else {
            invalid.push(r.descriptor);
        }
    }
    Ok(RequirementSet::from_parts(criterion, total, kept, invalid))
}

fn value_tuples(domains: &[usize], t: usize) -> impl Iterator<Item = Vec<(usize, usize)>> + '_ {
    (0..domains.len()).combinations(t).flat_map(move |factors| {
        factors
            .iter()
            .map(|&f| 0..domains[f])
            .multi_cartesian_product()
            .map(move |values| factors.iter().copied().zip(values).collect::<Vec<_>>())
    })
}

fn check_strength(t: usize, min: usize, max: usize, what: &str) -> Result<(), EnumerateError> {
    if t < min || t > max {
        return Err(EnumerateError::StrengthOutOfRange {
            strength: t,
            reason: format!("must lie in {min}..={max} for {what}"),
        });
    }
    Ok(())
}

/// Every value combination of every `t`-subset of factors, factor-major
/// lexicographic, kept iff jointly satisfiable with `M`.
pub fn enumerate_ca(enc: &SpaceEncoding, t: usize) -> Result<RequirementSet, EnumerateError> {
    enumerate_ca_with(enc, t, &EnumerateOptions::default())
}

fn enumerate_ca_with(enc: &SpaceEncoding, t: usize, opts: &EnumerateOptions) -> Result<RequirementSet, EnumerateError> {
    let criterion = Criterion::CaStrength(t).to_string();
    if enc.kind() == SpaceKind::Fsm {
        return enumerate_fsm_values(enc, t, opts);
    }
    if enc.kind() != SpaceKind::Ca {
        return Err(EnumerateError::Mismatch { criterion, kind: enc.kind() });
    }
    let domains: Vec<usize> = enc.factors().iter().map(|f| f.domain.len()).collect();
    check_strength(t, 1, domains.len(), "the number of factors")?;
    let candidates = value_tuples(&domains, t).map(|v| (Target::Values(v), true)).collect();
    filter(enc, candidates, opts.jobs, criterion)
}

/// Ordered `t`-tuples of events: distinct events for permutations, with
/// repetition for variable-length sequences.
pub fn enumerate_seq(enc: &SpaceEncoding, t: usize) -> Result<RequirementSet, EnumerateError> {
    enumerate_seq_with(enc, t, &EnumerateOptions::default())
}

fn enumerate_seq_with(
    enc: &SpaceEncoding,
    t: usize,
    opts: &EnumerateOptions,
) -> Result<RequirementSet, EnumerateError> {
    let criterion = Criterion::SeqStrength(t).to_string();
    let m = match enc.model() {
        SpaceModel::Sequence(m) => m,
        SpaceModel::Fsm(_) => return enumerate_fsm_states(enc, t, opts),
        SpaceModel::Ca(_) => return Err(EnumerateError::Mismatch { criterion, kind: enc.kind() }),
    };
    let n = m.events.len();
    let candidates: Candidates = match m.variant {
        SequenceVariant::Permutation => {
            check_strength(t, 2, n, "the number of events")?;
            (0..n).permutations(t).map(|e| (Target::Events(e), true)).collect()
        }
        SequenceVariant::VariableLength { max_len } => {
            check_strength(t, 2, max_len, "the maximum sequence length")?;
            std::iter::repeat_n(0..n, t).multi_cartesian_product().map(|e| (Target::Events(e), true)).collect()
        }
    };
    filter(enc, candidates, opts.jobs, criterion)
}

/// Both halves of the FSM hybrid criterion: value tuples over co-occurring
/// factors first, then state orderings.
pub fn enumerate_fsm(
    enc: &SpaceEncoding,
    value_t: usize,
    seq_t: usize,
    opts: &EnumerateOptions,
) -> Result<RequirementSet, EnumerateError> {
    enumerate(&Criterion::FsmHybrid { value_t, seq_t }, enc, opts)
}

fn enumerate_fsm_values(
    enc: &SpaceEncoding,
    t: usize,
    opts: &EnumerateOptions,
) -> Result<RequirementSet, EnumerateError> {
    let SpaceModel::Fsm(m) = enc.model() else { unreachable!("checked by caller") };
    let domains: Vec<usize> = m.factors.iter().map(|f| f.domain.len()).collect();
    check_strength(t, 1, domains.len(), "the number of factors")?;
    let co = m.co_occurrence()?;
    let home = m.factor_states()?;
    let candidates = value_tuples(&domains, t)
        .map(|tuple| {
            let together = tuple.iter().tuple_combinations().all(|(&(a, _), &(b, _))| co[home[a]][home[b]]);
            (Target::Values(tuple), together)
        })
        .collect();
    filter(enc, candidates, opts.jobs, Criterion::CaStrength(t).to_string())
}

fn enumerate_fsm_states(
    enc: &SpaceEncoding,
    t: usize,
    opts: &EnumerateOptions,
) -> Result<RequirementSet, EnumerateError> {
    let SpaceModel::Fsm(m) = enc.model() else { unreachable!("checked by caller") };
    let (initial, fin) = (m.initial_index()?, m.final_index()?);
    let states: Vec<usize> =
        (0..m.states.len()).filter(|&s| opts.include_terminal_states || (s != initial && s != fin)).collect();
    check_strength(t, 2, states.len(), "the number of states")?;
    let candidates = states.iter().copied().permutations(t).map(|s| (Target::States(s), true)).collect();
    filter(enc, candidates, opts.jobs, Criterion::SeqStrength(t).to_string())
}

/// Dispatches on the criterion. Composite parts are concatenated with value
/// tuples ahead of orderings, duplicates dropped, ids renumbered.
pub fn enumerate(
    criterion: &Criterion,
    enc: &SpaceEncoding,
    opts: &EnumerateOptions,
) -> Result<RequirementSet, EnumerateError> {
    match criterion {
        Criterion::CaStrength(t) => enumerate_ca_with(enc, *t, opts),
        Criterion::SeqStrength(t) => enumerate_seq_with(enc, *t, opts),
        Criterion::FsmHybrid { value_t, seq_t } => {
            if enc.kind() != SpaceKind::Fsm {
                return Err(EnumerateError::Mismatch { criterion: criterion.to_string(), kind: enc.kind() });
            }
            let parts = [Criterion::CaStrength(*value_t), Criterion::SeqStrength(*seq_t)];
            let mut set = merge(parts.iter().map(|c| enumerate(c, enc, opts)).collect::<Result<_, _>>()?);
            set.criterion = criterion.to_string();
            Ok(set)
        }
        Criterion::Composite(parts) => {
            let mut set = merge(parts.iter().map(|c| enumerate(c, enc, opts)).collect::<Result<_, _>>()?);
            set.criterion = criterion.to_string();
            Ok(set)
        }
    }
}

fn merge(sets: Vec<RequirementSet>) -> RequirementSet {
    let mut seen = HashSet::new();
    let mut seen_invalid = HashSet::new();
    let mut values = Vec::new();
    let mut orders = Vec::new();
    let mut invalid = Vec::new();
    let mut candidates = 0;
    for set in sets {
        for r in set.requirements {
            if seen.insert(r.target.clone()) {
                candidates += 1;
                match r.target {
                    Target::Values(_) => values.push(r),
                    _ => orders.push(r),
                }
            }
        }
        for d in set.invalid {
            if seen_invalid.insert(d.clone()) {
                candidates += 1;
                invalid.push(d);
            }
        }
    }
    values.extend(orders);
    RequirementSet::from_parts(String::new(), candidates, values, invalid)
}
