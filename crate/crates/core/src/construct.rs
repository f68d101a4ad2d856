//! Greedy first-fit packing of requirements into jointly satisfiable
//! subsets, then one solver call per subset to realise a test case.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::RequirementSet;
use crate::logic::{Literal, SatOutcome};
use crate::pool::RequirementPool;
use crate::spaces::{SpaceEncoding, SpaceError, SpaceKind, TestCase};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("requirement {id} ({descriptor}) is unsatisfiable with the model constraint")]
    InvalidRequirement { id: usize, descriptor: String },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    #[default]
    AsEnumerated,
    Shuffled,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::AsEnumerated => "as-enumerated",
            Order::Shuffled => "shuffled",
        })
    }
}

/// Requirement processing order. Placement is always first fit over
/// subsets in creation order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Policy {
    pub order: Order,
    /// Used by [`Order::Shuffled`].
    pub seed: u64,
}

impl Policy {
    pub fn as_enumerated() -> Self {
        Policy::default()
    }

    pub fn shuffled(seed: u64) -> Self {
        Policy { order: Order::Shuffled, seed }
    }

    /// Requirement indices `0..n` in processing order.
    pub fn arrange(&self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        if self.order == Order::Shuffled {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        }
        order
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub kind: SpaceKind,
    pub model_hash: String,
    pub criterion: String,
    pub order: Order,
    pub seed: Option<u64>,
    pub requirements: usize,
    pub tests: usize,
}

/// Test cases plus the requirement subsets (by id) that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UcitObject {
    pub subsets: Vec<Vec<usize>>,
    pub tests: Vec<TestCase>,
    pub metadata: Metadata,
}

impl UcitObject {
    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }
}

/// Subsets under construction, each with its cumulative assumption list.
#[derive(Clone, Debug)]
pub struct Accommodator {
    pool: RequirementPool,
    subsets: Vec<Vec<usize>>,
    assumptions: Vec<Vec<Literal>>,
}

impl Accommodator {
    pub fn new(enc: &SpaceEncoding, reqs: &RequirementSet) -> Self {
        Accommodator {
            pool: RequirementPool::new(enc, reqs.requirements.iter().map(|r| &r.expr)),
            subsets: Vec::new(),
            assumptions: Vec::new(),
        }
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn pool(&self) -> &RequirementPool {
        &self.pool
    }

    /// Whether requirement `r` fits subset `subset`:
    /// `M ∧ r ∧ ⋀ members` satisfiable.
    pub fn subset_cache_check(&mut self, subset: usize, r: usize) -> bool {
        let mut assume = self.assumptions[subset].clone();
        assume.extend_from_slice(self.pool.literals(r));
        self.pool.check(&assume).is_sat()
    }

    /// `M ∧ r` satisfiable, the verdict for an empty subset.
    pub fn fits_alone(&mut self, r: usize) -> bool {
        self.pool.is_valid(r)
    }

    pub fn open(&mut self, r: usize) -> usize {
        self.subsets.push(vec![r]);
        self.assumptions.push(self.pool.literals(r).to_vec());
        self.subsets.len() - 1
    }

    pub fn add(&mut self, subset: usize, r: usize) {
        self.subsets[subset].push(r);
        let lits = self.pool.literals(r).to_vec();
        self.assumptions[subset].extend(lits);
    }

    /// First subset in creation order that accommodates `r`.
    pub fn first_fit(&mut self, r: usize) -> Option<usize> {
        (0..self.subsets.len()).find(|&s| self.subset_cache_check(s, r))
    }
}

pub fn build(enc: &SpaceEncoding, reqs: &RequirementSet, policy: &Policy) -> Result<UcitObject, BuildError> {
    let mut acc = Accommodator::new(enc, reqs);
    for r in policy.arrange(reqs.len()) {
        match acc.first_fit(r) {
            Some(s) => acc.add(s, r),
            None => {
                if !acc.fits_alone(r) {
                    let req = &reqs.requirements[r];
                    return Err(BuildError::InvalidRequirement { id: req.id, descriptor: req.descriptor.clone() });
                }
                acc.open(r);
            }
        }
    }

    let mut tests = Vec::with_capacity(acc.subsets.len());
    for (i, members) in acc.subsets.iter().enumerate() {
        let SatOutcome::Sat(model) = acc.pool.fresh_model(members) else {
            return Err(BuildError::Internal(format!("subset {i} became unsatisfiable at final solving")));
        };
        let model = model.truncated(enc.dictionary().len());
        tests.push(enc.decode(&model).map_err(|e| BuildError::Internal(format!("decoding subset {i}: {e}")))?);
    }

    let subsets: Vec<Vec<usize>> =
        acc.subsets.into_iter().map(|members| members.into_iter().map(|r| reqs.requirements[r].id).collect()).collect();
    let metadata = Metadata {
        kind: enc.kind(),
        model_hash: enc.fingerprint(),
        criterion: reqs.criterion.clone(),
        order: policy.order,
        seed: (policy.order == Order::Shuffled).then_some(policy.seed),
        requirements: reqs.len(),
        tests: tests.len(),
    };
    Ok(UcitObject { subsets, tests, metadata })
}
