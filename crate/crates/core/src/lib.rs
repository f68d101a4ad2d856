//! Unified combinatorial interaction testing.
//!
//! A space model (covering array, event sequence or guarded state machine)
//! is compiled to a propositional constraint `M`. A coverage criterion
//! yields requirements, each a formula that must hold in some test. Valid
//! requirements are packed greedily into jointly satisfiable subsets, one
//! test per subset, and a suite can be checked against the requirements by
//! plain evaluation.
//!
//! ```
//! use ucit_core::{build, enumerate, parse_model, verify, EnumerateOptions, Policy};
//!
//! let doc = parse_model("kind: ca\nfactors:\n  a: T, F\n  b: T, F\n  c: T, F\ncriterion: strength 2\n").unwrap();
//! let enc = doc.model.encode().unwrap();
//! let reqs = enumerate(&doc.criterion, &enc, &EnumerateOptions::default()).unwrap();
//! assert_eq!(reqs.len(), 12);
//! let suite = build(&enc, &reqs, &Policy::default()).unwrap();
//! assert!(verify(&suite, &reqs, &enc).is_full());
//! ```

pub mod bundled;
pub mod construct;
pub mod dsl;
pub mod enumerate;
pub mod logic;
pub mod pool;
pub mod spaces;
pub mod suite;
pub mod verify;

pub use construct::{build, Accommodator, BuildError, Metadata, Order, Policy, UcitObject};
pub use dsl::{parse_model, ModelDocument, ParseError};
pub use enumerate::{enumerate, Criterion, EnumerateError, EnumerateOptions, RequirementSet};
pub use logic::{Assignment, BoolExpr, Cnf, Literal, SatOutcome, Solver, VarId};
pub use spaces::{
    Atom, Constraint, CoveringArrayModel, Factor, FsmModel, FsmPath, Requirement, SequenceModel, SequenceVariant,
    SpaceEncoding, SpaceError, SpaceKind, SpaceModel, Target, TestCase, Transition,
};
pub use suite::{SuiteError, SuiteFile, SuiteFormat};
pub use verify::{coverage_stats, verify, verify_tests, CoverageReport, CoverageStats};
