//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use proptest::prelude::{any, Strategy};
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ucit_core::logic::{solve, Cnf, Literal, VarId};
use ucit_core::{
    build, bundled, enumerate, verify, verify_tests, Atom, Constraint, CoveringArrayModel, Criterion, EnumerateOptions,
    Factor, Policy, RequirementSet, SequenceModel, SpaceEncoding, SpaceModel, Target, TestCase, UcitObject,
};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(took)
}

fn generate(model: SpaceModel, criterion: Criterion) -> (SpaceEncoding, RequirementSet, UcitObject) {
    let enc = model.encode().unwrap();
    let reqs = enumerate(&criterion, &enc, &EnumerateOptions::default()).unwrap();
    let obj = build(&enc, &reqs, &Policy::default()).unwrap();
    (enc, reqs, obj)
}

fn full_coverage(enc: &SpaceEncoding, reqs: &RequirementSet, obj: &UcitObject) -> Result<(), String> {
    let report = verify(obj, reqs, enc);
    ensure!(report.is_full(), "verifier reports {:?}", report.summary);
    for r in &reqs.requirements {
        ensure!(obj.tests.iter().any(|t| contains(enc, r, t)), "oracle: `{}` uncovered", r.descriptor);
    }
    Ok(())
}

fn booleans(n: usize) -> Vec<Factor> {
    (0..n).map(|i| Factor::boolean(format!("f{i}"))).collect()
}

fn brute_force_sat(cnf: &Cnf) -> bool {
    let n = cnf.var_count;
    (0u32..1 << n)
        .any(|bits| cnf.clauses.iter().all(|c| c.iter().any(|l| (bits >> l.var().0 & 1 == 1) == l.is_positive())))
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..200 {
        let vars = rng.gen_range(1..=12u32);
        let clauses = (0..rng.gen_range(0..=60))
            .map(|_| {
                (0..rng.gen_range(1..=4).max(rng.gen_range(1..=4)))
                    .map(|_| Literal::new(VarId(rng.gen_range(0..vars)), rng.gen()))
                    .collect::<Vec<_>>()
            })
            .collect();
        let cnf = Cnf { clauses, var_count: vars };
        let expected = brute_force_sat(&cnf);
        let got = solve(&cnf);
        ensure!(got.is_sat() == expected, "formula {i}: solver says {}, truth table {expected}", got.is_sat());
        if let Some(model) = got.model() {
            ensure!(cnf.is_satisfied_by(model.as_slice()) == Some(true), "formula {i}: model violates a clause");
        }
        if expected {
            sat += 1
        } else {
            unsat += 1
        }
    }
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("200/200 agree ({sat} sat, {unsat} unsat) in {took:.2?}"))
}

fn ca_three_booleans() -> Outcome {
    let start = Instant::now();
    let (enc, reqs, obj) = generate(SpaceModel::Ca(CoveringArrayModel::new(booleans(3))), Criterion::CaStrength(2));
    ensure!(reqs.len() == 12, "{} requirements", reqs.len());
    ensure!((4..=8).contains(&obj.len()), "{} tests", obj.len());
    full_coverage(&enc, &reqs, &obj)?;
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!("12 requirements, {} tests, full coverage in {took:.2?}", obj.len()))
}

fn ca_four_ternary() -> Outcome {
    let start = Instant::now();
    let factors = (0..4).map(|i| Factor::new(format!("f{i}"), ["a", "b", "c"])).collect();
    let (enc, reqs, obj) = generate(SpaceModel::Ca(CoveringArrayModel::new(factors)), Criterion::CaStrength(2));
    ensure!(reqs.len() == 54, "{} requirements", reqs.len());
    ensure!((9..=54).contains(&obj.len()), "{} tests", obj.len());
    full_coverage(&enc, &reqs, &obj)?;
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!("54 requirements, {} tests, full coverage in {took:.2?}", obj.len()))
}

fn forbidden_pair() -> Constraint {
    Constraint::and(vec![Constraint::atom(Atom::value("f0", "T")), Constraint::atom(Atom::value("f1", "T"))]).negate()
}

fn constrained_ca() -> Outcome {
    let model = CoveringArrayModel::new(booleans(3)).with_constraint(forbidden_pair());
    let (enc, reqs, obj) = generate(SpaceModel::Ca(model.clone()), Criterion::CaStrength(2));
    ensure!(reqs.invalid == ["f0=T, f1=T"], "invalid set {:?}", reqs.invalid);
    ensure!(reqs.requirements.iter().all(|r| r.target != Target::Values(vec![(0, 0), (1, 0)])), "forbidden pair kept");
    let realisable: BTreeSet<String> = enumerate(&Criterion::CaStrength(2), &enc, &EnumerateOptions::default())
        .unwrap()
        .requirements
        .iter()
        .filter(|r| valid_rows(&model).iter().any(|row| contains(&enc, r, row)))
        .map(|r| r.descriptor.clone())
        .collect();
    ensure!(realisable.len() == reqs.len() && reqs.len() == 11, "{} kept, {} realisable", reqs.len(), realisable.len());
    for t in &obj.tests {
        let TestCase::Row(row) = t else { unreachable!() };
        ensure!(!(row_value(row, "f0", "T") && row_value(row, "f1", "T")), "test {t} contains the forbidden pair");
        ensure!(test_is_valid(&enc, t), "test {t} invalid");
    }
    full_coverage(&enc, &reqs, &obj)?;
    Ok(format!("forbidden pair filtered, 11 requirements, {} tests, none contain it", obj.len()))
}

fn sequence_permutation() -> Outcome {
    let model = SequenceModel::permutation(["a", "b", "c", "d", "e"]);
    let (enc, reqs, obj) = generate(SpaceModel::Sequence(model), Criterion::SeqStrength(2));
    ensure!(reqs.len() == 20, "{} requirements", reqs.len());
    for t in &obj.tests {
        let TestCase::EventSeq(seq) = t else { unreachable!() };
        let sorted: BTreeSet<&String> = seq.iter().collect();
        ensure!(seq.len() == 5 && sorted.len() == 5, "{t} is not a permutation");
    }
    ensure!(obj.len() >= 2, "{} tests", obj.len());
    full_coverage(&enc, &reqs, &obj)?;
    Ok(format!("20 requirements, {} permutations, full coverage", obj.len()))
}

/// Sequences listed for the example machine as a 2-way sequence covering
/// array of its states.
const LISTED_SEQUENCES: [&[&str]; 4] = [
    &["i", "S0", "S2", "S3", "S4", "f"],
    &["i", "S0", "S2", "S5", "f"],
    &["i", "S0", "S1", "S3", "S5", "f"],
    &["i", "S0", "S1", "S3", "S4", "f"],
];

fn fsm_hybrid() -> Outcome {
    let start = Instant::now();
    let doc = bundled::demo_fsm();
    ensure!(doc.criterion == Criterion::FsmHybrid { value_t: 3, seq_t: 2 }, "criterion {}", doc.criterion);
    let SpaceModel::Fsm(m) = &doc.model else { unreachable!() };
    let enc = doc.model.encode().unwrap();
    let reqs = enumerate(&doc.criterion, &enc, &doc.enumerate_options(1)).unwrap();
    let obj = build(&enc, &reqs, &Policy::default()).unwrap();
    for t in &obj.tests {
        ensure!(fsm_test_is_valid(m, enc.path_bound(), t), "invalid path {t}");
    }
    full_coverage(&enc, &reqs, &obj)?;

    let by_descriptor = |d: &str| reqs.requirements.iter().find(|r| r.descriptor == d);
    let s2s5 = by_descriptor("S2 before S5").ok_or("(S2, S5) not enumerated")?;
    ensure!(obj.tests.iter().any(|t| contains(&enc, s2s5, t)), "(S2, S5) uncovered");
    ensure!(by_descriptor("S4 before S1").is_none(), "(S4, S1) enumerated");
    ensure!(reqs.invalid.iter().any(|d| d == "S4 before S1"), "(S4, S1) not reported invalid");

    let paths: BTreeSet<Vec<String>> = fsm_paths(m, enc.path_bound())
        .iter()
        .map(|p| {
            let mut s = vec![m.initial.clone()];
            s.extend(p.iter().map(|&t| m.transitions[t].to.clone()));
            s
        })
        .collect();
    let mut listed_pairs = BTreeSet::new();
    for seq in LISTED_SEQUENCES {
        let seq: Vec<String> = seq.iter().map(|s| s.to_string()).collect();
        ensure!(paths.contains(&seq), "listed sequence {seq:?} is not a path");
        for (i, a) in seq.iter().enumerate().filter(|(_, s)| *s != "i" && *s != "f") {
            for b in seq[i + 1..].iter().filter(|s| *s != "f") {
                listed_pairs.insert(format!("{a} before {b}"));
            }
        }
    }
    let enumerated_pairs: BTreeSet<String> = reqs
        .requirements
        .iter()
        .filter(|r| matches!(r.target, Target::States(_)))
        .map(|r| r.descriptor.clone())
        .collect();
    ensure!(enumerated_pairs == listed_pairs, "state pairs {enumerated_pairs:?} differ from listed {listed_pairs:?}");
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} requirements ({} state pairs), {} valid paths, full coverage in {took:.2?}",
        reqs.len(),
        enumerated_pairs.len(),
        obj.len()
    ))
}

fn criterion_for(model: &SpaceModel, t: usize) -> Criterion {
    match model {
        SpaceModel::Ca(_) => Criterion::CaStrength(t),
        SpaceModel::Sequence(_) => Criterion::SeqStrength(t),
        SpaceModel::Fsm(m) if m.factors.is_empty() => Criterion::SeqStrength(2),
        SpaceModel::Fsm(m) => Criterion::FsmHybrid { value_t: t.min(m.factors.len()), seq_t: 2 },
    }
}

fn structural_properties() -> Outcome {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (arb_model(), any::<u64>());
    let mut kinds = [0usize; 3];
    for case in 0..100 {
        let ((model, t), seed) = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        kinds[model.kind() as usize] += 1;
        let enc = model.encode().map_err(|e| format!("model {case}: {e}"))?;
        let reqs = enumerate(&criterion_for(&model, t), &enc, &EnumerateOptions::default()).unwrap();
        let policy = Policy::shuffled(seed);
        let obj = build(&enc, &reqs, &policy).map_err(|e| format!("model {case}: {e}"))?;
        let mut ids = obj.subsets.concat();
        ids.sort_unstable();
        ensure!(ids == (0..reqs.len()).collect::<Vec<_>>(), "model {case}: subsets are not a partition");
        for (subset, test) in obj.subsets.iter().zip(&obj.tests) {
            ensure!(test_is_valid(&enc, test), "model {case}: invalid test {test}");
            for &id in subset {
                ensure!(
                    contains(&enc, &reqs.requirements[id], test),
                    "model {case}: {test} misses `{}` of its subset",
                    reqs.requirements[id].descriptor
                );
            }
        }
        ensure!(build(&enc, &reqs, &policy).unwrap() == obj, "model {case}: rebuild with seed {seed} differs");
    }
    Ok(format!(
        "100 models ({} ca, {} sequence, {} fsm): partition, joint satisfiability, determinism",
        kinds[0], kinds[1], kinds[2]
    ))
}

fn verifier_agreement() -> Outcome {
    let mut pairs = 0usize;
    let mut check = |enc: &SpaceEncoding, reqs: &RequirementSet, tests: &[TestCase]| -> Result<(), String> {
        let report = verify_tests(tests, reqs, enc);
        for (i, test) in tests.iter().enumerate() {
            let valid = test_is_valid(enc, test);
            ensure!(report.tests[i].valid == valid, "validity of {test}: verifier {}, oracle {valid}", !valid);
            for rc in &report.requirements {
                let oracle = valid && contains(enc, &reqs.requirements[rc.id], test);
                ensure!(rc.covered_by.contains(&i) == oracle, "`{}` on {test}: oracle {oracle}", rc.descriptor);
                pairs += 1;
            }
        }
        Ok(())
    };

    let constrained = CoveringArrayModel::new(booleans(3)).with_constraint(forbidden_pair());
    let ternary = CoveringArrayModel::new((0..4).map(|i| Factor::new(format!("f{i}"), ["a", "b", "c"])).collect());
    let cases = [
        (SpaceModel::Ca(CoveringArrayModel::new(booleans(3))), Criterion::CaStrength(2)),
        (SpaceModel::Ca(ternary), Criterion::CaStrength(2)),
        (SpaceModel::Ca(constrained.clone()), Criterion::CaStrength(2)),
        (SpaceModel::Sequence(SequenceModel::permutation(["a", "b", "c", "d", "e"])), Criterion::SeqStrength(2)),
    ];
    for (model, criterion) in cases {
        let (enc, reqs, obj) = generate(model, criterion);
        check(&enc, &reqs, &obj.tests)?;
    }
    // every row of the product, forbidden ones included
    let enc = SpaceModel::Ca(constrained.clone()).encode().unwrap();
    let reqs = enumerate(&Criterion::CaStrength(2), &enc, &EnumerateOptions::default()).unwrap();
    let all_rows = valid_rows(&CoveringArrayModel::new(booleans(3)));
    check(&enc, &reqs, &all_rows)?;

    let doc = bundled::demo_fsm();
    let enc = doc.model.encode().unwrap();
    let reqs = enumerate(&doc.criterion, &enc, &doc.enumerate_options(1)).unwrap();
    let obj = build(&enc, &reqs, &Policy::default()).unwrap();
    let mut tests = obj.tests.clone();
    // guard violations: flip p1 on every path through S1
    for t in &obj.tests {
        let TestCase::FsmPath(p) = t else { unreachable!() };
        if let Some(Some(v)) = p.values.get("p1") {
            let mut bad = p.clone();
            bad.values["p1"] = Some(if v == "T" { "F" } else { "T" }.into());
            tests.push(TestCase::FsmPath(bad));
        }
    }
    check(&enc, &reqs, &tests)?;
    Ok(format!("{pairs} (requirement, test) verdicts match the containment oracle"))
}

fn cli_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/models/demo_ca.ucit");
    let suite = dir.path().join("suite.json");
    let ucit =
        |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_ucit")).args(args).env_remove("UCIT_SEED").output().unwrap();
    let gen = ucit(&["generate", model, "--seed", "7", "--out", suite.to_str().unwrap()]);
    ensure!(gen.status.code() == Some(0), "generate exited {:?}", gen.status.code());
    let ok = ucit(&["verify", model, suite.to_str().unwrap()]);
    ensure!(ok.status.code() == Some(0), "verify exited {:?}", ok.status.code());

    let text = fs::read_to_string(&suite).unwrap();
    let full: serde_json::Value = serde_json::from_str(&text).unwrap();
    let n = full["tests"].as_array().unwrap().len();
    let doc = bundled::demo_ca();
    let enc = doc.model.encode().unwrap();
    let reqs = enumerate(&doc.criterion, &enc, &EnumerateOptions::default()).unwrap();
    let tests = ucit_core::suite::read_tests(&text).unwrap();
    let mut failing = 0;
    for drop in 0..n {
        let mut v = full.clone();
        v["tests"].as_array_mut().unwrap().remove(drop);
        let path = dir.path().join(format!("drop{drop}.json"));
        fs::write(&path, v.to_string()).unwrap();
        let out = ucit(&["verify", model, path.to_str().unwrap()]);
        let mut rest = tests.clone();
        rest.remove(drop);
        let oracle_full = reqs.requirements.iter().all(|r| rest.iter().any(|t| contains(&enc, r, t)));
        let expected = if oracle_full { 0 } else { 2 };
        ensure!(
            out.status.code() == Some(expected),
            "dropping test {drop}: exit {:?}, expected {expected}",
            out.status.code()
        );
        if expected == 2 {
            ensure!(String::from_utf8_lossy(&out.stdout).contains("uncovered"), "no uncovered list");
            failing += 1;
        }
    }
    ensure!(failing > 0, "no single deletion uncovers anything");
    Ok(format!("round trip exits 0; {failing}/{n} single-test deletions exit 2, as the oracle predicts"))
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("solver matches truth tables on 200 random CNFs", solver_oracle),
        ("pairwise over 3 booleans", ca_three_booleans),
        ("pairwise over 4 ternary factors", ca_four_ternary),
        ("constrained covering array", constrained_ca),
        ("2-way sequences over 5-event permutations", sequence_permutation),
        ("guarded state machine, hybrid criterion", fsm_hybrid),
        ("build properties on 100 random models", structural_properties),
        ("verifier agrees with containment oracle", verifier_agreement),
        ("cli generate/verify round trip and deletion", cli_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
