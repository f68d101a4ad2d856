//! Coverage checking by evaluation. Each test is re-encoded to a total
//! assignment over the dictionary atoms; validity is `M` evaluated there and
//! coverage is each requirement evaluated there. The solver is never used.

use std::fmt;

use serde::Serialize;

use crate::construct::UcitObject;
use crate::enumerate::RequirementSet;
use crate::spaces::{SpaceEncoding, TestCase};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RequirementCoverage {
    pub id: usize,
    pub descriptor: String,
    /// Indices of valid tests satisfying the requirement.
    pub covered_by: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestVerdict {
    pub index: usize,
    pub valid: bool,
    /// Set when the test could not be encoded in the space at all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub requirements: usize,
    pub covered: usize,
    pub tests: usize,
    pub invalid_tests: usize,
    pub full_coverage: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub summary: Summary,
    pub requirements: Vec<RequirementCoverage>,
    pub tests: Vec<TestVerdict>,
}

impl CoverageReport {
    pub fn is_full(&self) -> bool {
        self.summary.full_coverage
    }

    pub fn uncovered(&self) -> impl Iterator<Item = &RequirementCoverage> {
        self.requirements.iter().filter(|r| r.covered_by.is_empty())
    }
}

pub fn verify(object: &UcitObject, reqs: &RequirementSet, enc: &SpaceEncoding) -> CoverageReport {
    verify_tests(&object.tests, reqs, enc)
}

/// Only valid tests count towards coverage. Undecodable tests are reported
/// per index and count as invalid.
pub fn verify_tests(tests: &[TestCase], reqs: &RequirementSet, enc: &SpaceEncoding) -> CoverageReport {
    let mut verdicts = Vec::with_capacity(tests.len());
    let mut assignments = Vec::with_capacity(tests.len());
    for (index, test) in tests.iter().enumerate() {
        match enc.encode_test(test) {
            Ok(a) => {
                let valid = enc.constraint().evaluate(&a).unwrap_or(false);
                verdicts.push(TestVerdict { index, valid, error: None });
                assignments.push(valid.then_some(a));
            }
            Err(e) => {
                verdicts.push(TestVerdict { index, valid: false, error: Some(e.to_string()) });
                assignments.push(None);
            }
        }
    }
    let requirements: Vec<RequirementCoverage> = reqs
        .requirements
        .iter()
        .map(|r| RequirementCoverage {
            id: r.id,
            descriptor: r.descriptor.clone(),
            covered_by: assignments
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.as_ref().filter(|a| r.expr.evaluate(a).unwrap_or(false)).map(|_| i))
                .collect(),
        })
        .collect();
    let covered = requirements.iter().filter(|r| !r.covered_by.is_empty()).count();
    let invalid_tests = verdicts.iter().filter(|v| !v.valid).count();
    let summary = Summary {
        requirements: requirements.len(),
        covered,
        tests: tests.len(),
        invalid_tests,
        full_coverage: covered == requirements.len() && invalid_tests == 0,
    };
    CoverageReport { summary, requirements, tests: verdicts }
}

/// Condensed view of a report for humans and scripts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageStats {
    pub requirements: usize,
    pub covered: usize,
    pub coverage_percent: f64,
    pub tests: usize,
    pub invalid_tests: usize,
    pub full_coverage: bool,
    /// First ten uncovered descriptors.
    pub uncovered: Vec<String>,
    pub invalid: Vec<usize>,
}

pub fn coverage_stats(report: &CoverageReport) -> CoverageStats {
    let s = &report.summary;
    let coverage_percent = if s.requirements == 0 { 100.0 } else { 100.0 * s.covered as f64 / s.requirements as f64 };
    CoverageStats {
        requirements: s.requirements,
        covered: s.covered,
        coverage_percent,
        tests: s.tests,
        invalid_tests: s.invalid_tests,
        full_coverage: s.full_coverage,
        uncovered: report.uncovered().take(10).map(|r| r.descriptor.clone()).collect(),
        invalid: report.tests.iter().filter(|t| !t.valid).map(|t| t.index).collect(),
    }
}

impl CoverageStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

impl fmt::Display for CoverageStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coverage: {}/{} requirements ({:.2}%)", self.covered, self.requirements, self.coverage_percent)?;
        writeln!(f, "tests: {} ({} invalid)", self.tests, self.invalid_tests)?;
        if !self.invalid.is_empty() {
            let list: Vec<String> = self.invalid.iter().map(usize::to_string).collect();
            writeln!(f, "invalid test indices: {}", list.join(", "))?;
        }
        if !self.uncovered.is_empty() {
            writeln!(f, "uncovered (first {}):", self.uncovered.len())?;
            for d in &self.uncovered {
                writeln!(f, "  {d}")?;
            }
        }
        write!(f, "{}", if self.full_coverage { "FULL COVERAGE" } else { "INCOMPLETE" })
    }
}
