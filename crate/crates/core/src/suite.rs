//! Suite files: canonical JSON and, for covering arrays, CSV.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::construct::{Metadata, UcitObject};
use crate::spaces::{SpaceEncoding, SpaceKind, TestCase};

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("invalid suite JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid suite CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV output is only available for covering array models")]
    CsvNotSupported,
    #[error("CSV row {row}: {message}")]
    CsvShape { row: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteFormat {
    Json,
    Csv,
}

impl SuiteFormat {
    /// Guess from the first non-blank character: JSON suites are objects.
    pub fn sniff(text: &str) -> SuiteFormat {
        if text.trim_start().starts_with('{') {
            SuiteFormat::Json
        } else {
            SuiteFormat::Csv
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    /// Requirement ids this test was built for.
    #[serde(default)]
    pub covers: Vec<usize>,
    #[serde(flatten)]
    pub test: TestCase,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    pub tests: Vec<SuiteEntry>,
}

impl SuiteFile {
    pub fn from_object(object: &UcitObject) -> Self {
        SuiteFile {
            metadata: Some(object.metadata.clone()),
            tests: object
                .tests
                .iter()
                .zip(&object.subsets)
                .map(|(test, covers)| SuiteEntry { covers: covers.clone(), test: test.clone() })
                .collect(),
        }
    }

    pub fn test_cases(&self) -> Vec<TestCase> {
        self.tests.iter().map(|e| e.test.clone()).collect()
    }
}

pub fn to_json(object: &UcitObject) -> String {
    let mut text = serde_json::to_string_pretty(&SuiteFile::from_object(object)).expect("suite serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<SuiteFile, SuiteError> {
    Ok(serde_json::from_str(text)?)
}

/// One row per test, header of factor names in model order.
pub fn to_csv(object: &UcitObject, enc: &SpaceEncoding) -> Result<String, SuiteError> {
    if enc.kind() != SpaceKind::Ca {
        return Err(SuiteError::CsvNotSupported);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(enc.factors().iter().map(|f| f.name.as_str()))?;
    for test in &object.tests {
        let TestCase::Row(row) = test else { return Err(SuiteError::CsvNotSupported) };
        w.write_record(enc.factors().iter().map(|f| row.get(&f.name).map_or("", String::as_str)))?;
    }
    let bytes = w.into_inner().map_err(|e| SuiteError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rows keyed by the header. Empty cells are left out of the row, which
/// makes the test invalid rather than unreadable.
pub fn from_csv(text: &str) -> Result<Vec<TestCase>, SuiteError> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut tests = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(SuiteError::CsvShape {
                row: i + 1,
                message: format!("{} cells for {} columns", record.len(), header.len()),
            });
        }
        let row: IndexMap<String, String> = header
            .iter()
            .zip(record.iter())
            .filter(|(_, v)| !v.trim().is_empty())
            .map(|(k, v)| (k.clone(), v.trim().to_string()))
            .collect();
        tests.push(TestCase::Row(row));
    }
    Ok(tests)
}

/// Test cases from either format.
pub fn read_tests(text: &str) -> Result<Vec<TestCase>, SuiteError> {
    match SuiteFormat::sniff(text) {
        SuiteFormat::Json => Ok(from_json(text)?.test_cases()),
        SuiteFormat::Csv => from_csv(text),
    }
}
