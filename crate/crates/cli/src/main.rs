//! `ucit`: enumerate coverage requirements, generate suites and verify them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ucit_core::suite::{self, SuiteFormat};
use ucit_core::{
    build, bundled, coverage_stats, enumerate, parse_model, verify_tests, ModelDocument, Order, Policy, RequirementSet,
    SpaceEncoding,
};

const EXIT_USAGE: u8 = 1;
const EXIT_UNCOVERED: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ucit", version, about = "Constraint-based combinatorial interaction testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the valid coverage requirements of a model.
    Enumerate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Build a test suite covering every valid requirement.
    Generate {
        model: PathBuf,
        /// Shuffle seed. Implies `--order shuffled` unless an order is given.
        /// Defaults to $UCIT_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        order: Option<OrderArg>,
        /// Write the suite here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check a suite against a model; exits 2 unless every requirement is
    /// covered and every test is valid.
    Verify {
        model: PathBuf,
        suite: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Model statistics, or coverage statistics when a suite is given.
    Stats {
        model: PathBuf,
        suite: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderArg {
    AsEnumerated,
    Shuffled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// A failure with its exit code; the message goes to standard error.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

fn internal(message: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INTERNAL, message: message.to_string() }
}

/// Reads a model file. A missing path that names a bundled model (for
/// example `demo_ca.ucit`) loads the bundled copy.
fn load_model(path: &Path) -> Result<(ModelDocument, SpaceEncoding), Failure> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let name = path.to_str().unwrap_or_default();
            match bundled::ALL.iter().find(|(n, _)| *n == name || n.strip_suffix(".ucit") == Some(name)) {
                Some((_, text)) if !path.exists() => text.to_string(),
                _ => return Err(usage(format!("{}: {e}", path.display()))),
            }
        }
    };
    let doc = parse_model(&text).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    let enc = doc.model.encode().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((doc, enc))
}

fn requirements(doc: &ModelDocument, enc: &SpaceEncoding, jobs: usize) -> Result<RequirementSet, Failure> {
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    enumerate(&doc.criterion, enc, &doc.enumerate_options(jobs)).map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(internal),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct RequirementEntry<'a> {
    id: usize,
    descriptor: &'a str,
}

#[derive(Serialize)]
struct EnumerationReport<'a> {
    criterion: &'a str,
    candidates: usize,
    valid: usize,
    requirements: Vec<RequirementEntry<'a>>,
    invalid: &'a [String],
}

fn cmd_enumerate(model: &Path, json: bool, jobs: usize) -> Result<u8, Failure> {
    let (doc, enc) = load_model(model)?;
    let reqs = requirements(&doc, &enc, jobs)?;
    let text = if json {
        to_json(&EnumerationReport {
            criterion: &reqs.criterion,
            candidates: reqs.candidates,
            valid: reqs.len(),
            requirements: reqs
                .requirements
                .iter()
                .map(|r| RequirementEntry { id: r.id, descriptor: &r.descriptor })
                .collect(),
            invalid: &reqs.invalid,
        })
    } else {
        let mut text = String::new();
        for r in &reqs.requirements {
            text.push_str(&format!("{}\t{}\n", r.id, r.descriptor));
        }
        for d in &reqs.invalid {
            text.push_str(&format!("-\t{d}\t(invalid)\n"));
        }
        text.push_str(&format!("{}: {} valid of {} candidates\n", reqs.criterion, reqs.len(), reqs.candidates));
        text
    };
    emit(None, &text)?;
    Ok(0)
}

fn seed_from_env() -> Result<Option<u64>, Failure> {
    match std::env::var("UCIT_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| usage(format!("UCIT_SEED is not a number: `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn cmd_generate(
    model: &Path,
    seed: Option<u64>,
    order: Option<OrderArg>,
    out: Option<&Path>,
    format: FormatArg,
    jobs: usize,
) -> Result<u8, Failure> {
    let order = match (order, seed) {
        (Some(OrderArg::Shuffled), _) | (None, Some(_)) => Order::Shuffled,
        (Some(OrderArg::AsEnumerated), _) | (None, None) => Order::AsEnumerated,
    };
    let seed = match seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    let (doc, enc) = load_model(model)?;
    let reqs = requirements(&doc, &enc, jobs)?;
    let object = build(&enc, &reqs, &Policy { order, seed }).map_err(internal)?;
    let text = match format {
        FormatArg::Json => suite::to_json(&object),
        FormatArg::Csv => suite::to_csv(&object, &enc).map_err(usage)?,
    };
    emit(out, &text)?;
    Ok(0)
}

fn read_suite(path: &Path, enc: &SpaceEncoding) -> Result<Vec<ucit_core::TestCase>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if SuiteFormat::sniff(&text) == SuiteFormat::Json {
        let file = suite::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if let Some(meta) = &file.metadata {
            if meta.model_hash != enc.fingerprint() {
                eprintln!("warning: {} was generated from a different model", path.display());
            }
        }
        return Ok(file.test_cases());
    }
    suite::from_csv(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_verify(model: &Path, suite_path: &Path, json: bool, jobs: usize) -> Result<u8, Failure> {
    let (doc, enc) = load_model(model)?;
    let reqs = requirements(&doc, &enc, jobs)?;
    let tests = read_suite(suite_path, &enc)?;
    let report = verify_tests(&tests, &reqs, &enc);
    if json {
        emit(None, &to_json(&report))?;
    } else {
        let stats = coverage_stats(&report);
        let mut text = format!("{stats}\n");
        let uncovered: Vec<_> = report.uncovered().collect();
        if uncovered.len() > stats.uncovered.len() {
            text.push_str("all uncovered:\n");
            for r in uncovered {
                text.push_str(&format!("  {}\n", r.descriptor));
            }
        }
        for t in report.tests.iter().filter(|t| t.error.is_some()) {
            text.push_str(&format!("test {}: {}\n", t.index, t.error.as_deref().unwrap_or_default()));
        }
        emit(None, &text)?;
    }
    Ok(if report.is_full() { 0 } else { EXIT_UNCOVERED })
}

#[derive(Serialize)]
struct ModelStats<'a> {
    kind: String,
    model_hash: String,
    criterion: &'a str,
    atoms: usize,
    variables: u32,
    clauses: usize,
    candidates: usize,
    valid: usize,
    invalid: usize,
}

fn cmd_stats(model: &Path, suite_path: Option<&Path>, json: bool, jobs: usize) -> Result<u8, Failure> {
    let (doc, enc) = load_model(model)?;
    let reqs = requirements(&doc, &enc, jobs)?;
    if let Some(path) = suite_path {
        let tests = read_suite(path, &enc)?;
        let stats = coverage_stats(&verify_tests(&tests, &reqs, &enc));
        emit(None, &if json { stats.to_json() + "\n" } else { format!("{stats}\n") })?;
        return Ok(0);
    }
    let stats = ModelStats {
        kind: enc.kind().to_string(),
        model_hash: enc.fingerprint(),
        criterion: &reqs.criterion,
        atoms: enc.dictionary().len(),
        variables: enc.cnf().var_count,
        clauses: enc.cnf().clauses.len(),
        candidates: reqs.candidates,
        valid: reqs.len(),
        invalid: reqs.invalid.len(),
    };
    let text = if json {
        to_json(&stats)
    } else {
        format!(
            "kind: {}\nmodel hash: {}\ncriterion: {}\natoms: {}\ncnf: {} variables, {} clauses\nrequirements: {} valid of {} candidates ({} invalid)\n",
            stats.kind,
            stats.model_hash,
            stats.criterion,
            stats.atoms,
            stats.variables,
            stats.clauses,
            stats.valid,
            stats.candidates,
            stats.invalid
        )
    };
    emit(None, &text)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Enumerate { model, json, jobs } => cmd_enumerate(&model, json, jobs),
        Command::Generate { model, seed, order, out, format, jobs } => {
            cmd_generate(&model, seed, order, out.as_deref(), format, jobs)
        }
        Command::Verify { model, suite, json, jobs } => cmd_verify(&model, &suite, json, jobs),
        Command::Stats { model, suite, json, jobs } => cmd_stats(&model, suite.as_deref(), json, jobs),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ucit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
