//! `.ucit` model documents.
//!
//! A document is a sequence of `key: value` sections starting in column 1.
//! Indented lines continue the section above: entries for the block
//! sections `factors`, `transitions` and `bindings`, or more text for the
//! others. `#` starts a comment. See `docs/formats.md` for the full syntax.

mod expr;

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use itertools::Itertools;

use crate::enumerate::{Criterion, EnumerateOptions};
use crate::spaces::{
    Atom, Constraint, CoveringArrayModel, Factor, FsmModel, SequenceModel, SequenceVariant, SpaceModel, Transition,
};

use expr::{is_ident_char, parse_expr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed model: one space model plus its coverage criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub model: SpaceModel,
    pub criterion: Criterion,
    /// FSM only: state orderings may mention the initial and final states.
    pub include_terminal_states: bool,
}

impl ModelDocument {
    pub fn enumerate_options(&self, jobs: usize) -> EnumerateOptions {
        EnumerateOptions { include_terminal_states: self.include_terminal_states, jobs }
    }
}

/// Text with the source position of every character, so that errors in
/// joined or sliced text still point into the file.
#[derive(Clone, Debug)]
pub(crate) struct Source {
    text: String,
    positions: Vec<(usize, usize)>,
    end: (usize, usize),
}

impl Source {
    pub(crate) fn single(line: usize, column: usize, text: &str) -> Self {
        let n = text.chars().count();
        Source {
            text: text.to_string(),
            positions: (0..n).map(|i| (line, column + i)).collect(),
            end: (line, column + n),
        }
    }

    fn join(pieces: &[Source]) -> Self {
        let mut out = Source { text: String::new(), positions: Vec::new(), end: (0, 0) };
        for (i, p) in pieces.iter().enumerate() {
            if i > 0 {
                out.text.push(' ');
                out.positions.push(out.end);
            }
            out.text.push_str(&p.text);
            out.positions.extend_from_slice(&p.positions);
            out.end = p.end;
        }
        out
    }

    fn len(&self) -> usize {
        self.positions.len()
    }

    fn position(&self, offset: usize) -> (usize, usize) {
        self.positions.get(offset).copied().unwrap_or(self.end)
    }

    pub(crate) fn error(&self, offset: usize, message: String) -> ParseError {
        let (line, column) = self.position(offset);
        ParseError { line, column, message }
    }

    /// Characters `start..end` (char offsets).
    fn slice(&self, start: usize, end: usize) -> Source {
        let text: String = self.text.chars().skip(start).take(end - start).collect();
        Source { text, positions: self.positions[start..end].to_vec(), end: self.position(end) }
    }

    fn trimmed(&self) -> Source {
        let chars: Vec<char> = self.text.chars().collect();
        let start = chars.iter().position(|c| !c.is_whitespace()).unwrap_or(chars.len());
        let end = chars.iter().rposition(|c| !c.is_whitespace()).map_or(start, |i| i + 1);
        self.slice(start, end)
    }

    fn find(&self, pat: &str) -> Option<usize> {
        self.text.find(pat).map(|byte| self.text[..byte].chars().count())
    }

    fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }

    /// Words separated by commas and/or whitespace, with their offsets.
    fn words(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        let mut current = String::new();
        let mut start = 0;
        for (i, c) in self.text.chars().enumerate() {
            if c.is_whitespace() || c == ',' {
                if !current.is_empty() {
                    out.push((std::mem::take(&mut current), start));
                }
            } else {
                if current.is_empty() {
                    start = i;
                }
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push((current, start));
        }
        out
    }

    fn identifiers(&self, what: &str) -> Result<Vec<(String, usize)>, ParseError> {
        let words = self.words();
        for (w, at) in &words {
            check_ident(self, w, *at, what)?;
        }
        Ok(words)
    }
}

fn check_ident(src: &Source, word: &str, at: usize, what: &str) -> Result<(), ParseError> {
    if word.is_empty() || !word.chars().all(is_ident_char) {
        return Err(src.error(at, format!("invalid {what} name `{word}` (letters, digits, `_` and `.` only)")));
    }
    Ok(())
}

struct Section {
    key: String,
    at: Source,
    inline: Source,
    entries: Vec<Source>,
}

impl Section {
    fn value(&self) -> Result<Source, ParseError> {
        let mut pieces = vec![self.inline.clone()];
        pieces.extend(self.entries.iter().cloned());
        let joined = Source::join(&pieces).trimmed();
        if joined.is_blank() {
            return Err(self.at.error(0, format!("section `{}` needs a value", self.key)));
        }
        Ok(joined)
    }

    fn block(&self) -> Result<&[Source], ParseError> {
        if !self.inline.is_blank() {
            return Err(self.inline.error(0, format!("entries of `{}` go on the following indented lines", self.key)));
        }
        Ok(&self.entries)
    }
}

const KEYS: &[&str] = &[
    "kind",
    "factors",
    "events",
    "variant",
    "states",
    "initial",
    "final",
    "transitions",
    "bindings",
    "constraint",
    "criterion",
    "path-bound",
    "include-terminals",
];

fn split_sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let src = Source::single(line, 1, content);
        if content.starts_with(|c: char| c.is_whitespace()) {
            let Some(current) = sections.last_mut() else {
                return Err(src.trimmed().error(0, "indented line outside any section".into()));
            };
            current.entries.push(src.trimmed());
            continue;
        }
        let Some(colon) = src.find(":") else {
            return Err(src.error(0, "expected `key: value`".into()));
        };
        let key_src = src.slice(0, colon);
        let key = key_src.text.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(src.error(0, format!("unknown section `{key}`")));
        }
        if sections.iter().any(|s| s.key == key) {
            return Err(src.error(0, format!("duplicate section `{key}`")));
        }
        sections.push(Section { key, at: key_src, inline: src.slice(colon + 1, src.len()), entries: Vec::new() });
    }
    Ok(sections)
}

/// `name: rest` entry of a block section.
fn entry(src: &Source, what: &str) -> Result<(String, Source, Source), ParseError> {
    let Some(colon) = src.find(":") else {
        return Err(src.error(0, format!("expected `{what}: ...`")));
    };
    let name_src = src.slice(0, colon).trimmed();
    check_ident(&name_src, &name_src.text, 0, what)?;
    Ok((name_src.text.clone(), name_src, src.slice(colon + 1, src.len())))
}

fn parse_number(src: &Source, word: &str, at: usize) -> Result<usize, ParseError> {
    word.parse().map_err(|_| src.error(at, format!("expected a number, found `{word}`")))
}

fn parse_criterion(src: &Source) -> Result<Criterion, ParseError> {
    let mut parts = Vec::new();
    let mut start = 0;
    let chars: Vec<char> = src.text.chars().collect();
    for end in (0..=chars.len()).filter(|&i| i == chars.len() || chars[i] == '+') {
        parts.push(src.slice(start, end).trimmed());
        start = end + 1;
    }
    let mut out = Vec::new();
    for part in &parts {
        let words = part.words();
        let word = |i: usize| words.get(i).map(|(w, _)| w.as_str());
        let number = |i: usize, prefix: &str| -> Result<usize, ParseError> {
            let Some((w, at)) = words.get(i) else {
                return Err(part.error(part.len(), "missing strength".into()));
            };
            let Some(digits) = w.strip_prefix(prefix) else {
                return Err(part.error(*at, format!("expected `{prefix}N`, found `{w}`")));
            };
            parse_number(part, digits, at + prefix.len())
        };
        let (criterion, used) = match word(0) {
            Some("strength") => (Criterion::CaStrength(number(1, "")?), 2),
            Some("seq-strength") => (Criterion::SeqStrength(number(1, "")?), 2),
            Some("hybrid") => (Criterion::FsmHybrid { value_t: number(1, "value=")?, seq_t: number(2, "seq=")? }, 3),
            Some("none") if parts.len() == 1 => return Ok(Criterion::Composite(Vec::new())),
            Some(other) => {
                return Err(part.error(0, format!("unknown criterion `{other}` (strength, seq-strength, hybrid)")))
            }
            None => return Err(part.error(0, "empty criterion".into())),
        };
        if let Some((w, at)) = words.get(used) {
            return Err(part.error(*at, format!("unexpected `{w}` in criterion")));
        }
        out.push(criterion);
    }
    Ok(if out.len() == 1 { out.pop().unwrap() } else { Criterion::Composite(out) })
}

fn parse_factors(section: &Section) -> Result<Vec<Factor>, ParseError> {
    let mut factors: Vec<Factor> = Vec::new();
    for e in section.block()? {
        let (name, name_src, rest) = entry(e, "factor")?;
        if factors.iter().any(|f| f.name == name) {
            return Err(name_src.error(0, format!("duplicate factor `{name}`")));
        }
        let values = rest.identifiers("value")?;
        if values.len() < 2 {
            return Err(name_src.error(0, format!("factor `{name}` needs at least two values")));
        }
        let mut seen = HashSet::new();
        for (v, at) in &values {
            if !seen.insert(v.as_str()) {
                return Err(rest.error(*at, format!("duplicate value `{v}` in factor `{name}`")));
            }
        }
        factors.push(Factor { name, domain: values.into_iter().map(|(v, _)| v).collect() });
    }
    if factors.is_empty() {
        return Err(section.at.error(0, "no factors declared".into()));
    }
    Ok(factors)
}

fn unique_names(src: &Source, what: &str) -> Result<Vec<String>, ParseError> {
    let words = src.identifiers(what)?;
    let mut seen = HashSet::new();
    for (w, at) in &words {
        if !seen.insert(w.as_str()) {
            return Err(src.error(*at, format!("duplicate {what} `{w}`")));
        }
    }
    Ok(words.into_iter().map(|(w, _)| w).collect())
}

fn value_resolver(factors: &[Factor]) -> impl Fn(&Atom) -> Result<(), String> + '_ {
    move |atom| match atom {
        Atom::Value { factor, value } => {
            let f = factors.iter().find(|f| &f.name == factor).ok_or_else(|| format!("unknown factor `{factor}`"))?;
            if f.value_index(value).is_none() {
                return Err(format!("`{value}` is not a value of factor `{factor}`"));
            }
            Ok(())
        }
        Atom::Before(..) => Err("`before` atoms only apply to sequence models".into()),
    }
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let sections = split_sections(text)?;
    let get = |key: &str| sections.iter().find(|s| s.key == key);
    let eof = Source::single(text.lines().count().max(1), 1, "");

    let kind_section = get("kind").ok_or_else(|| eof.error(0, "missing section `kind`".into()))?;
    let kind_src = kind_section.value()?;
    let allowed: &[&str] = match kind_src.text.as_str() {
        "ca" => &["kind", "factors", "constraint", "criterion"],
        "sequence" => &["kind", "events", "variant", "constraint", "criterion"],
        "fsm" => &[
            "kind",
            "states",
            "initial",
            "final",
            "transitions",
            "factors",
            "bindings",
            "constraint",
            "criterion",
            "path-bound",
            "include-terminals",
        ],
        other => return Err(kind_src.error(0, format!("unknown kind `{other}` (ca, sequence, fsm)"))),
    };
    for s in &sections {
        if !allowed.contains(&s.key.as_str()) {
            return Err(s.at.error(0, format!("section `{}` does not apply to kind `{}`", s.key, kind_src.text)));
        }
    }
    let required = |key: &str| get(key).ok_or_else(|| eof.error(0, format!("missing section `{key}`")));
    let criterion = parse_criterion(&required("criterion")?.value()?)?;

    let mut include_terminal_states = false;
    let model = match kind_src.text.as_str() {
        "ca" => {
            let factors = parse_factors(required("factors")?)?;
            let constraint =
                get("constraint").map(|s| parse_expr(&s.value()?, &value_resolver(&factors))).transpose()?;
            SpaceModel::Ca(CoveringArrayModel { factors, constraint })
        }
        "sequence" => {
            let events = unique_names(&required("events")?.value()?, "event")?;
            let variant = match get("variant") {
                None => SequenceVariant::Permutation,
                Some(s) => {
                    let v = s.value()?;
                    let words = v.words();
                    match words.iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>()[..] {
                        ["permutation"] => SequenceVariant::Permutation,
                        ["variable-length", n] => {
                            SequenceVariant::VariableLength { max_len: parse_number(&v, n, words[1].1)? }
                        }
                        _ => {
                            return Err(v.error(0, "expected `permutation` or `variable-length N`".into()));
                        }
                    }
                }
            };
            let resolve = |atom: &Atom| match atom {
                Atom::Before(a, b) => {
                    for e in [a, b] {
                        if !events.contains(e) {
                            return Err(format!("unknown event `{e}`"));
                        }
                    }
                    Ok(())
                }
                Atom::Value { .. } => Err("sequence constraints use `before(a, b)` atoms".into()),
            };
            let constraint = get("constraint").map(|s| parse_expr(&s.value()?, &resolve)).transpose()?;
            SpaceModel::Sequence(SequenceModel { events, variant, constraint })
        }
        _ => {
            let states_src = required("states")?.value()?;
            let states = unique_names(&states_src, "state")?;
            if states.len() < 2 {
                return Err(states_src.error(0, "an fsm needs at least an initial and a final state".into()));
            }
            let state_ref = |src: &Source, name: &str, at: usize| -> Result<String, ParseError> {
                if states.iter().any(|s| s == name) {
                    Ok(name.to_string())
                } else {
                    Err(src.error(at, format!("unknown state `{name}`")))
                }
            };
            let single_state = |key: &str, default: &String| -> Result<String, ParseError> {
                match get(key) {
                    None => Ok(default.clone()),
                    Some(s) => {
                        let v = s.value()?;
                        state_ref(&v, &v.text, 0)
                    }
                }
            };
            let initial = single_state("initial", &states[0])?;
            let final_state = single_state("final", states.last().unwrap())?;
            let factors = match get("factors") {
                Some(s) => parse_factors(s)?,
                None => Vec::new(),
            };

            let mut bindings = IndexMap::new();
            if let Some(section) = get("bindings") {
                for e in section.block()? {
                    let (state, state_src, rest) = entry(e, "state")?;
                    state_ref(&state_src, &state, 0)?;
                    for (factor, at) in rest.identifiers("factor")? {
                        if !factors.iter().any(|f| f.name == factor) {
                            return Err(rest.error(at, format!("unknown factor `{factor}`")));
                        }
                        if bindings.insert(factor.clone(), state.clone()).is_some() {
                            return Err(rest.error(at, format!("factor `{factor}` is bound to more than one state")));
                        }
                    }
                }
            }
            if let Some(f) = factors.iter().find(|f| !bindings.contains_key(&f.name)) {
                let at = get("bindings").map_or(&eof, |s| &s.at);
                return Err(at.error(0, format!("factor `{}` is not bound to a state", f.name)));
            }

            let mut transitions: Vec<Transition> = Vec::new();
            for e in required("transitions")?.block()? {
                let (name, name_src, rest) = entry(e, "transition")?;
                if transitions.iter().any(|t| t.name == name) {
                    return Err(name_src.error(0, format!("duplicate transition `{name}`")));
                }
                let Some(arrow) = rest.find("->") else {
                    return Err(rest.error(0, "expected `FROM -> TO`".into()));
                };
                let from_src = rest.slice(0, arrow).trimmed();
                let from = state_ref(&from_src, &from_src.text, 0)?;
                let after = rest.slice(arrow + 2, rest.len());
                let (to_src, guard_src) = match after.find("guard:") {
                    Some(g) => (after.slice(0, g).trimmed(), Some(after.slice(g + 6, after.len()))),
                    None => (after.trimmed(), None),
                };
                let to = state_ref(&to_src, &to_src.text, 0)?;
                let guard = guard_src.map(|g| parse_expr(&g.trimmed(), &value_resolver(&factors))).transpose()?;
                transitions.push(Transition { name, from, to, guard });
            }

            let path_bound = get("path-bound")
                .map(|s| {
                    let v = s.value()?;
                    parse_number(&v, &v.text, 0)
                })
                .transpose()?;
            if let Some(s) = get("include-terminals") {
                let v = s.value()?;
                include_terminal_states = match v.text.as_str() {
                    "yes" | "true" => true,
                    "no" | "false" => false,
                    other => return Err(v.error(0, format!("expected yes or no, found `{other}`"))),
                };
            }
            let constraint =
                get("constraint").map(|s| parse_expr(&s.value()?, &value_resolver(&factors))).transpose()?;
            SpaceModel::Fsm(FsmModel {
                states,
                initial,
                final_state,
                transitions,
                factors,
                bindings,
                constraint,
                path_bound,
            })
        }
    };
    Ok(ModelDocument { model, criterion, include_terminal_states })
}

fn write_factors(f: &mut fmt::Formatter<'_>, factors: &[Factor]) -> fmt::Result {
    writeln!(f, "factors:")?;
    for factor in factors {
        writeln!(f, "  {}: {}", factor.name, factor.domain.join(", "))?;
    }
    Ok(())
}

fn write_constraint(f: &mut fmt::Formatter<'_>, c: &Option<Constraint>) -> fmt::Result {
    match c {
        Some(c) => writeln!(f, "constraint: {c}"),
        None => Ok(()),
    }
}

/// Canonical document text; parsing it yields an equal document.
impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.model {
            SpaceModel::Ca(m) => {
                writeln!(f, "kind: ca")?;
                write_factors(f, &m.factors)?;
                write_constraint(f, &m.constraint)?;
            }
            SpaceModel::Sequence(m) => {
                writeln!(f, "kind: sequence")?;
                writeln!(f, "events: {}", m.events.join(", "))?;
                match m.variant {
                    SequenceVariant::Permutation => writeln!(f, "variant: permutation")?,
                    SequenceVariant::VariableLength { max_len } => writeln!(f, "variant: variable-length {max_len}")?,
                }
                write_constraint(f, &m.constraint)?;
            }
            SpaceModel::Fsm(m) => {
                writeln!(f, "kind: fsm")?;
                writeln!(f, "states: {}", m.states.join(", "))?;
                writeln!(f, "initial: {}", m.initial)?;
                writeln!(f, "final: {}", m.final_state)?;
                writeln!(f, "transitions:")?;
                for t in &m.transitions {
                    write!(f, "  {}: {} -> {}", t.name, t.from, t.to)?;
                    if let Some(g) = &t.guard {
                        write!(f, " guard: {g}")?;
                    }
                    writeln!(f)?;
                }
                if !m.factors.is_empty() {
                    write_factors(f, &m.factors)?;
                    writeln!(f, "bindings:")?;
                    for state in &m.states {
                        let bound = m
                            .factors
                            .iter()
                            .filter(|x| m.bindings.get(&x.name) == Some(state))
                            .map(|x| x.name.as_str())
                            .join(", ");
                        if !bound.is_empty() {
                            writeln!(f, "  {state}: {bound}")?;
                        }
                    }
                }
                if let Some(b) = m.path_bound {
                    writeln!(f, "path-bound: {b}")?;
                }
                if self.include_terminal_states {
                    writeln!(f, "include-terminals: yes")?;
                }
                write_constraint(f, &m.constraint)?;
            }
        }
        writeln!(f, "criterion: {}", self.criterion)
    }
}
