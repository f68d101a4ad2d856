//! Constraint expression grammar.
//!
//! ```text
//! iff     := implies ("<->" implies)*          left associative
//! implies := or ("->" implies)?                right associative
//! or      := and ("||" and)*
//! and     := unary ("&&" unary)*
//! unary   := "!" unary | primary
//! primary := "true" | "false" | IDENT "=" IDENT
//!          | "before" "(" IDENT "," IDENT ")" | "(" iff ")"
//! ```

use super::{ParseError, Source};
use crate::spaces::{Atom, Constraint};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Eq,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Not => "`!`".into(),
            Tok::And => "`&&`".into(),
            Tok::Or => "`||`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

pub(super) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(src: &Source) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let two = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
        let tok = if c.is_whitespace() {
            i += 1;
            continue;
        } else if two("<->") {
            i += 3;
            Tok::Iff
        } else if two("->") {
            i += 2;
            Tok::Implies
        } else if two("&&") {
            i += 2;
            Tok::And
        } else if two("||") {
            i += 2;
            Tok::Or
        } else if is_ident_char(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '!' => Tok::Not,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '=' => Tok::Eq,
                ',' => Tok::Comma,
                other => return Err(src.error(start, format!("unexpected character `{other}`"))),
            }
        };
        out.push((tok, start));
    }
    Ok(out)
}

/// Checks a named atom against the model; the message becomes a parse error
/// at the atom.
pub(super) type Resolver<'a> = dyn Fn(&Atom) -> Result<(), String> + 'a;

struct Parser<'a> {
    src: &'a Source,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    resolve: &'a Resolver<'a>,
}

pub(super) fn parse_expr(src: &Source, resolve: &Resolver<'_>) -> Result<Constraint, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0, resolve };
    if p.toks.is_empty() {
        return Err(src.error(0, "expected an expression".into()));
    }
    let e = p.iff()?;
    if let Some((t, at)) = p.toks.get(p.pos) {
        return Err(src.error(*at, format!("unexpected {} after expression", t.describe())));
    }
    Ok(e)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |(_, at)| *at)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self.peek().map_or("end of expression".to_string(), Tok::describe);
        self.src.error(self.offset(), format!("expected {wanted}, found {found}"))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn iff(&mut self) -> Result<Constraint, ParseError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            lhs = lhs.iff(self.implies()?);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Constraint, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            return Ok(lhs.implies(self.implies()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Constraint, ParseError> {
        let mut items = vec![self.and()?];
        while self.eat(&Tok::Or) {
            items.push(self.and()?);
        }
        Ok(Constraint::or(items))
    }

    fn and(&mut self) -> Result<Constraint, ParseError> {
        let mut items = vec![self.unary()?];
        while self.eat(&Tok::And) {
            items.push(self.unary()?);
        }
        Ok(Constraint::and(items))
    }

    fn unary(&mut self) -> Result<Constraint, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(self.unary()?.negate());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Constraint, ParseError> {
        let start = self.offset();
        if self.eat(&Tok::LParen) {
            let e = self.iff()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let name = self.ident()?;
        let atom = if self.eat(&Tok::Eq) {
            Atom::Value { factor: name, value: self.ident()? }
        } else if name == "before" && self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let a = self.ident()?;
            self.expect(Tok::Comma)?;
            let b = self.ident()?;
            self.expect(Tok::RParen)?;
            Atom::Before(a, b)
        } else if name == "true" {
            return Ok(Constraint::Const(true));
        } else if name == "false" {
            return Ok(Constraint::Const(false));
        } else {
            return Err(self
                .src
                .error(start, format!("expected an atom `factor=value` or `before(a, b)`, found `{name}`")));
        };
        (self.resolve)(&atom).map_err(|msg| self.src.error(start, msg))?;
        Ok(Constraint::Atom(atom))
    }
}
