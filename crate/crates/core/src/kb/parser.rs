//! Text format:
//!
//! ```text
//! @facts
//! baby(m).
//! @rules
//! get_ill(X) :- go_to(X, Z).
//! @constraints
//! ! :- go_to(X, nanny), stay(X, home).
//! ```
//!
//! Sections are optional but must appear in this order. `%` starts a line comment.

use super::{ArityTable, Atom, KnowledgeBase, NegativeConstraint, Query, Rule, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Section(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
    Bang,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let single = match c {
                '%' => break,
                c if c.is_whitespace() => {
                    i += 1;
                    continue;
                }
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                '.' => Some(Tok::Dot),
                '!' => Some(Tok::Bang),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                });
                i += 1;
                continue;
            }
            if c == ':' {
                if chars.get(i + 1) == Some(&'-') {
                    out.push(Spanned {
                        tok: Tok::Implies,
                        line: line_no,
                        column,
                    });
                    i += 2;
                    continue;
                }
                return Err(syntax(line_no, column, "expected `:-`"));
            }
            let start = if c == '@' { i + 1 } else { i };
            let mut end = start;
            while end < chars.len() && is_ident_char(chars[end]) {
                end += 1;
            }
            let word: String = chars[start..end].iter().collect();
            let tok = match word.chars().next() {
                Some(first) if c == '@' && first.is_ascii_lowercase() => Tok::Section(word),
                Some(first) if c != '@' && first.is_ascii_lowercase() => Tok::Ident(word),
                Some(first) if c != '@' && first.is_ascii_uppercase() => Tok::Var(word),
                _ => {
                    return Err(syntax(
                        line_no,
                        column,
                        format!("unexpected character `{c}`"),
                    ))
                }
            };
            out.push(Spanned {
                tok,
                line: line_no,
                column,
            });
            i = end;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        let toks = lex(text)?;
        let lines = text.lines().count().max(1);
        let last_len = text.lines().last().map_or(0, |l| l.chars().count());
        Ok(Parser {
            toks,
            pos: 0,
            end: (lines, last_len + 1),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or(self.end, |s| (s.line, s.column))
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn term(&mut self) -> Result<Term> {
        let term = match self.peek() {
            Some(Tok::Ident(name)) => Term::Constant(name.clone()),
            Some(Tok::Var(name)) => Term::Variable(name.clone()),
            _ => return Err(self.error("expected a constant or variable")),
        };
        self.pos += 1;
        Ok(term)
    }

    fn atom(&mut self) -> Result<Atom> {
        let predicate = match self.peek() {
            Some(Tok::Ident(name)) => name.clone(),
            _ => return Err(self.error("expected a predicate name")),
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                args.push(self.term()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(Atom { predicate, args })
    }

    /// Atoms with the line each one starts on.
    fn atom_list(&mut self) -> Result<Vec<(Atom, usize)>> {
        let line = self.here().0;
        let mut atoms = vec![(self.atom()?, line)];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            let line = self.here().0;
            atoms.push((self.atom()?, line));
        }
        Ok(atoms)
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Section {
    Facts,
    Rules,
    Constraints,
}

/// Parses a knowledge base. Fact order follows the source order.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase> {
    let mut p = Parser::new(text)?;
    let mut arities = ArityTable::default();
    let mut section: Option<Section> = None;
    let mut facts = Vec::new();
    let mut rules = Vec::new();
    let mut constraints = Vec::new();

    while let Some(tok) = p.peek().cloned() {
        if let Tok::Section(name) = tok {
            let next = match name.as_str() {
                "facts" => Section::Facts,
                "rules" => Section::Rules,
                "constraints" => Section::Constraints,
                other => return Err(p.error(format!("unknown section `@{other}`"))),
            };
            if section.is_some_and(|s| s >= next) {
                return Err(p.error(format!(
                    "section `@{name}` out of order (expected @facts, @rules, @constraints)"
                )));
            }
            section = Some(next);
            p.pos += 1;
            continue;
        }
        match section {
            None => return Err(p.error("statement before any section header")),
            Some(Section::Facts) => {
                let line = p.here().0;
                let fact = p.atom()?;
                p.expect(Tok::Dot, "`.` after fact")?;
                if !fact.is_ground() {
                    return Err(Error::NonGroundFact {
                        fact: fact.to_string(),
                        line,
                    });
                }
                arities.check(&fact, line)?;
                facts.push(fact);
            }
            Some(Section::Rules) => {
                let head = p.atom_list()?;
                p.expect(Tok::Implies, "`:-`")?;
                let body = p.atom_list()?;
                p.expect(Tok::Dot, "`.` after rule")?;
                for (atom, line) in head.iter().chain(&body) {
                    arities.check(atom, *line)?;
                }
                rules.push(Rule::new(
                    format!("r{}", rules.len()),
                    body.into_iter().map(|(a, _)| a).collect(),
                    head.into_iter().map(|(a, _)| a).collect(),
                ));
            }
            Some(Section::Constraints) => {
                p.expect(Tok::Bang, "`!`")?;
                p.expect(Tok::Implies, "`:-`")?;
                let body = p.atom_list()?;
                p.expect(Tok::Dot, "`.` after constraint")?;
                for (atom, line) in &body {
                    arities.check(atom, *line)?;
                }
                constraints.push(NegativeConstraint {
                    id: format!("nc{}", constraints.len()),
                    body: body.into_iter().map(|(a, _)| a).collect(),
                });
            }
        }
    }
    KnowledgeBase::new(facts, rules, constraints)
}

/// Parses `atom{, atom}` with an optional trailing `.`.
pub fn parse_query(text: &str) -> Result<Query> {
    let mut p = Parser::new(text)?;
    let atoms = p.atom_list()?;
    if p.peek() == Some(&Tok::Dot) {
        p.pos += 1;
    }
    if p.peek().is_some() {
        return Err(p.error("unexpected trailing input"));
    }
    let mut arities = ArityTable::default();
    for (atom, line) in &atoms {
        arities.check(atom, *line)?;
    }
    Ok(Query {
        atoms: atoms.into_iter().map(|(a, _)| a).collect(),
    })
}
