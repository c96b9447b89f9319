//! A regular-expression language over edit pairs. An atom `({a}/{b}, 2)`
//! reads: execute `{a}` where the specification asked for `{b}`, at cost 2.
//! `.` stands for any single symbol (the same on both sides in a `(./., c)`
//! pass-through atom), `eps` for nothing consumed on that side. Alternation
//! `|`, juxtaposition, grouping and `*` have their usual meaning.

mod builders;
mod compile;

pub use builders::{build_cp, build_hsc, build_mrp, build_mvp, build_ps, SubstitutionCostMatrix};
pub use compile::{compile_rules, CompileOptions};

use std::fmt;

use thiserror::Error;

use crate::symbol::ApSymbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("cost error at {line}:{col}: {message}")]
    Cost {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("alphabet error: {0}")]
    Alphabet(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RulePattern {
    /// `.`: any single symbol over the alphabet
    Any,
    /// `eps`: nothing consumed on this side
    Epsilon,
    Symbol(ApSymbol),
}

impl fmt::Display for RulePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RulePattern::Any => write!(f, "."),
            RulePattern::Epsilon => write!(f, "eps"),
            RulePattern::Symbol(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleAtom {
    pub exec: RulePattern,
    pub spec: RulePattern,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleExpr {
    Atom(RuleAtom),
    Concat(Vec<RuleExpr>),
    Alt(Vec<RuleExpr>),
    Star(Box<RuleExpr>),
}

impl RuleExpr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_seq: bool) -> fmt::Result {
        match self {
            RuleExpr::Atom(a) => write!(f, "({}/{}, {})", a.exec, a.spec, fmt_cost(a.cost)),
            RuleExpr::Concat(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    item.fmt_prec(f, true)?;
                }
                Ok(())
            }
            RuleExpr::Alt(items) => {
                if in_seq {
                    write!(f, "(")?;
                }
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    item.fmt_prec(f, false)?;
                }
                if in_seq {
                    write!(f, ")")?;
                }
                Ok(())
            }
            RuleExpr::Star(inner) => {
                match inner.as_ref() {
                    // atoms carry their own parentheses
                    RuleExpr::Atom(_) => inner.fmt_prec(f, true)?,
                    other => {
                        write!(f, "(")?;
                        other.fmt_prec(f, false)?;
                        write!(f, ")")?;
                    }
                }
                write!(f, "*")
            }
        }
    }
}

impl fmt::Display for RuleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

fn fmt_cost(c: f64) -> String {
    // 3.0 prints as "3"; fractional costs keep their digits
    format!("{c}")
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn syntax(&self, message: impl Into<String>) -> RuleError {
        RuleError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), RuleError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.syntax(format!(
                "expected {:?}, found {:?}",
                c as char, got as char
            ))),
            None => Err(self.syntax(format!("expected {:?}, found end of input", c as char))),
        }
    }

    fn parse_expr(&mut self) -> Result<RuleExpr, RuleError> {
        let mut terms = vec![self.parse_term()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'|') {
                self.bump();
                terms.push(self.parse_term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            RuleExpr::Alt(terms)
        })
    }

    fn parse_term(&mut self) -> Result<RuleExpr, RuleError> {
        let mut factors = vec![self.parse_factor()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b'(') {
                factors.push(self.parse_factor()?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            RuleExpr::Concat(factors)
        })
    }

    fn parse_factor(&mut self) -> Result<RuleExpr, RuleError> {
        self.expect(b'(')?;
        self.skip_ws();
        let inner = if self.peek() == Some(b'(') {
            let e = self.parse_expr()?;
            self.expect(b')')?;
            e
        } else {
            self.parse_atom_body()?
        };
        self.skip_ws();
        if self.peek() == Some(b'*') {
            self.bump();
            Ok(RuleExpr::Star(Box::new(inner)))
        } else {
            Ok(inner)
        }
    }

    /// The inside of an atom, up to and including the closing parenthesis.
    fn parse_atom_body(&mut self) -> Result<RuleExpr, RuleError> {
        let exec = self.parse_pattern()?;
        self.expect(b'/')?;
        let spec = self.parse_pattern()?;
        self.expect(b',')?;
        let cost = self.parse_cost()?;
        if exec == RulePattern::Epsilon && spec == RulePattern::Epsilon {
            return Err(self.syntax("epsilon on both sides is not a legal edit"));
        }
        self.expect(b')')?;
        Ok(RuleExpr::Atom(RuleAtom { exec, spec, cost }))
    }

    fn parse_pattern(&mut self) -> Result<RulePattern, RuleError> {
        self.skip_ws();
        match self.peek() {
            Some(b'.') => {
                self.bump();
                Ok(RulePattern::Any)
            }
            Some(b'{') => {
                self.bump();
                let mut names = Vec::new();
                self.skip_ws();
                if self.peek() == Some(b'}') {
                    self.bump();
                    return Ok(RulePattern::Symbol(ApSymbol::empty()));
                }
                loop {
                    names.push(self.parse_name()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.bump();
                        }
                        Some(b'}') => {
                            self.bump();
                            break;
                        }
                        _ => return Err(self.syntax("expected ',' or '}' in symbol")),
                    }
                }
                let sym = ApSymbol::new(names).map_err(|e| self.syntax(e.to_string()))?;
                Ok(RulePattern::Symbol(sym))
            }
            Some(c) if !c.is_ascii_whitespace() => {
                let name = self.parse_name()?;
                if name == "eps" {
                    Ok(RulePattern::Epsilon)
                } else {
                    Err(self.syntax(format!(
                        "expected '.', 'eps' or a brace-delimited symbol, found {name:?}"
                    )))
                }
            }
            _ => Err(self.syntax("expected a pattern")),
        }
    }

    fn parse_name(&mut self) -> Result<String, RuleError> {
        self.skip_ws();
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || b"/,(){}|*.".contains(&c) {
                break;
            }
            name.push(c as char);
            self.bump();
        }
        if name.is_empty() {
            Err(self.syntax("expected a name"))
        } else {
            Ok(name)
        }
    }

    fn parse_cost(&mut self) -> Result<f64, RuleError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let negative = if self.peek() == Some(b'-') {
            self.bump();
            true
        } else {
            false
        };
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            digits.push(self.bump().unwrap() as char);
        }
        if digits.is_empty() {
            return Err(self.syntax("expected a cost"));
        }
        let value: f64 = digits.parse().map_err(|_| RuleError::Cost {
            line,
            col,
            message: format!("malformed cost {digits:?}"),
        })?;
        if negative {
            return Err(RuleError::Cost {
                line,
                col,
                message: format!("cost must be nonnegative, found -{digits}"),
            });
        }
        Ok(value)
    }
}

/// Parses the rules language. Whitespace is insignificant.
pub fn parse_rules(text: &str) -> Result<RuleExpr, RuleError> {
    let mut p = Parser::new(text);
    let expr = p.parse_expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.syntax(format!("unexpected trailing input starting at {:?}", c as char)));
    }
    Ok(expr)
}
