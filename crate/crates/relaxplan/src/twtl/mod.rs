//! Time-window temporal logic over finite words.
//!
//! The supported fragment is hold literals `H^d s` / `H^d !s`, conjunction,
//! disjunction, concatenation, and time-window brackets `[phi]^[a,b]`.
//! Negation of compound formulas is rejected at parse time.
//!
//! Text grammar:
//!
//! ```text
//! formula := disj
//! disj    := conj ('||' conj)*
//! conj    := seq ('&&' seq)*
//! seq     := unit ('.' unit)*
//! unit    := 'H^' int ['!'] name
//!          | '[' formula ']^[' int ',' int ']'
//!          | '(' formula ')'
//! ```
//!
//! A word over sets of atomic propositions satisfies a formula when some
//! prefix completes it: `H^d s` takes `d+1` consecutive symbols containing
//! `s`, concatenation starts its right operand one step after the left
//! completes, and `[phi]^[a,b]` allows `phi` to start at or after offset `a`
//! and requires it to complete by offset `b`.

mod dfa_build;
mod extend;
mod nfa;

pub use dfa_build::{twtl_to_annotated_dfa, twtl_to_dfa, AnnotatedDfa};
pub use extend::{extend_ts, ExtendedTs};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::symbol::check_prop_name;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TwtlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("outside the supported fragment: {0}")]
    Fragment(String),
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
    #[error("construction budget exceeded: {0}")]
    Budget(String),
    #[error("word is not accepted")]
    NotAccepted,
}

/// Deadline extensions for the time-window operators of a formula, listed in
/// preorder. Entries are clamped at zero: finishing early never counts as a
/// negative extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalRelaxation {
    pub tau: Vec<u32>,
}

impl TemporalRelaxation {
    /// Sum of the entries: the linear temporal relaxation.
    pub fn ltr(&self) -> u64 {
        self.tau.iter().map(|&t| u64::from(t)).sum()
    }
}

impl fmt::Display for TemporalRelaxation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau=(")?;
        for (i, t) in self.tau.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ") ltr={}", self.ltr())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwtlFormula {
    Hold {
        duration: u32,
        prop: String,
        negated: bool,
    },
    And(Box<TwtlFormula>, Box<TwtlFormula>),
    Or(Box<TwtlFormula>, Box<TwtlFormula>),
    Concat(Box<TwtlFormula>, Box<TwtlFormula>),
    Within {
        child: Box<TwtlFormula>,
        lo: u32,
        hi: u32,
    },
}

impl TwtlFormula {
    pub fn hold(duration: u32, prop: impl Into<String>) -> Self {
        TwtlFormula::Hold {
            duration,
            prop: prop.into(),
            negated: false,
        }
    }

    pub fn hold_not(duration: u32, prop: impl Into<String>) -> Self {
        TwtlFormula::Hold {
            duration,
            prop: prop.into(),
            negated: true,
        }
    }

    pub fn and(self, other: Self) -> Self {
        TwtlFormula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        TwtlFormula::Or(Box::new(self), Box::new(other))
    }

    pub fn then(self, other: Self) -> Self {
        TwtlFormula::Concat(Box::new(self), Box::new(other))
    }

    pub fn within(self, lo: u32, hi: u32) -> Self {
        assert!(lo <= hi, "window [{lo},{hi}] is empty");
        TwtlFormula::Within {
            child: Box::new(self),
            lo,
            hi,
        }
    }

    /// Propositions mentioned anywhere in the formula.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            TwtlFormula::Hold { prop, .. } => {
                out.insert(prop.clone());
            }
            TwtlFormula::And(l, r) | TwtlFormula::Or(l, r) | TwtlFormula::Concat(l, r) => {
                l.collect_props(out);
                r.collect_props(out);
            }
            TwtlFormula::Within { child, .. } => child.collect_props(out),
        }
    }

    /// Deadlines of the time-window operators in preorder.
    pub fn deadlines(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_deadlines(&mut out);
        out
    }

    fn collect_deadlines(&self, out: &mut Vec<u32>) {
        match self {
            TwtlFormula::Hold { .. } => {}
            TwtlFormula::And(l, r) | TwtlFormula::Or(l, r) | TwtlFormula::Concat(l, r) => {
                l.collect_deadlines(out);
                r.collect_deadlines(out);
            }
            TwtlFormula::Within { child, hi, .. } => {
                out.push(*hi);
                child.collect_deadlines(out);
            }
        }
    }

    /// Number of time-window operators.
    pub fn within_count(&self) -> usize {
        self.deadlines().len()
    }

    /// Latest completion offset of any satisfying prefix: the norm of the
    /// formula.
    pub fn horizon(&self) -> u64 {
        match self {
            TwtlFormula::Hold { duration, .. } => u64::from(*duration),
            TwtlFormula::And(l, r) | TwtlFormula::Or(l, r) => l.horizon().max(r.horizon()),
            TwtlFormula::Concat(l, r) => l.horizon() + r.horizon() + 1,
            TwtlFormula::Within { hi, .. } => u64::from(*hi),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let prec = match self {
            TwtlFormula::Or(..) => 0,
            TwtlFormula::And(..) => 1,
            TwtlFormula::Concat(..) => 2,
            TwtlFormula::Hold { .. } | TwtlFormula::Within { .. } => 3,
        };
        if prec < ctx {
            write!(f, "(")?;
        }
        match self {
            TwtlFormula::Hold {
                duration,
                prop,
                negated,
            } => {
                let bang = if *negated { "!" } else { "" };
                write!(f, "H^{duration} {bang}{prop}")?;
            }
            TwtlFormula::Or(l, r) => {
                l.fmt_prec(f, 0)?;
                write!(f, " || ")?;
                r.fmt_prec(f, 1)?;
            }
            TwtlFormula::And(l, r) => {
                l.fmt_prec(f, 1)?;
                write!(f, " && ")?;
                r.fmt_prec(f, 2)?;
            }
            TwtlFormula::Concat(l, r) => {
                l.fmt_prec(f, 2)?;
                write!(f, " . ")?;
                r.fmt_prec(f, 3)?;
            }
            TwtlFormula::Within { child, lo, hi } => {
                write!(f, "[")?;
                child.fmt_prec(f, 0)?;
                write!(f, "]^[{lo},{hi}]")?;
            }
        }
        if prec < ctx {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for TwtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

struct Parser<'a> {
    rest: &'a [u8],
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            rest: text.as_bytes(),
            line: 1,
            col: 1,
        }
    }

    fn syntax(&self, message: impl Into<String>) -> TwtlError {
        TwtlError::Syntax {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let (&c, rest) = self.rest.split_first()?;
        self.rest = rest;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.rest.first(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.rest.first().copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), TwtlError> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{}'", c as char)))
        }
    }

    /// Consumes `s` if it is next (after whitespace); never consumes on a
    /// partial match.
    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest.starts_with(s.as_bytes()) {
            for _ in 0..s.len() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn parse_int(&mut self) -> Result<u32, TwtlError> {
        self.skip_ws();
        let mut digits = String::new();
        while matches!(self.rest.first(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap() as char);
        }
        if digits.is_empty() {
            return Err(self.syntax("expected a number"));
        }
        digits
            .parse()
            .map_err(|_| self.syntax(format!("number {digits} is out of range")))
    }

    fn parse_name(&mut self) -> Result<String, TwtlError> {
        self.skip_ws();
        let mut name = String::new();
        while let Some(&c) = self.rest.first() {
            if c.is_ascii_whitespace() || b"[]^!&|.(),{}/*".contains(&c) {
                break;
            }
            name.push(self.bump().unwrap() as char);
        }
        check_prop_name(&name).map_err(|e| self.syntax(e.to_string()))?;
        Ok(name)
    }

    fn parse_formula(&mut self) -> Result<TwtlFormula, TwtlError> {
        let mut left = self.parse_conj()?;
        while self.eat_str("||") {
            let right = self.parse_conj()?;
            left = left.or(right);
        }
        Ok(left)
    }

    fn parse_conj(&mut self) -> Result<TwtlFormula, TwtlError> {
        let mut left = self.parse_seq()?;
        while self.eat_str("&&") {
            let right = self.parse_seq()?;
            left = left.and(right);
        }
        Ok(left)
    }

    fn parse_seq(&mut self) -> Result<TwtlFormula, TwtlError> {
        let mut left = self.parse_unit()?;
        while self.eat_str(".") {
            let right = self.parse_unit()?;
            left = left.then(right);
        }
        Ok(left)
    }

    fn parse_unit(&mut self) -> Result<TwtlFormula, TwtlError> {
        match self.peek() {
            Some(b'!') => Err(TwtlError::Fragment(
                "negation is only supported on hold literals, as in H^d !p".into(),
            )),
            Some(b'H') => {
                self.bump();
                self.eat(b'^')?;
                let duration = self.parse_int()?;
                let negated = if self.peek() == Some(b'!') {
                    self.bump();
                    true
                } else {
                    false
                };
                let prop = self.parse_name()?;
                Ok(TwtlFormula::Hold {
                    duration,
                    prop,
                    negated,
                })
            }
            Some(b'[') => {
                self.bump();
                let child = self.parse_formula()?;
                self.eat(b']')?;
                self.eat(b'^')?;
                self.eat(b'[')?;
                let lo = self.parse_int()?;
                self.eat(b',')?;
                let hi = self.parse_int()?;
                self.eat(b']')?;
                if lo > hi {
                    return Err(self.syntax(format!("window [{lo},{hi}] is empty")));
                }
                Ok(child.within(lo, hi))
            }
            Some(b'(') => {
                self.bump();
                let inner = self.parse_formula()?;
                self.eat(b')')?;
                Ok(inner)
            }
            Some(c) => Err(self.syntax(format!(
                "expected 'H^', '[', or '(', found '{}'",
                c as char
            ))),
            None => Err(self.syntax("expected a formula, found end of input")),
        }
    }
}

pub fn parse_twtl(text: &str) -> Result<TwtlFormula, TwtlError> {
    let mut p = Parser::new(text);
    let formula = p.parse_formula()?;
    if p.peek().is_some() {
        return Err(p.syntax("trailing input after the formula"));
    }
    Ok(formula)
}
