//! Deterministic finite automata over proposition-set symbols: the
//! specification-side model. The transition function may be partial; a
//! missing entry rejects.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::symbol::ApSymbol;
use crate::trim::trim_mask;
use crate::validate::{Validate, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DfaError {
    #[error("symbol {symbol} mentions proposition {prop:?} outside the declared AP set")]
    UnknownProposition { symbol: String, prop: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDfa {
    ap: BTreeSet<String>,
    initial: String,
    states: BTreeSet<String>,
    accepting: BTreeSet<String>,
    transitions: BTreeMap<(String, ApSymbol), String>,
}

impl SpecDfa {
    pub fn new<I, S>(ap: I, initial: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let initial = initial.into();
        Self {
            ap: ap.into_iter().map(Into::into).collect(),
            states: BTreeSet::from([initial.clone()]),
            initial,
            accepting: BTreeSet::new(),
            transitions: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) {
        self.states.insert(name.into());
    }

    pub fn mark_accepting(&mut self, name: impl Into<String>) {
        let name = name.into();
        self.states.insert(name.clone());
        self.accepting.insert(name);
    }

    /// Inserts a transition; at most one successor per (state, symbol) is
    /// kept, so a later insert replaces an earlier one.
    pub fn add_transition(
        &mut self,
        from: impl Into<String>,
        symbol: ApSymbol,
        to: impl Into<String>,
    ) {
        let from = from.into();
        let to = to.into();
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        self.transitions.insert((from, symbol), to);
    }

    pub fn ap(&self) -> &BTreeSet<String> {
        &self.ap
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_accepting(&self, state: &str) -> bool {
        self.accepting.contains(state)
    }

    pub fn accepting(&self) -> impl Iterator<Item = &str> {
        self.accepting.iter().map(String::as_str)
    }

    pub fn step(&self, state: &str, symbol: &ApSymbol) -> Option<&str> {
        self.transitions
            .get(&(state.to_owned(), symbol.clone()))
            .map(String::as_str)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &ApSymbol, &str)> {
        self.transitions
            .iter()
            .map(|((a, s), b)| (a.as_str(), s, b.as_str()))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn outgoing<'a>(&'a self, from: &'a str) -> impl Iterator<Item = (&'a ApSymbol, &'a str)> + 'a {
        self.transitions
            .range((from.to_owned(), ApSymbol::empty())..)
            .take_while(move |((a, _), _)| a == from)
            .map(|((_, s), b)| (s, b.as_str()))
    }

    fn check_word(&self, word: &[ApSymbol]) -> Result<(), DfaError> {
        for symbol in word {
            for p in symbol.props() {
                if !self.ap.contains(p) {
                    return Err(DfaError::UnknownProposition {
                        symbol: symbol.to_string(),
                        prop: p.to_owned(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether the word is accepted. The empty word is accepted iff the
    /// initial state is accepting.
    pub fn accepts(&self, word: &[ApSymbol]) -> Result<bool, DfaError> {
        Ok(self.run(word)?.is_some())
    }

    /// The state sequence of the unique run, if the word is accepted.
    /// The sequence has one more entry than the word.
    pub fn run(&self, word: &[ApSymbol]) -> Result<Option<Vec<&str>>, DfaError> {
        self.check_word(word)?;
        let mut states = vec![self.initial.as_str()];
        let mut cur = self.initial.as_str();
        for symbol in word {
            match self.step(cur, symbol) {
                Some(next) => {
                    cur = next;
                    states.push(cur);
                }
                None => return Ok(None),
            }
        }
        Ok(if self.accepting.contains(cur) {
            Some(states)
        } else {
            None
        })
    }

    /// Restricts to states on some initial-to-accepting path. Returns `None`
    /// when no accepting state is reachable (the empty automaton).
    pub fn trim(&self) -> Option<SpecDfa> {
        let names: Vec<&String> = self.states.iter().collect();
        let index: BTreeMap<&String, usize> =
            names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let edges: Vec<(usize, usize)> = self
            .transitions
            .iter()
            .map(|((a, _), b)| (index[a], index[b]))
            .collect();
        let accepting: Vec<bool> = names.iter().map(|n| self.accepting.contains(*n)).collect();
        let mask = trim_mask(names.len(), &edges, index[&self.initial], &accepting);
        if !mask[index[&self.initial]] {
            return None;
        }
        let keep = |n: &String| mask[index[n]];
        Some(SpecDfa {
            ap: self.ap.clone(),
            initial: self.initial.clone(),
            states: self.states.iter().filter(|n| keep(n)).cloned().collect(),
            accepting: self.accepting.iter().filter(|n| keep(n)).cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .filter(|((a, _), b)| keep(a) && keep(b))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        })
    }

    pub fn to_dot(&self) -> String {
        let mut dot = String::from("digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n");
        let _ = writeln!(dot, "  __start [shape=point];");
        for s in &self.states {
            let shape = if self.accepting.contains(s) {
                ", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(dot, "  {s:?} [label={s:?}{shape}];");
        }
        let _ = writeln!(dot, "  __start -> {:?};", self.initial);
        for ((a, sym), b) in &self.transitions {
            let _ = writeln!(dot, "  {a:?} -> {b:?} [label=\"{sym}\"];");
        }
        dot.push_str("}\n");
        dot
    }
}

impl Validate for SpecDfa {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.states.contains(&self.initial) {
            out.push(Violation::new(
                "initial",
                format!("initial state {:?} is not a state", self.initial),
            ));
        }
        for s in &self.accepting {
            if !self.states.contains(s) {
                out.push(Violation::new(
                    "accepting",
                    format!("accepting state {s:?} is not a state"),
                ));
            }
        }
        for ((a, sym), b) in &self.transitions {
            let loc = format!("transition {a} -{sym}-> {b}");
            if !self.states.contains(a) || !self.states.contains(b) {
                out.push(Violation::new(&loc, "endpoint is not a state"));
            }
            if !sym.within(&self.ap) {
                out.push(Violation::new(
                    &loc,
                    "symbol mentions propositions outside the AP set",
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(props: &[&str]) -> ApSymbol {
        ApSymbol::new(props.iter().copied()).unwrap()
    }

    /// Eventually-a over AP {a}: accepting once `a` has been seen.
    fn eventually_a() -> SpecDfa {
        let mut d = SpecDfa::new(["a"], "s0");
        d.mark_accepting("s1");
        d.add_transition("s0", sym(&[]), "s0");
        d.add_transition("s0", sym(&["a"]), "s1");
        d.add_transition("s1", sym(&[]), "s1");
        d.add_transition("s1", sym(&["a"]), "s1");
        d
    }

    #[test]
    fn accepts_and_rejects() {
        let d = eventually_a();
        assert!(d.accepts(&[sym(&[]), sym(&["a"])]).unwrap());
        assert!(!d.accepts(&[sym(&[]), sym(&[])]).unwrap());
        assert!(!d.accepts(&[]).unwrap());
    }

    #[test]
    fn run_returns_state_sequence() {
        let d = eventually_a();
        let run = d.run(&[sym(&[]), sym(&["a"])]).unwrap().unwrap();
        assert_eq!(run, vec!["s0", "s0", "s1"]);
    }

    #[test]
    fn unknown_proposition_is_an_error() {
        let d = eventually_a();
        let word = [ApSymbol::new(["zz"]).unwrap()];
        assert!(matches!(
            d.accepts(&word),
            Err(DfaError::UnknownProposition { .. })
        ));
    }

    #[test]
    fn trim_drops_dead_and_unreachable_states() {
        let mut d = eventually_a();
        d.add_state("dead");
        d.add_transition("s0", sym(&["a"]), "s1"); // no-op duplicate
        d.add_transition("dead", sym(&[]), "dead");
        let t = d.trim().unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.trim().unwrap(), t);
    }

    #[test]
    fn trim_to_empty_when_no_accepting_reachable() {
        let mut d = SpecDfa::new(["a"], "s0");
        d.add_transition("s0", sym(&[]), "s0");
        d.mark_accepting("island");
        assert!(d.trim().is_none());
    }
}
