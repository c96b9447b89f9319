//! Weighted transition systems: the robot-side model. States carry an
//! observation label; transitions carry integer durations (at least 1 in a
//! valid model).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::symbol::ApSymbol;
use crate::validate::{Validate, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("trajectory is not a run: {0}")]
    NotARun(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    ap: BTreeSet<String>,
    initial: String,
    states: BTreeMap<String, ApSymbol>,
    transitions: BTreeMap<(String, String), u64>,
}

impl TransitionSystem {
    pub fn new<I, S>(ap: I, initial: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            ap: ap.into_iter().map(Into::into).collect(),
            initial: initial.into(),
            states: BTreeMap::new(),
            transitions: BTreeMap::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>, label: ApSymbol) {
        self.states.insert(name.into(), label);
    }

    pub fn add_transition(&mut self, from: impl Into<String>, to: impl Into<String>, weight: u64) {
        self.transitions.insert((from.into(), to.into()), weight);
    }

    pub fn ap(&self) -> &BTreeSet<String> {
        &self.ap
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.states.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn contains_state(&self, name: &str) -> bool {
        self.states.contains_key(name)
    }

    pub fn label(&self, state: &str) -> Option<&ApSymbol> {
        self.states.get(state)
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<u64> {
        self.transitions.get(&(from.to_owned(), to.to_owned())).copied()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.transitions
            .iter()
            .map(|((a, b), w)| (a.as_str(), b.as_str(), *w))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn successors<'a>(&'a self, from: &'a str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.transitions
            .range((from.to_owned(), String::new())..)
            .take_while(move |((a, _), _)| a == from)
            .map(|((_, b), w)| (b.as_str(), *w))
    }

    /// Observation word and total duration of a trajectory. The trajectory
    /// must start at the initial state and follow existing transitions; the
    /// word includes the initial state's label.
    pub fn output(&self, trajectory: &[&str]) -> Result<(Vec<ApSymbol>, u64), RunError> {
        let Some(&first) = trajectory.first() else {
            return Err(RunError::NotARun("empty trajectory".into()));
        };
        if first != self.initial {
            return Err(RunError::NotARun(format!(
                "starts at {first:?}, initial state is {:?}",
                self.initial
            )));
        }
        let mut word = Vec::with_capacity(trajectory.len());
        let mut total = 0u64;
        for (i, &x) in trajectory.iter().enumerate() {
            let Some(label) = self.states.get(x) else {
                return Err(RunError::NotARun(format!("unknown state {x:?} at step {i}")));
            };
            word.push(label.clone());
            if i + 1 < trajectory.len() {
                let next = trajectory[i + 1];
                match self.weight(x, next) {
                    Some(w) => total += w,
                    None => {
                        return Err(RunError::NotARun(format!(
                            "no transition {x:?} -> {next:?} at step {i}"
                        )))
                    }
                }
            }
        }
        Ok((word, total))
    }
}

impl Validate for TransitionSystem {
    fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.states.is_empty() {
            out.push(Violation::new("states", "state set is empty"));
        }
        if !self.states.contains_key(&self.initial) {
            out.push(Violation::new(
                "initial",
                format!("initial state {:?} is not a state", self.initial),
            ));
        }
        for (name, label) in &self.states {
            if !label.within(&self.ap) {
                out.push(Violation::new(
                    format!("state {name}"),
                    format!("label {label} mentions propositions outside the AP set"),
                ));
            }
        }
        for ((a, b), w) in &self.transitions {
            let loc = format!("transition {a} -> {b}");
            if !self.states.contains_key(a) || !self.states.contains_key(b) {
                out.push(Violation::new(&loc, "endpoint is not a state"));
            }
            if *w == 0 {
                out.push(Violation::new(&loc, "weight must be at least 1"));
            }
        }
        out
    }
}
