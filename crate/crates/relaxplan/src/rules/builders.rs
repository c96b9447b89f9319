//! Ready-made edit systems for the classical relaxation problems. Each
//! builder produces the edit relation whose minimum transduction cost equals
//! the corresponding direct cost definition.

use std::collections::{BTreeMap, BTreeSet};

use crate::dfa::SpecDfa;
use crate::symbol::{symbols_over, ApSymbol, EditSymbol};
use crate::wfse::EditSystem;

use super::RuleError;

/// Cap on the materialized power-set alphabet used by the builders.
const ALPHABET_LIMIT: usize = 4096;

fn alphabet<I, S>(ap: I) -> Result<(BTreeSet<String>, Vec<ApSymbol>), RuleError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let ap: BTreeSet<String> = ap.into_iter().map(Into::into).collect();
    let alpha = symbols_over(&ap, ALPHABET_LIMIT).ok_or_else(|| {
        RuleError::Alphabet(format!(
            "power-set alphabet over {} propositions exceeds {ALPHABET_LIMIT} symbols",
            ap.len()
        ))
    })?;
    Ok((ap, alpha))
}

/// Correction: the identity relation. Exactly the specification word, cost 0.
pub fn build_cp<I, S>(ap: I) -> Result<EditSystem, RuleError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let (ap, alpha) = alphabet(ap)?;
    let mut e = EditSystem::new(ap, "z0");
    e.mark_accepting("z0");
    for s in &alpha {
        e.add_transition("z0", s.clone(), s.clone(), 0.0, "z0");
    }
    Ok(e)
}

/// Violation by omission: any subset of specification symbols may be
/// skipped, each at cost `penalty`.
pub fn build_mvp<I, S>(ap: I, penalty: f64) -> Result<EditSystem, RuleError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    if !(penalty.is_finite() && penalty >= 0.0) {
        return Err(RuleError::Alphabet(format!(
            "deletion penalty must be finite and nonnegative, got {penalty}"
        )));
    }
    let (ap, alpha) = alphabet(ap)?;
    let mut e = EditSystem::new(ap, "z0");
    e.mark_accepting("z0");
    for s in &alpha {
        e.add_transition("z0", s.clone(), s.clone(), 0.0, "z0");
        e.add_transition("z0", EditSymbol::Epsilon, s.clone(), penalty, "z0");
    }
    Ok(e)
}

/// Per-pair substitution costs. `set(from, to, cost)` prices executing `to`
/// where the specification asked for `from`; unlisted off-diagonal pairs are
/// not substitutable, and the diagonal is fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionCostMatrix {
    ap: BTreeSet<String>,
    costs: BTreeMap<(ApSymbol, ApSymbol), f64>,
}

impl SubstitutionCostMatrix {
    pub fn new<I, S>(ap: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            ap: ap.into_iter().map(Into::into).collect(),
            costs: BTreeMap::new(),
        }
    }

    pub fn ap(&self) -> &BTreeSet<String> {
        &self.ap
    }

    pub fn set(&mut self, from: ApSymbol, to: ApSymbol, cost: f64) -> Result<(), RuleError> {
        if from == to {
            return Err(RuleError::Alphabet(format!(
                "substituting {from} by itself always costs 0"
            )));
        }
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(RuleError::Alphabet(format!(
                "substitution cost must be finite and nonnegative, got {cost}"
            )));
        }
        if !from.within(&self.ap) || !to.within(&self.ap) {
            return Err(RuleError::Alphabet(format!(
                "pair {from} -> {to} mentions propositions outside the alphabet"
            )));
        }
        self.costs.insert((from, to), cost);
        Ok(())
    }

    /// Cost of executing `to` in place of `from`; identical symbols are free.
    pub fn get(&self, from: &ApSymbol, to: &ApSymbol) -> Option<f64> {
        if from == to {
            return Some(0.0);
        }
        self.costs.get(&(from.clone(), to.clone())).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ApSymbol, &ApSymbol, f64)> {
        self.costs.iter().map(|((f, t), c)| (f, t, *c))
    }
}

/// Revision: symbol-by-symbol substitution under the matrix, equal lengths
/// only.
pub fn build_mrp(matrix: &SubstitutionCostMatrix) -> Result<EditSystem, RuleError> {
    let (ap, alpha) = alphabet(matrix.ap.iter().cloned())?;
    let mut e = EditSystem::new(ap, "z0");
    e.mark_accepting("z0");
    for s in &alpha {
        e.add_transition("z0", s.clone(), s.clone(), 0.0, "z0");
    }
    for (from, to, cost) in matrix.entries() {
        e.add_transition("z0", to.clone(), from.clone(), cost, "z0");
    }
    Ok(e)
}

/// Hard-soft split: the word passes through unchanged, and a flat penalty is
/// charged iff the soft automaton rejects it. Mirrors the soft automaton's
/// structure, with one extra sink that tracks rejection.
pub fn build_hsc(soft: &SpecDfa, penalty: f64) -> Result<EditSystem, RuleError> {
    if !(penalty.is_finite() && penalty >= 0.0) {
        return Err(RuleError::Alphabet(format!(
            "soft-violation penalty must be finite and nonnegative, got {penalty}"
        )));
    }
    let (ap, alpha) = alphabet(soft.ap().iter().cloned())?;
    let mut sink = "viol".to_owned();
    while soft.states().any(|s| s == sink) {
        sink.push('_');
    }
    let mut e = EditSystem::new(ap, soft.initial());
    for state in soft.states() {
        e.mark_accepting(state);
        if !soft.is_accepting(state) {
            e.set_final_weight(state, penalty);
        }
        for s in &alpha {
            let target = soft.step(state, s).unwrap_or(&sink);
            e.add_transition(state, s.clone(), s.clone(), 0.0, target.to_owned());
        }
    }
    e.mark_accepting(sink.clone());
    e.set_final_weight(sink.clone(), penalty);
    for s in &alpha {
        e.add_transition(sink.clone(), s.clone(), s.clone(), 0.0, sink.clone());
    }
    Ok(e)
}

/// Prefix stop: execute some prefix of the specification word; every symbol
/// left on the table costs 1.
pub fn build_ps<I, S>(ap: I) -> Result<EditSystem, RuleError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let (ap, alpha) = alphabet(ap)?;
    let mut e = EditSystem::new(ap, "z0");
    e.mark_accepting("z0");
    e.mark_accepting("z1");
    for s in &alpha {
        e.add_transition("z0", s.clone(), s.clone(), 0.0, "z0");
        e.add_transition("z0", EditSymbol::Epsilon, s.clone(), 1.0, "z1");
        e.add_transition("z1", EditSymbol::Epsilon, s.clone(), 1.0, "z1");
    }
    Ok(e)
}
