//! Formula-to-automaton pipeline: compile to a guarded machine, close under
//! extension, determinize over the materialized alphabet, trim, minimize,
//! and name states breadth-first.

use std::collections::{BTreeMap, BTreeSet};

use crate::dfa::{DfaError, SpecDfa};
use crate::minimize::moore_partition;
use crate::symbol::{symbols_over, ApSymbol};
use crate::trim::trim_mask;

use super::nfa::{tau_nfa, TauNfa};
use super::{TemporalRelaxation, TwtlError, TwtlFormula};

const MAX_DFA_STATES: usize = 100_000;
const MAX_ALPHABET: usize = 4096;

fn alphabet_for<I, S>(
    f: &TwtlFormula,
    ap: I,
) -> Result<(BTreeSet<String>, Vec<ApSymbol>), TwtlError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let ap: BTreeSet<String> = ap.into_iter().map(Into::into).collect();
    for p in f.props() {
        if !ap.contains(&p) {
            return Err(TwtlError::Alphabet(format!(
                "formula proposition {p} is not in the alphabet"
            )));
        }
    }
    let alpha = symbols_over(&ap, MAX_ALPHABET).ok_or_else(|| {
        TwtlError::Budget(format!(
            "power-set alphabet over {} propositions exceeds {MAX_ALPHABET} symbols",
            ap.len()
        ))
    })?;
    Ok((ap, alpha))
}

/// Deterministic machine over alphabet indices. State 0 is initial.
struct SymbolDfa {
    moves: Vec<BTreeMap<usize, usize>>,
    accepting: Vec<bool>,
}

fn determinize(nfa: &TauNfa, alpha: &[ApSymbol]) -> Result<SymbolDfa, TwtlError> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nfa.n];
    for (i, e) in nfa.edges.iter().enumerate() {
        adj[e.from].push(i);
    }
    let sat: Vec<Vec<bool>> = nfa
        .edges
        .iter()
        .map(|e| alpha.iter().map(|s| e.guard.sat(s)).collect())
        .collect();

    let start: BTreeSet<usize> = BTreeSet::from([nfa.initial]);
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut moves: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new()];
    let mut i = 0;
    while i < subsets.len() {
        for (ix, _) in alpha.iter().enumerate() {
            let mut target = BTreeSet::new();
            for &v in &subsets[i] {
                for &e in &adj[v] {
                    if sat[e][ix] {
                        target.insert(nfa.edges[e].to);
                    }
                }
            }
            if target.is_empty() {
                continue;
            }
            let fresh = subsets.len();
            let id = *ids.entry(target.clone()).or_insert(fresh);
            if id == fresh {
                if fresh >= MAX_DFA_STATES {
                    return Err(TwtlError::Budget(format!(
                        "determinization exceeds {MAX_DFA_STATES} states"
                    )));
                }
                subsets.push(target);
                moves.push(BTreeMap::new());
            }
            moves[i].insert(ix, id);
        }
        i += 1;
    }
    let accepting = subsets
        .iter()
        .map(|s| s.iter().any(|v| nfa.accepting.contains(v)))
        .collect();
    Ok(SymbolDfa { moves, accepting })
}

/// Trims dead states, minimizes, and materializes the automaton with
/// breadth-first state names.
fn to_spec_dfa(dfa: &SymbolDfa, alpha: &[ApSymbol], ap: BTreeSet<String>) -> SpecDfa {
    let n = dfa.moves.len();
    let edges: Vec<(usize, usize)> = dfa
        .moves
        .iter()
        .enumerate()
        .flat_map(|(v, m)| m.values().map(move |&w| (v, w)))
        .collect();
    let mask = trim_mask(n, &edges, 0, &dfa.accepting);
    if !mask[0] {
        // empty language: a single rejecting state
        return SpecDfa::new(ap, "s0");
    }
    let live: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();
    let compact: BTreeMap<usize, usize> = live.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let moves: Vec<BTreeMap<usize, usize>> = live
        .iter()
        .map(|&v| {
            dfa.moves[v]
                .iter()
                .filter(|(_, &w)| mask[w])
                .map(|(&ix, &w)| (ix, compact[&w]))
                .collect()
        })
        .collect();
    let accepting: Vec<bool> = live.iter().map(|&v| dfa.accepting[v]).collect();

    let class = moore_partition(&moves, &accepting);
    let init_class = class[compact[&0]];
    let mut class_moves: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut class_accepting: BTreeMap<usize, bool> = BTreeMap::new();
    for v in 0..moves.len() {
        let c = class[v];
        class_accepting.entry(c).or_insert(accepting[v]);
        let entry = class_moves.entry(c).or_default();
        for (&ix, &w) in &moves[v] {
            entry.insert(ix, class[w]);
        }
    }

    let mut order = vec![init_class];
    let mut seen = BTreeSet::from([init_class]);
    let mut i = 0;
    while i < order.len() {
        let c = order[i];
        i += 1;
        for &t in class_moves[&c].values() {
            if seen.insert(t) {
                order.push(t);
            }
        }
    }
    let name_of: BTreeMap<usize, String> = order
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, format!("s{i}")))
        .collect();

    let mut out = SpecDfa::new(ap, name_of[&init_class].clone());
    for &c in &order {
        out.add_state(name_of[&c].clone());
        if class_accepting[&c] {
            out.mark_accepting(name_of[&c].clone());
        }
    }
    for &c in &order {
        for (&ix, &t) in class_moves[&c].iter() {
            out.add_transition(name_of[&c].clone(), alpha[ix].clone(), name_of[&t].clone());
        }
    }
    out
}

/// Automaton accepting exactly the words some prefix of which satisfies the
/// formula, with every window deadline enforced.
pub fn twtl_to_dfa<I, S>(f: &TwtlFormula, ap: I) -> Result<SpecDfa, TwtlError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let (ap, alpha) = alphabet_for(f, ap)?;
    let mut nfa = tau_nfa(f, false);
    nfa.pad_extension();
    let dfa = determinize(&nfa, &alpha)?;
    Ok(to_spec_dfa(&dfa, &alpha, ap))
}

/// Deadline-free automaton for a formula, remembering enough structure to
/// price each accepted word's deadline extensions.
#[derive(Debug, Clone)]
pub struct AnnotatedDfa {
    dfa: SpecDfa,
    nfa: TauNfa,
    deadlines: Vec<u32>,
}

impl AnnotatedDfa {
    /// The deterministic automaton for the deadline-free formula.
    pub fn dfa(&self) -> &SpecDfa {
        &self.dfa
    }

    /// Original window deadlines, one per operator in preorder.
    pub fn deadlines(&self) -> &[u32] {
        &self.deadlines
    }

    pub fn within_count(&self) -> usize {
        self.deadlines.len()
    }

    pub fn accepts(&self, word: &[ApSymbol]) -> Result<bool, DfaError> {
        self.dfa.accepts(word)
    }

    /// Cheapest deadline-extension vector over all accepting runs on `word`,
    /// compared by total first and lexicographically on ties.
    pub fn ltr_of_run(&self, word: &[ApSymbol]) -> Result<TemporalRelaxation, TwtlError> {
        let m = self.nfa.within_count;
        let mut layer: Vec<Option<(u64, Vec<u32>)>> = vec![None; self.nfa.n];
        layer[self.nfa.initial] = Some((0, vec![0; m]));
        for s in word {
            let mut next: Vec<Option<(u64, Vec<u32>)>> = vec![None; self.nfa.n];
            for e in &self.nfa.edges {
                let Some((total, tau)) = &layer[e.from] else {
                    continue;
                };
                if !e.guard.sat(s) {
                    continue;
                }
                let mut cand_tau = tau.clone();
                let mut cand_total = *total;
                for (&op, &inc) in &e.inc {
                    cand_tau[op] += inc;
                    cand_total += u64::from(inc);
                }
                let slot = &mut next[e.to];
                let better = match slot {
                    None => true,
                    Some((t, v)) => cand_total < *t || (cand_total == *t && cand_tau < *v),
                };
                if better {
                    *slot = Some((cand_total, cand_tau));
                }
            }
            layer = next;
        }
        self.nfa
            .accepting
            .iter()
            .filter_map(|&f| layer[f].clone())
            .min()
            .map(|(_, tau)| TemporalRelaxation { tau })
            .ok_or(TwtlError::NotAccepted)
    }
}

/// Compiles the deadline-free variant of the formula.
pub fn twtl_to_annotated_dfa<I, S>(f: &TwtlFormula, ap: I) -> Result<AnnotatedDfa, TwtlError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let (ap, alpha) = alphabet_for(f, ap)?;
    let mut nfa = tau_nfa(f, true);
    nfa.pad_extension();
    let dfa = determinize(&nfa, &alpha)?;
    let dfa = to_spec_dfa(&dfa, &alpha, ap);
    Ok(AnnotatedDfa {
        dfa,
        nfa,
        deadlines: f.deadlines(),
    })
}
