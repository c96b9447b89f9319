//! Compiles a rule expression into an edit system.
//!
//! The pipeline is a Thompson construction over edit-pair atoms, elimination
//! of the internal unlabeled glue edges by closure, subset construction and
//! state minimization over the atom alphabet, and finally eager expansion of
//! `.` markers over the power set of the alphabet.
//!
//! Treating each distinct (exec, spec, cost) atom as an opaque letter makes
//! determinization sound despite the weights: the cost of a path is a
//! function of the letters it spells, so machines accepting the same letter
//! language define the same weighted relation. Minimization then produces a
//! canonical machine independent of how the expression was written: the
//! classic "apply one of these rewrites any number of times" expression
//! comes out as one hub state with a spoke per rewrite chain.

use std::collections::{BTreeMap, BTreeSet};

use crate::minimize::moore_partition;
use crate::symbol::{symbols_over, ApSymbol, EditSymbol};
use crate::wfse::EditSystem;

use super::{RuleAtom, RuleError, RuleExpr, RulePattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Upper bound on states in the compiled system.
    pub max_states: usize,
    /// Upper bound on transitions after `.` expansion.
    pub max_transitions: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            max_states: 4096,
            max_transitions: 200_000,
        }
    }
}

/// Thompson-graph edge: either glue (no label) or an atom occurrence.
enum TEdge {
    Glue(usize),
    Atom(usize, usize), // atom table index, target
}

struct Thompson {
    edges: Vec<Vec<TEdge>>,
    atoms: Vec<RuleAtom>,
}

impl Thompson {
    fn node(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    fn build(&mut self, expr: &RuleExpr) -> (usize, usize) {
        match expr {
            RuleExpr::Atom(a) => {
                let s = self.node();
                let t = self.node();
                self.atoms.push(a.clone());
                let ix = self.atoms.len() - 1;
                self.edges[s].push(TEdge::Atom(ix, t));
                (s, t)
            }
            RuleExpr::Concat(items) => {
                let mut cur: Option<(usize, usize)> = None;
                for item in items {
                    let (s, t) = self.build(item);
                    cur = Some(match cur {
                        None => (s, t),
                        Some((s0, t0)) => {
                            self.edges[t0].push(TEdge::Glue(s));
                            (s0, t)
                        }
                    });
                }
                cur.expect("concat of no items")
            }
            RuleExpr::Alt(items) => {
                let s = self.node();
                let t = self.node();
                for item in items {
                    let (is, it) = self.build(item);
                    self.edges[s].push(TEdge::Glue(is));
                    self.edges[it].push(TEdge::Glue(t));
                }
                (s, t)
            }
            RuleExpr::Star(inner) => {
                let s = self.node();
                let t = self.node();
                let (is, it) = self.build(inner);
                self.edges[s].push(TEdge::Glue(is));
                self.edges[s].push(TEdge::Glue(t));
                self.edges[it].push(TEdge::Glue(is));
                self.edges[it].push(TEdge::Glue(t));
                (s, t)
            }
        }
    }

    fn glue_closure(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![from];
        seen[from] = true;
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            out.push(v);
            for e in &self.edges[v] {
                if let TEdge::Glue(w) = e {
                    if !seen[*w] {
                        seen[*w] = true;
                        stack.push(*w);
                    }
                }
            }
        }
        out
    }
}

/// Labeled NFA after glue elimination: per state, atom-labeled moves and an
/// accepting flag.
struct LabeledNfa {
    moves: Vec<Vec<(usize, usize)>>, // (atom index, target)
    accepting: Vec<bool>,
    initial: usize,
    atoms: Vec<RuleAtom>,
}

fn eliminate_glue(t: &Thompson, start: usize, accept: usize) -> LabeledNfa {
    let n = t.edges.len();
    let mut moves = vec![Vec::new(); n];
    let mut accepting = vec![false; n];
    for v in 0..n {
        let mut out = BTreeSet::new();
        for u in t.glue_closure(v) {
            if u == accept {
                accepting[v] = true;
            }
            for e in &t.edges[u] {
                if let TEdge::Atom(a, w) = e {
                    out.insert((*a, *w));
                }
            }
        }
        moves[v] = out.into_iter().collect();
    }
    LabeledNfa {
        moves,
        accepting,
        initial: start,
        atoms: t.atoms.clone(),
    }
}

/// Key that identifies an atom up to behavior: same patterns, same cost.
fn atom_key(a: &RuleAtom) -> (String, String, u64) {
    (a.exec.to_string(), a.spec.to_string(), a.cost.to_bits())
}

/// Deduplicates atom occurrences into letters. Returns the letter table
/// (sorted by key) and the occurrence-to-letter map.
fn letters(atoms: &[RuleAtom]) -> (Vec<RuleAtom>, Vec<usize>) {
    let mut by_key: BTreeMap<(String, String, u64), RuleAtom> = BTreeMap::new();
    for a in atoms {
        by_key.entry(atom_key(a)).or_insert_with(|| a.clone());
    }
    let table: Vec<RuleAtom> = by_key.into_values().collect();
    let index: BTreeMap<(String, String, u64), usize> = table
        .iter()
        .enumerate()
        .map(|(i, a)| (atom_key(a), i))
        .collect();
    let map = atoms.iter().map(|a| index[&atom_key(a)]).collect();
    (table, map)
}

/// Deterministic machine over the letter alphabet. State 0 is initial.
struct LetterDfa {
    moves: Vec<BTreeMap<usize, usize>>, // letter -> target
    accepting: Vec<bool>,
}

/// Subset construction. Every Thompson node reaches the accept node, so all
/// constructed states are live; no trimming pass is needed.
fn determinize(
    nfa: &LabeledNfa,
    letter_of: &[usize],
    max_states: usize,
) -> Result<LetterDfa, RuleError> {
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut subsets: Vec<BTreeSet<usize>> = Vec::new();
    let mut moves: Vec<BTreeMap<usize, usize>> = Vec::new();
    let start: BTreeSet<usize> = BTreeSet::from([nfa.initial]);
    ids.insert(start.clone(), 0);
    subsets.push(start);
    moves.push(BTreeMap::new());
    let mut i = 0;
    while i < subsets.len() {
        let mut targets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &v in &subsets[i] {
            for &(a, w) in &nfa.moves[v] {
                targets.entry(letter_of[a]).or_default().insert(w);
            }
        }
        for (letter, subset) in targets {
            let fresh = subsets.len();
            let id = *ids.entry(subset.clone()).or_insert(fresh);
            if id == fresh {
                if fresh >= max_states {
                    return Err(RuleError::Alphabet(format!(
                        "determinization exceeds the {max_states}-state budget"
                    )));
                }
                subsets.push(subset);
                moves.push(BTreeMap::new());
            }
            moves[i].insert(letter, id);
        }
        i += 1;
    }
    let accepting = subsets
        .iter()
        .map(|s| s.iter().any(|&v| nfa.accepting[v]))
        .collect();
    Ok(LetterDfa { moves, accepting })
}


fn expand_pattern(
    p: &RulePattern,
    alphabet: &[ApSymbol],
    ap: &BTreeSet<String>,
) -> Result<Vec<Option<ApSymbol>>, RuleError> {
    // None encodes epsilon
    match p {
        RulePattern::Epsilon => Ok(vec![None]),
        RulePattern::Any => Ok(alphabet.iter().cloned().map(Some).collect()),
        RulePattern::Symbol(s) => {
            if !s.within(ap) {
                return Err(RuleError::Alphabet(format!(
                    "atom symbol {s} mentions propositions outside the alphabet"
                )));
            }
            Ok(vec![Some(s.clone())])
        }
    }
}

/// Atom expansion over the alphabet: `(./., c)` matches any symbol passed
/// through unchanged, `.` elsewhere ranges independently.
fn expand_atom(
    a: &RuleAtom,
    alphabet: &[ApSymbol],
    ap: &BTreeSet<String>,
) -> Result<Vec<(EditSymbol, EditSymbol)>, RuleError> {
    if a.exec == RulePattern::Any && a.spec == RulePattern::Any {
        return Ok(alphabet
            .iter()
            .map(|s| (EditSymbol::Sym(s.clone()), EditSymbol::Sym(s.clone())))
            .collect());
    }
    let to_edit = |s: Option<ApSymbol>| s.map_or(EditSymbol::Epsilon, EditSymbol::Sym);
    let mut out = Vec::new();
    for e in expand_pattern(&a.exec, alphabet, ap)? {
        for s in expand_pattern(&a.spec, alphabet, ap)? {
            out.push((to_edit(e.clone()), to_edit(s)));
        }
    }
    Ok(out)
}

fn atom_width(a: &RuleAtom, alpha: usize) -> usize {
    match (&a.exec, &a.spec) {
        (RulePattern::Any, RulePattern::Any) => alpha,
        (RulePattern::Any, _) | (_, RulePattern::Any) => alpha,
        _ => 1,
    }
}

pub fn compile_rules<I, S>(
    expr: &RuleExpr,
    ap: I,
    options: CompileOptions,
) -> Result<EditSystem, RuleError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let ap: BTreeSet<String> = ap.into_iter().map(Into::into).collect();
    let alphabet = symbols_over(&ap, options.max_transitions.max(1)).ok_or_else(|| {
        RuleError::Alphabet(format!(
            "power-set alphabet over {} propositions exceeds the budget",
            ap.len()
        ))
    })?;

    let mut thompson = Thompson {
        edges: Vec::new(),
        atoms: Vec::new(),
    };
    let (start, accept) = thompson.build(expr);
    let nfa = eliminate_glue(&thompson, start, accept);
    let (letter_table, letter_of) = letters(&nfa.atoms);
    let dfa = determinize(&nfa, &letter_of, options.max_states)?;
    let class = moore_partition(&dfa.moves, &dfa.accepting);

    // Merge per-class moves; members of a class agree on them by definition.
    let init_class = class[0];
    let mut moves: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut class_accepting: BTreeMap<usize, bool> = BTreeMap::new();
    for v in 0..dfa.moves.len() {
        let c = class[v];
        class_accepting.entry(c).or_insert(dfa.accepting[v]);
        let entry = moves.entry(c).or_default();
        for (&letter, &w) in &dfa.moves[v] {
            entry.insert(letter, class[w]);
        }
    }

    // Reachable classes in breadth-first order define the state names.
    let mut order = vec![init_class];
    let mut seen: BTreeSet<usize> = BTreeSet::from([init_class]);
    let mut i = 0;
    while i < order.len() {
        let c = order[i];
        i += 1;
        for &target in moves[&c].values() {
            if seen.insert(target) {
                order.push(target);
            }
        }
    }
    let name_of: BTreeMap<usize, String> = order
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, format!("z{i}")))
        .collect();

    // Budget check before materializing the expansion.
    let mut width = 0usize;
    for &c in &order {
        for &letter in moves[&c].keys() {
            width += atom_width(&letter_table[letter], alphabet.len());
        }
    }
    if width > options.max_transitions {
        return Err(RuleError::Alphabet(format!(
            "expansion over the {}-symbol alphabet needs {} transitions, budget is {}",
            alphabet.len(),
            width,
            options.max_transitions
        )));
    }

    let mut out = EditSystem::new(ap.iter().cloned(), name_of[&init_class].clone());
    for &c in &order {
        out.add_state(name_of[&c].clone());
        if class_accepting[&c] {
            out.mark_accepting(name_of[&c].clone());
        }
    }
    for &c in &order {
        for (&letter, &target) in moves[&c].iter() {
            let atom = &letter_table[letter];
            for (exec, spec) in expand_atom(atom, &alphabet, &ap)? {
                out.add_transition(
                    name_of[&c].clone(),
                    exec,
                    spec,
                    atom.cost,
                    name_of[&target].clone(),
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;

    fn sym(props: &[&str]) -> ApSymbol {
        ApSymbol::new(props.iter().copied()).unwrap()
    }

    fn w(word: &[&[&str]]) -> Vec<ApSymbol> {
        word.iter().map(|s| sym(s)).collect()
    }

    #[test]
    fn pass_through_star_accepts_identity_at_zero() {
        let e = parse_rules("(./., 0)*").unwrap();
        let sys = compile_rules(&e, ["a"], CompileOptions::default()).unwrap();
        assert_eq!(sys.len(), 1);
        let word = w(&[&["a"], &[], &["a"]]);
        assert_eq!(sys.transduce(&word, &word), Some(0.0));
        assert_eq!(sys.transduce(&word, &w(&[&["a"], &["a"], &["a"]])), None);
    }

    #[test]
    fn rewrite_hub_collapses_to_figure_shape() {
        // One pass-through plus two rewrite chains under an outer star:
        // hub state with a two-step and a one-step spoke.
        let text = "( (./., 0) \
                    | ({Q1}/{P1}, 0) ({Q1}/eps, 4) \
                    | ({S1}/{P2}, 0) ({S1}/{P2}, 0) ({S2}/eps, 7) )*";
        let e = parse_rules(text).unwrap();
        let sys = compile_rules(&e, ["P1", "P2", "Q1", "S1", "S2"], CompileOptions::default())
            .unwrap();
        assert_eq!(sys.len(), 4);
        assert_eq!(sys.accepting().count(), 1);
        assert!(sys.is_accepting(sys.initial()));

        let exec = w(&[&["Q1"], &["Q1"], &["S1"], &["S1"], &["S2"]]);
        let spec = w(&[&["P1"], &["P2"], &["P2"]]);
        assert_eq!(sys.transduce(&exec, &spec), Some(11.0));
    }

    #[test]
    fn seven_step_cycle_counts_seven_states() {
        // A cyclic chain of six rewrites and one deletion, idle steps
        // allowed before, between, and after the chain steps. Minimization
        // folds this into a seven-state ring whose accepting initial state
        // carries the idle self-loop.
        let pass = "(({}/{}, 1))*";
        let steps = [
            "({T5}/{T4}, 3)",
            "({T5}/{T4}, 3)",
            "({T5}/{T4}, 2)",
            "({T3}/eps, 1)",
            "({T3}/eps, 1)",
            "(eps/{T4}, 10)",
            "({T2}/{T1}, 7)",
        ];
        let mut text = String::from("(");
        for s in &steps {
            text.push_str(pass);
            text.push_str(s);
        }
        text.push_str(")*");
        text.push_str(pass);
        let e = parse_rules(&text).unwrap();
        let sys = compile_rules(&e, ["T1", "T2", "T3", "T4", "T5"], CompileOptions::default())
            .unwrap();
        assert_eq!(sys.len(), 7);
        assert_eq!(sys.accepting().count(), 1);
        assert!(sys.is_accepting(sys.initial()));

        // one full pass around the ring, with one idle step at the hub
        let exec = w(&[&[], &["T5"], &["T5"], &["T5"], &["T3"], &["T3"], &["T2"]]);
        let spec = w(&[&[], &["T4"], &["T4"], &["T4"], &["T4"], &["T1"]]);
        assert_eq!(sys.transduce(&exec, &spec), Some(28.0));
    }

    #[test]
    fn any_markers_expand_over_the_alphabet() {
        let e = parse_rules("(eps/., 2)").unwrap();
        let sys = compile_rules(&e, ["a", "b"], CompileOptions::default()).unwrap();
        // four symbols in 2^{a,b}, one deletion edge each
        assert_eq!(sys.transition_count(), 4);
        assert_eq!(sys.transduce(&[], &w(&[&["a", "b"]])), Some(2.0));
    }

    #[test]
    fn transition_budget_is_enforced() {
        let e = parse_rules("(./., 0)*").unwrap();
        let opts = CompileOptions {
            max_states: 10,
            max_transitions: 3,
        };
        assert!(matches!(
            compile_rules(&e, ["a", "b"], opts),
            Err(RuleError::Alphabet(_))
        ));
    }

    #[test]
    fn atom_symbols_must_fit_the_alphabet() {
        let e = parse_rules("({zz}/eps, 1)").unwrap();
        assert!(matches!(
            compile_rules(&e, ["a"], CompileOptions::default()),
            Err(RuleError::Alphabet(_))
        ));
    }
}
