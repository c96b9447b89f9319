//! Three-way synchronization of a transition system, an edit system, and a
//! specification automaton. Accepting shortest paths through the result are
//! minimum-relaxation plans; [`ProductAutomaton::project`] maps them back to
//! trajectories, words, and an edit log.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::combine::WeightCombiner;
use crate::dfa::SpecDfa;
use crate::symbol::{ApSymbol, EditSymbol};
use crate::trim::trim_mask;
use crate::ts::TransitionSystem;
use crate::wfse::{EditSystem, EditTransition};

#[derive(Debug, Error, PartialEq)]
pub enum ProductError {
    #[error("alphabet mismatch: {0}")]
    ApMismatch(String),
    #[error("combined weight {weight} on {edge} is negative")]
    NegativeWeight { edge: String, weight: f64 },
    #[error("edge sequence is not a path from the initial state")]
    NotAPath,
}

/// A synchronized state. `ts` is `None` only in the initial state, before the
/// first symbol of the trajectory has been produced.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductState {
    pub ts: Option<String>,
    pub edit: String,
    pub spec: String,
}

impl std::fmt::Display for ProductState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ts = self.ts.as_deref().unwrap_or("\u{25B7}");
        write!(f, "({ts}, {}, {})", self.edit, self.spec)
    }
}

/// One synchronized move. `exec` is the symbol appended to the executed word
/// (`eps` when the transition system stays put) and `spec` the symbol consumed
/// by the specification automaton (`eps` when it stays put).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductEdge {
    pub from: usize,
    pub to: usize,
    pub exec: EditSymbol,
    pub spec: EditSymbol,
    pub ts_weight: u64,
    pub edit_weight: f64,
    /// Combined weight used by shortest-path search.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EditKind {
    /// The executed symbol replaces a different required one.
    Substitution { executed: ApSymbol, required: ApSymbol },
    /// An executed symbol the specification did not ask for.
    Insertion { executed: ApSymbol },
    /// A required symbol dropped from execution.
    Deletion { required: ApSymbol },
}

/// One entry of the edit log: what was rewritten, at which step of the
/// product path, and at what cost.
#[derive(Debug, Clone, PartialEq)]
pub struct EditOp {
    pub kind: EditKind,
    pub weight: f64,
    pub step: usize,
}

/// A product path mapped back onto its three components.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub trajectory: Vec<String>,
    pub exec_word: Vec<ApSymbol>,
    pub spec_word: Vec<ApSymbol>,
    pub edits: Vec<EditOp>,
}

/// The trimmed synchronization graph. State 0 is the initial state; every
/// other state lies on an initial-to-accepting path. When no accepting state
/// is reachable the graph is empty apart from the initial state and
/// [`diagnosis`](Self::diagnosis) explains which component starved.
#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    states: Vec<ProductState>,
    edges: Vec<ProductEdge>,
    outgoing: Vec<Vec<usize>>,
    accepting: Vec<(usize, f64)>,
    diagnosis: Option<String>,
}

impl ProductAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepting.is_empty()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn state(&self, ix: usize) -> &ProductState {
        &self.states[ix]
    }

    pub fn states(&self) -> impl Iterator<Item = &ProductState> {
        self.states.iter()
    }

    pub fn edge(&self, ix: usize) -> &ProductEdge {
        &self.edges[ix]
    }

    pub fn edges(&self) -> &[ProductEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices leaving `state`.
    pub fn outgoing(&self, state: usize) -> &[usize] {
        &self.outgoing[state]
    }

    /// Accepting states with their exit weights (the edit system's final
    /// weight for the state's edit component).
    pub fn accepting(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.accepting.iter().copied()
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting.iter().any(|&(s, _)| s == state)
    }

    /// Why the product came out empty, when it did.
    pub fn diagnosis(&self) -> Option<&str> {
        self.diagnosis.as_deref()
    }

    /// Maps a path, given as a sequence of edge indices starting at the
    /// initial state, back onto the transition system and the two words.
    /// Stay-in-place steps are collapsed out of the trajectory and show up in
    /// the edit log instead.
    pub fn project(&self, path: &[usize]) -> Result<Projection, ProductError> {
        if path.is_empty() || path.iter().any(|&e| e >= self.edges.len()) {
            return Err(ProductError::NotAPath);
        }
        if self.edges[path[0]].from != 0 {
            return Err(ProductError::NotAPath);
        }
        for w in path.windows(2) {
            if self.edges[w[0]].to != self.edges[w[1]].from {
                return Err(ProductError::NotAPath);
            }
        }

        let mut out = Projection {
            trajectory: Vec::new(),
            exec_word: Vec::new(),
            spec_word: Vec::new(),
            edits: Vec::new(),
        };
        for (step, &ix) in path.iter().enumerate() {
            let e = &self.edges[ix];
            match (&e.exec, &e.spec) {
                (EditSymbol::Sym(a), EditSymbol::Sym(b)) => {
                    let x = self.states[e.to].ts.clone().ok_or(ProductError::NotAPath)?;
                    out.trajectory.push(x);
                    out.exec_word.push(a.clone());
                    out.spec_word.push(b.clone());
                    if a != b {
                        out.edits.push(EditOp {
                            kind: EditKind::Substitution {
                                executed: a.clone(),
                                required: b.clone(),
                            },
                            weight: e.edit_weight,
                            step,
                        });
                    }
                }
                (EditSymbol::Sym(a), EditSymbol::Epsilon) => {
                    let x = self.states[e.to].ts.clone().ok_or(ProductError::NotAPath)?;
                    out.trajectory.push(x);
                    out.exec_word.push(a.clone());
                    out.edits.push(EditOp {
                        kind: EditKind::Insertion { executed: a.clone() },
                        weight: e.edit_weight,
                        step,
                    });
                }
                (EditSymbol::Epsilon, EditSymbol::Sym(b)) => {
                    out.spec_word.push(b.clone());
                    out.edits.push(EditOp {
                        kind: EditKind::Deletion { required: b.clone() },
                        weight: e.edit_weight,
                        step,
                    });
                }
                (EditSymbol::Epsilon, EditSymbol::Epsilon) => {
                    return Err(ProductError::NotAPath);
                }
            }
        }
        Ok(out)
    }

    pub fn to_dot(&self) -> String {
        let mut dot = String::from("digraph product {\n  rankdir=LR;\n  node [shape=box];\n");
        let _ = writeln!(dot, "  __start [shape=point];");
        for (ix, q) in self.states.iter().enumerate() {
            let mut attrs = String::new();
            if let Some(&(_, fw)) = self.accepting.iter().find(|&&(s, _)| s == ix) {
                attrs.push_str(", peripheries=2");
                if fw != 0.0 {
                    let _ = write!(attrs, ", xlabel=\"stop={fw}\"");
                }
            }
            let _ = writeln!(dot, "  q{ix} [label=\"{q}\"{attrs}];");
        }
        let _ = writeln!(dot, "  __start -> q0;");
        for e in &self.edges {
            let _ = writeln!(
                dot,
                "  q{} -> q{} [label=\"{}/{} w={}\"];",
                e.from, e.to, e.exec, e.spec, e.weight
            );
        }
        dot.push_str("}\n");
        dot
    }
}

/// Synchronizes the three models. Edges come in three flavors: both sides
/// advance on a matched symbol pair; the transition system advances alone
/// while the spec side waits (an inserted execution symbol); or the machine
/// stays put, with transition weight 0, while the spec side advances (a
/// deleted task). The trajectory's first symbol is produced by a virtual
/// start move of transition weight 1 into the initial state.
///
/// Only states reachable from the start are explored, and the result is
/// trimmed to states that can still reach an accepting state.
pub fn build_product(
    ts: &TransitionSystem,
    wfse: &EditSystem,
    dfa: &SpecDfa,
    combiner: WeightCombiner,
) -> Result<ProductAutomaton, ProductError> {
    if ts.ap() != wfse.ap() || ts.ap() != dfa.ap() {
        return Err(ProductError::ApMismatch(format!(
            "transition system over {:?}, edit system over {:?}, specification over {:?}",
            ts.ap(),
            wfse.ap(),
            dfa.ap()
        )));
    }

    let mut by_source: BTreeMap<&str, Vec<&EditTransition>> = BTreeMap::new();
    for t in wfse.transitions() {
        by_source.entry(t.from.as_str()).or_default().push(t);
    }

    let q0 = ProductState {
        ts: None,
        edit: wfse.initial().to_string(),
        spec: dfa.initial().to_string(),
    };
    let mut ids: BTreeMap<ProductState, usize> = BTreeMap::from([(q0.clone(), 0)]);
    let mut states = vec![q0];
    let mut edges: Vec<ProductEdge> = Vec::new();
    let mut seen_edges: BTreeSet<(usize, usize, String, String, u64)> = BTreeSet::new();

    let mut i = 0;
    while i < states.len() {
        let (x, z, s) = {
            let q = &states[i];
            (q.ts.clone(), q.edit.clone(), q.spec.clone())
        };
        // Moves available to the transition system from here. From the
        // virtual start the only move is entering the initial state at
        // weight 1, producing its label.
        let ts_moves: Vec<(&str, u64)> = match &x {
            None => vec![(ts.initial(), 1)],
            Some(x) => ts.successors(x).collect(),
        };
        for t in by_source.get(z.as_str()).map_or(&[][..], Vec::as_slice) {
            match (&t.exec, &t.spec) {
                (EditSymbol::Sym(a), spec_side) => {
                    let s_next: Option<&str> = match spec_side {
                        EditSymbol::Sym(b) => {
                            let Some(s2) = dfa.step(&s, b) else { continue };
                            Some(s2)
                        }
                        EditSymbol::Epsilon => None,
                    };
                    for &(x2, w_t) in &ts_moves {
                        if ts.label(x2) != Some(a) {
                            continue;
                        }
                        let to = ProductState {
                            ts: Some(x2.to_string()),
                            edit: t.to.clone(),
                            spec: s_next.unwrap_or(&s).to_string(),
                        };
                        push_edge(
                            &mut states,
                            &mut ids,
                            &mut edges,
                            &mut seen_edges,
                            i,
                            to,
                            t,
                            w_t,
                            combiner,
                        )?;
                    }
                }
                (EditSymbol::Epsilon, EditSymbol::Sym(b)) => {
                    let Some(s2) = dfa.step(&s, b) else { continue };
                    let to = ProductState {
                        ts: x.clone(),
                        edit: t.to.clone(),
                        spec: s2.to_string(),
                    };
                    if to == states[i] {
                        // A stay-in-place move back to the same synchronized
                        // state makes no progress on any component; looping
                        // it can never improve a plan.
                        continue;
                    }
                    push_edge(
                        &mut states,
                        &mut ids,
                        &mut edges,
                        &mut seen_edges,
                        i,
                        to,
                        t,
                        0,
                        combiner,
                    )?;
                }
                (EditSymbol::Epsilon, EditSymbol::Epsilon) => {
                    // Rejected by edit-system validation; nothing to do.
                }
            }
        }
        i += 1;
    }

    let accepting_mask: Vec<bool> = states
        .iter()
        .map(|q| q.ts.is_some() && wfse.is_accepting(&q.edit) && dfa.is_accepting(&q.spec))
        .collect();
    let edge_pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.from, e.to)).collect();
    let live = trim_mask(states.len(), &edge_pairs, 0, &accepting_mask);

    if !live[0] {
        let diagnosis = diagnose(&states, wfse, dfa);
        return Ok(ProductAutomaton {
            states: vec![states.swap_remove(0)],
            edges: Vec::new(),
            outgoing: vec![Vec::new()],
            accepting: Vec::new(),
            diagnosis: Some(diagnosis),
        });
    }

    let mut renumber = vec![usize::MAX; states.len()];
    let mut kept = Vec::new();
    for (ix, q) in states.into_iter().enumerate() {
        if live[ix] {
            renumber[ix] = kept.len();
            kept.push(q);
        }
    }
    let mut outgoing = vec![Vec::new(); kept.len()];
    let mut kept_edges = Vec::new();
    for mut e in edges {
        if live[e.from] && live[e.to] {
            e.from = renumber[e.from];
            e.to = renumber[e.to];
            outgoing[e.from].push(kept_edges.len());
            kept_edges.push(e);
        }
    }
    let accepting = accepting_mask
        .iter()
        .enumerate()
        .filter(|&(old, &a)| a && live[old])
        .map(|(old, _)| {
            let ix = renumber[old];
            (ix, wfse.final_weight(&kept[ix].edit))
        })
        .collect();

    Ok(ProductAutomaton {
        states: kept,
        edges: kept_edges,
        outgoing,
        accepting,
        diagnosis: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_edge(
    states: &mut Vec<ProductState>,
    ids: &mut BTreeMap<ProductState, usize>,
    edges: &mut Vec<ProductEdge>,
    seen: &mut BTreeSet<(usize, usize, String, String, u64)>,
    from: usize,
    to: ProductState,
    t: &EditTransition,
    ts_weight: u64,
    combiner: WeightCombiner,
) -> Result<(), ProductError> {
    let weight = combiner.combine(ts_weight as f64, t.weight);
    if weight.is_nan() || weight < 0.0 {
        return Err(ProductError::NegativeWeight {
            edge: format!("{} -[{}/{}]-> {}", states[from], t.exec, t.spec, to),
            weight,
        });
    }
    let fresh = states.len();
    let to_ix = *ids.entry(to.clone()).or_insert(fresh);
    if to_ix == fresh {
        states.push(to);
    }
    let key = (
        from,
        to_ix,
        t.exec.to_string(),
        t.spec.to_string(),
        weight.to_bits(),
    );
    if seen.insert(key) {
        edges.push(ProductEdge {
            from,
            to: to_ix,
            exec: t.exec.clone(),
            spec: t.spec.clone(),
            ts_weight,
            edit_weight: t.weight,
            weight,
        });
    }
    Ok(())
}

fn diagnose(reached: &[ProductState], wfse: &EditSystem, dfa: &SpecDfa) -> String {
    if !reached.iter().any(|q| q.ts.is_some()) {
        return "the edit system cannot consume the initial state's label".into();
    }
    let spec_ok = reached.iter().any(|q| dfa.is_accepting(&q.spec));
    let edit_ok = reached.iter().any(|q| wfse.is_accepting(&q.edit));
    match (spec_ok, edit_ok) {
        (false, _) => "no reachable state has an accepting specification component".into(),
        (true, false) => "no reachable state has an accepting edit-system component".into(),
        (true, true) => {
            "accepting specification and edit-system components are never reached together".into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{build_cp, build_mvp};

    fn sym(props: &[&str]) -> ApSymbol {
        ApSymbol::new(props.iter().copied()).unwrap()
    }

    /// Corridor 0 -> 1 -> 2 where only the far end is labeled.
    fn corridor() -> TransitionSystem {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_state("x1", sym(&[]));
        ts.add_state("x2", sym(&["a"]));
        ts.add_transition("x0", "x1", 2);
        ts.add_transition("x1", "x2", 3);
        ts
    }

    /// Eventually `a`, then anything.
    fn reach_a() -> SpecDfa {
        let mut d = SpecDfa::new(["a"], "s0");
        d.add_transition("s0", sym(&[]), "s0");
        d.add_transition("s0", sym(&["a"]), "s1");
        d.add_transition("s1", sym(&[]), "s1");
        d.add_transition("s1", sym(&["a"]), "s1");
        d.mark_accepting("s1");
        d
    }

    #[test]
    fn pass_through_product_mirrors_the_plain_one() {
        let ts = corridor();
        let dfa = reach_a();
        let e0 = build_cp(ts.ap().clone()).unwrap();
        let p = build_product(&ts, &e0, &dfa, WeightCombiner::Additive).unwrap();

        assert!(!p.is_empty());
        // (virtual, z0, s0) -> (x0, z0, s0) -> (x1, z0, s0) -> (x2, z0, s1)
        assert_eq!(p.len(), 4);
        assert_eq!(p.edge_count(), 3);
        let weights: Vec<f64> = {
            let mut q = 0;
            let mut ws = Vec::new();
            while let Some(&e) = p.outgoing(q).first() {
                ws.push(p.edge(e).weight);
                q = p.edge(e).to;
            }
            ws
        };
        assert_eq!(weights, vec![1.0, 2.0, 3.0]);
        assert_eq!(p.accepting().count(), 1);
    }

    #[test]
    fn skipping_a_task_costs_the_deletion_penalty() {
        // The machine can never produce `a`, but the edit system may delete
        // the requirement at a price.
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_transition("x0", "x0", 1);
        let dfa = reach_a();
        let mvp = build_mvp(ts.ap().clone(), 5.0).unwrap();
        let p = build_product(&ts, &mvp, &dfa, WeightCombiner::Additive).unwrap();

        assert!(!p.is_empty());
        let deletion: Vec<&ProductEdge> = p
            .edges()
            .iter()
            .filter(|e| e.exec.is_epsilon())
            .collect();
        assert!(!deletion.is_empty());
        assert!(deletion.iter().all(|e| {
            e.spec == EditSymbol::Sym(sym(&["a"])) && e.weight == 5.0 && e.ts_weight == 0
        }));
    }

    #[test]
    fn stay_in_place_moves_never_self_loop() {
        // Universal specification: every deletion loops the spec component,
        // so an unsuppressed stay edge would sit on a single product state.
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_transition("x0", "x0", 1);
        let mut dfa = SpecDfa::new(["a"], "s0");
        dfa.add_transition("s0", sym(&[]), "s0");
        dfa.add_transition("s0", sym(&["a"]), "s0");
        dfa.mark_accepting("s0");
        let mvp = build_mvp(ts.ap().clone(), 5.0).unwrap();
        let p = build_product(&ts, &mvp, &dfa, WeightCombiner::Additive).unwrap();

        assert!(!p.is_empty());
        assert!(p
            .edges()
            .iter()
            .all(|e| e.from != e.to || !e.exec.is_epsilon()));
    }

    #[test]
    fn edge_count_is_bounded_by_the_component_product() {
        let ts = corridor();
        let dfa = reach_a();
        let mvp = build_mvp(ts.ap().clone(), 5.0).unwrap();
        let p = build_product(&ts, &mvp, &dfa, WeightCombiner::Additive).unwrap();
        let bound = (ts.transition_count() + 1) * mvp.transition_count() * 4;
        assert!(p.edge_count() <= bound);
    }

    #[test]
    fn infeasible_products_come_back_empty_with_a_diagnosis() {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_transition("x0", "x0", 1);
        let dfa = reach_a();
        let e0 = build_cp(ts.ap().clone()).unwrap();
        let p = build_product(&ts, &e0, &dfa, WeightCombiner::Additive).unwrap();

        assert!(p.is_empty());
        assert_eq!(p.len(), 1);
        assert_eq!(p.edge_count(), 0);
        assert!(p.diagnosis().unwrap().contains("specification"));
    }

    #[test]
    fn projection_separates_motion_from_edits() {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_state("x1", sym(&[]));
        ts.add_transition("x0", "x1", 2);
        ts.add_transition("x1", "x1", 1);
        let dfa = reach_a();
        let mvp = build_mvp(ts.ap().clone(), 5.0).unwrap();
        let p = build_product(&ts, &mvp, &dfa, WeightCombiner::Additive).unwrap();

        // Walk: enter x0, move to x1, then delete the required `a`.
        let mut path = Vec::new();
        let mut q = 0;
        for _ in 0..2 {
            let &e = p
                .outgoing(q)
                .iter()
                .find(|&&e| !p.edge(e).exec.is_epsilon())
                .unwrap();
            path.push(e);
            q = p.edge(e).to;
        }
        let &del = p
            .outgoing(q)
            .iter()
            .find(|&&e| p.edge(e).exec.is_epsilon())
            .unwrap();
        path.push(del);

        let proj = p.project(&path).unwrap();
        assert_eq!(proj.trajectory, vec!["x0", "x1"]);
        assert_eq!(proj.exec_word, vec![sym(&[]), sym(&[])]);
        assert_eq!(proj.spec_word, vec![sym(&[]), sym(&[]), sym(&["a"])]);
        assert_eq!(proj.edits.len(), 1);
        let op = &proj.edits[0];
        assert_eq!(op.step, 2);
        assert_eq!(op.weight, 5.0);
        assert_eq!(
            op.kind,
            EditKind::Deletion { required: sym(&["a"]) }
        );
    }

    #[test]
    fn disconnected_edge_sequences_are_rejected() {
        let ts = corridor();
        let dfa = reach_a();
        let e0 = build_cp(ts.ap().clone()).unwrap();
        let p = build_product(&ts, &e0, &dfa, WeightCombiner::Additive).unwrap();

        assert_eq!(p.project(&[]), Err(ProductError::NotAPath));
        assert_eq!(p.project(&[99]), Err(ProductError::NotAPath));
        let last = p.outgoing(p.edge(p.outgoing(0)[0]).to)[0];
        assert_eq!(p.project(&[last]), Err(ProductError::NotAPath));
    }

    #[test]
    fn alphabets_must_agree() {
        let ts = corridor();
        let dfa = reach_a();
        let e0 = build_cp(["b"]).unwrap();
        assert!(matches!(
            build_product(&ts, &e0, &dfa, WeightCombiner::Additive),
            Err(ProductError::ApMismatch(_))
        ));
    }

    #[test]
    fn custom_combiners_cannot_go_negative() {
        let ts = corridor();
        let dfa = reach_a();
        let e0 = build_cp(ts.ap().clone()).unwrap();
        let bad = WeightCombiner::Custom("difference", |a, b| b - a);
        assert!(matches!(
            build_product(&ts, &e0, &dfa, bad),
            Err(ProductError::NegativeWeight { .. })
        ));
    }
}
