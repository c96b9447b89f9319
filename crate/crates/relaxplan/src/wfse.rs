//! Weighted finite-state edit systems. Transitions are labeled with a pair
//! (exec, spec): the symbol actually executed and the symbol the
//! specification asked for. Either side may be epsilon, never both. The
//! nondeterministic weighted language over such pairs defines a relation
//! between executed words and specification words, with a cost attached to
//! each related pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::symbol::{ApSymbol, EditSymbol};
use crate::trim::trim_mask;
use crate::validate::{Validate, Violation};

#[derive(Debug, Clone, PartialEq)]
pub struct EditTransition {
    pub from: String,
    pub exec: EditSymbol,
    pub spec: EditSymbol,
    pub weight: f64,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditSystem {
    ap: BTreeSet<String>,
    initial: String,
    states: BTreeSet<String>,
    accepting: BTreeSet<String>,
    transitions: Vec<EditTransition>,
    final_weights: BTreeMap<String, f64>,
}

impl EditSystem {
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
            transitions: Vec::new(),
            final_weights: BTreeMap::new(),
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

    pub fn add_transition(
        &mut self,
        from: impl Into<String>,
        exec: impl Into<EditSymbol>,
        spec: impl Into<EditSymbol>,
        weight: f64,
        to: impl Into<String>,
    ) {
        let from = from.into();
        let to = to.into();
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        self.transitions.push(EditTransition {
            from,
            exec: exec.into(),
            spec: spec.into(),
            weight,
            to,
        });
    }

    /// Extra cost charged for stopping in `state`. Meaningful on accepting
    /// states only; defaults to 0.
    pub fn set_final_weight(&mut self, state: impl Into<String>, weight: f64) {
        self.final_weights.insert(state.into(), weight);
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

    pub fn final_weight(&self, state: &str) -> f64 {
        self.final_weights.get(state).copied().unwrap_or(0.0)
    }

    pub fn final_weights(&self) -> impl Iterator<Item = (&str, f64)> {
        self.final_weights.iter().map(|(s, w)| (s.as_str(), *w))
    }

    pub fn transitions(&self) -> &[EditTransition] {
        &self.transitions
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// True when no state has two outgoing transitions with the same
    /// (exec, spec) pair. Determinism is not required anywhere; this is a
    /// convenience query.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        for t in &self.transitions {
            if !seen.insert((t.from.clone(), t.exec.clone(), t.spec.clone())) {
                return false;
            }
        }
        true
    }

    fn state_index(&self) -> BTreeMap<&str, usize> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    /// Minimum accepted cost of transforming the specification word `spec`
    /// into the executed word `exec`, including the stop weight of the
    /// accepting state. `None` when the pair is not in the relation.
    ///
    /// Dynamic program over (exec prefix, spec prefix, state); every
    /// transition consumes at least one symbol, so the layers ordered by
    /// total consumed length form a DAG.
    pub fn transduce(&self, exec: &[ApSymbol], spec: &[ApSymbol]) -> Option<f64> {
        let index = self.state_index();
        let nz = self.states.len();
        let (n, m) = (exec.len(), spec.len());
        let idx = |i: usize, j: usize, z: usize| (i * (m + 1) + j) * nz + z;
        let mut dist = vec![f64::INFINITY; (n + 1) * (m + 1) * nz];
        dist[idx(0, 0, index[self.initial.as_str()])] = 0.0;

        let trans: Vec<(usize, usize, &EditTransition)> = self
            .transitions
            .iter()
            .map(|t| (index[t.from.as_str()], index[t.to.as_str()], t))
            .collect();

        for layer in 0..=(n + m) {
            let lo = layer.saturating_sub(m);
            for i in lo..=layer.min(n) {
                let j = layer - i;
                for &(zf, zt, t) in &trans {
                    let cur = dist[idx(i, j, zf)];
                    if !cur.is_finite() {
                        continue;
                    }
                    let di = match &t.exec {
                        EditSymbol::Epsilon => 0,
                        EditSymbol::Sym(s) => {
                            if i < n && exec[i] == *s {
                                1
                            } else {
                                continue;
                            }
                        }
                    };
                    let dj = match &t.spec {
                        EditSymbol::Epsilon => 0,
                        EditSymbol::Sym(s) => {
                            if j < m && spec[j] == *s {
                                1
                            } else {
                                continue;
                            }
                        }
                    };
                    let slot = idx(i + di, j + dj, zt);
                    let cand = cur + t.weight;
                    if cand < dist[slot] {
                        dist[slot] = cand;
                    }
                }
            }
        }

        let mut best = f64::INFINITY;
        for z in &self.accepting {
            let d = dist[idx(n, m, index[z.as_str()])] + self.final_weight(z);
            if d < best {
                best = d;
            }
        }
        best.is_finite().then_some(best)
    }

    /// Restricts to states on some initial-to-accepting path. `None` when
    /// the trimmed system is empty.
    pub fn trim(&self) -> Option<EditSystem> {
        let index = self.state_index();
        let edges: Vec<(usize, usize)> = self
            .transitions
            .iter()
            .map(|t| (index[t.from.as_str()], index[t.to.as_str()]))
            .collect();
        let accepting: Vec<bool> = self
            .states
            .iter()
            .map(|s| self.accepting.contains(s))
            .collect();
        let mask = trim_mask(self.states.len(), &edges, index[self.initial.as_str()], &accepting);
        if !mask[index[self.initial.as_str()]] {
            return None;
        }
        let keep = |n: &str| mask[index[n]];
        Some(EditSystem {
            ap: self.ap.clone(),
            initial: self.initial.clone(),
            states: self.states.iter().filter(|s| keep(s)).cloned().collect(),
            accepting: self.accepting.iter().filter(|s| keep(s)).cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| keep(&t.from) && keep(&t.to))
                .cloned()
                .collect(),
            final_weights: self
                .final_weights
                .iter()
                .filter(|(s, _)| keep(s))
                .map(|(s, w)| (s.clone(), *w))
                .collect(),
        })
    }

    /// Looks for a cycle consisting solely of zero-weight transitions with
    /// epsilon on the exec side. Such a cycle makes "insert specification
    /// symbols forever at no cost" expressible, which downstream consumers
    /// reject.
    fn zero_insert_cycle(&self) -> Option<String> {
        let index = self.state_index();
        let mut adj = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            if t.exec.is_epsilon() && t.weight == 0.0 {
                adj[index[t.from.as_str()]].push(index[t.to.as_str()]);
            }
        }
        // colors: 0 unvisited, 1 on stack, 2 done
        let mut color = vec![0u8; adj.len()];
        fn dfs(v: usize, adj: &[Vec<usize>], color: &mut [u8]) -> bool {
            color[v] = 1;
            for &w in &adj[v] {
                if color[w] == 1 || (color[w] == 0 && dfs(w, adj, color)) {
                    return true;
                }
            }
            color[v] = 2;
            false
        }
        let names: Vec<&String> = self.states.iter().collect();
        for v in 0..adj.len() {
            if color[v] == 0 && dfs(v, &adj, &mut color) {
                return Some(names[v].clone());
            }
        }
        None
    }

    pub fn to_dot(&self) -> String {
        let mut dot = String::from("digraph wfse {\n  rankdir=LR;\n  node [shape=circle];\n");
        let _ = writeln!(dot, "  __start [shape=point];");
        for s in &self.states {
            let mut attrs = String::new();
            if self.accepting.contains(s) {
                attrs.push_str(", peripheries=2");
            }
            let fw = self.final_weight(s);
            if fw != 0.0 {
                let _ = write!(attrs, ", xlabel=\"stop={fw}\"");
            }
            let _ = writeln!(dot, "  {s:?} [label={s:?}{attrs}];");
        }
        let _ = writeln!(dot, "  __start -> {:?};", self.initial);
        for t in &self.transitions {
            let _ = writeln!(
                dot,
                "  {:?} -> {:?} [label=\"{}/{} w={}\"];",
                t.from, t.to, t.exec, t.spec, t.weight
            );
        }
        dot.push_str("}\n");
        dot
    }
}

impl Validate for EditSystem {
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
        for (k, t) in self.transitions.iter().enumerate() {
            let loc = format!("transition #{k} {} -{}/{}-> {}", t.from, t.exec, t.spec, t.to);
            if !self.states.contains(&t.from) || !self.states.contains(&t.to) {
                out.push(Violation::new(&loc, "endpoint is not a state"));
            }
            if t.exec.is_epsilon() && t.spec.is_epsilon() {
                out.push(Violation::new(&loc, "epsilon on both sides is not a legal edit"));
            }
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                out.push(Violation::new(&loc, "weight must be finite and nonnegative"));
            }
            for side in [&t.exec, &t.spec] {
                if let EditSymbol::Sym(s) = side {
                    if !s.within(&self.ap) {
                        out.push(Violation::new(
                            &loc,
                            "symbol mentions propositions outside the AP set",
                        ));
                        break;
                    }
                }
            }
        }
        for (s, w) in &self.final_weights {
            let loc = format!("final weight of {s}");
            if !self.accepting.contains(s) {
                out.push(Violation::new(&loc, "final weight on a non-accepting state"));
            }
            if !(w.is_finite() && *w >= 0.0) {
                out.push(Violation::new(&loc, "weight must be finite and nonnegative"));
            }
        }
        if let Some(state) = self.zero_insert_cycle() {
            out.push(Violation::new(
                format!("state {state}"),
                "zero-weight insertion cycle (exec-side epsilon loop at no cost)",
            ));
        }
        out
    }
}
