//! Brute-force reference implementations. Everything here re-derives results
//! by direct enumeration against the definitions, sharing no search code with
//! the planners, so tests can certify small instances independently.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::combine::WeightCombiner;
use crate::dfa::SpecDfa;
use crate::symbol::{ApSymbol, EditSymbol};
use crate::ts::TransitionSystem;
use crate::twtl::TwtlFormula;
use crate::wfse::{EditSystem, EditTransition};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{0}")]
    BudgetExceeded(String),
}

/// Enumeration bounds. Candidate pairs are capped at ten million regardless
/// of the field values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    /// Longest trajectory, counted in states.
    pub max_trajectory_len: usize,
    /// Longest specification word, counted in symbols.
    pub max_spec_len: usize,
    /// Most (trajectory, word) pairs scored before giving up.
    pub max_candidates: u64,
}

pub const CANDIDATE_CAP: u64 = 10_000_000;

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_trajectory_len: 8,
            max_spec_len: 8,
            max_candidates: 1_000_000,
        }
    }
}

impl OracleBudget {
    fn validate(&self) -> Result<(), OracleError> {
        if self.max_trajectory_len == 0 || self.max_spec_len == 0 || self.max_candidates == 0 {
            return Err(OracleError::BudgetExceeded(
                "enumeration bounds must be positive".into(),
            ));
        }
        if self.max_candidates > CANDIDATE_CAP {
            return Err(OracleError::BudgetExceeded(format!(
                "candidate bound {} exceeds the cap of {CANDIDATE_CAP}",
                self.max_candidates
            )));
        }
        Ok(())
    }
}

/// The certified optimum of a small instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteWitness {
    pub cost: f64,
    pub trajectory: Vec<String>,
    pub spec_word: Vec<ApSymbol>,
}

/// Scores one (trajectory, specification word) pair: the cheapest way to
/// relate the executed word to the spec word, where every executed symbol
/// consumes its machine move's weight (the first consumes the start move of
/// weight 1) and stay-in-place edits consume machine weight 0.
fn align_cost(
    exec: &[&ApSymbol],
    move_weights: &[u64],
    spec: &[ApSymbol],
    by_source: &BTreeMap<&str, Vec<&EditTransition>>,
    state_ix: &BTreeMap<&str, usize>,
    wfse: &EditSystem,
    combiner: WeightCombiner,
) -> Option<f64> {
    let n = exec.len();
    let m = spec.len();
    let z_count = state_ix.len();
    let idx = |i: usize, j: usize, z: usize| (i * (m + 1) + j) * z_count + z;
    let mut dp = vec![f64::INFINITY; (n + 1) * (m + 1) * z_count];
    dp[idx(0, 0, state_ix[wfse.initial()])] = 0.0;

    for i in 0..=n {
        for j in 0..=m {
            for (z_name, &z) in state_ix {
                let here = dp[idx(i, j, z)];
                if !here.is_finite() {
                    continue;
                }
                for t in by_source.get(z_name).map_or(&[][..], Vec::as_slice) {
                    let to = state_ix[t.to.as_str()];
                    match (&t.exec, &t.spec) {
                        (EditSymbol::Sym(a), EditSymbol::Sym(b)) => {
                            if i < n && j < m && exec[i] == a && &spec[j] == b {
                                let c = here + combiner.combine(move_weights[i] as f64, t.weight);
                                let slot = &mut dp[idx(i + 1, j + 1, to)];
                                *slot = slot.min(c);
                            }
                        }
                        (EditSymbol::Sym(a), EditSymbol::Epsilon) => {
                            if i < n && exec[i] == a {
                                let c = here + combiner.combine(move_weights[i] as f64, t.weight);
                                let slot = &mut dp[idx(i + 1, j, to)];
                                *slot = slot.min(c);
                            }
                        }
                        (EditSymbol::Epsilon, EditSymbol::Sym(b)) => {
                            if j < m && &spec[j] == b {
                                let c = here + combiner.combine(0.0, t.weight);
                                let slot = &mut dp[idx(i, j + 1, to)];
                                *slot = slot.min(c);
                            }
                        }
                        (EditSymbol::Epsilon, EditSymbol::Epsilon) => {}
                    }
                }
            }
        }
    }

    let mut best = f64::INFINITY;
    for (z_name, &z) in state_ix {
        if wfse.is_accepting(z_name) {
            let total = dp[idx(n, m, z)] + wfse.final_weight(z_name);
            best = best.min(total);
        }
    }
    best.is_finite().then_some(best)
}

/// Every specification word the automaton accepts, up to the length bound.
fn accepted_words(
    dfa: &SpecDfa,
    max_len: usize,
    cap: u64,
) -> Result<Vec<Vec<ApSymbol>>, OracleError> {
    let alphabet: Vec<ApSymbol> =
        crate::symbol::symbols_over(dfa.ap(), 4096).ok_or_else(|| {
            OracleError::BudgetExceeded("alphabet too large to enumerate".into())
        })?;
    let mut words = Vec::new();
    let mut stack: Vec<ApSymbol> = Vec::new();
    fn walk(
        dfa: &SpecDfa,
        state: &str,
        alphabet: &[ApSymbol],
        max_len: usize,
        cap: u64,
        stack: &mut Vec<ApSymbol>,
        words: &mut Vec<Vec<ApSymbol>>,
    ) -> Result<(), OracleError> {
        if dfa.is_accepting(state) {
            if words.len() as u64 >= cap {
                return Err(OracleError::BudgetExceeded(format!(
                    "more than {cap} accepted specification words"
                )));
            }
            words.push(stack.clone());
        }
        if stack.len() == max_len {
            return Ok(());
        }
        for s in alphabet {
            if let Some(next) = dfa.step(state, s) {
                let next = next.to_string();
                stack.push(s.clone());
                walk(dfa, &next, alphabet, max_len, cap, stack, words)?;
                stack.pop();
            }
        }
        Ok(())
    }
    walk(
        dfa,
        dfa.initial(),
        &alphabet,
        max_len,
        cap,
        &mut stack,
        &mut words,
    )?;
    Ok(words)
}

/// Depth-first trajectory enumeration paired against a fixed word list.
struct BruteSearch<'a> {
    ts: &'a TransitionSystem,
    words: &'a [Vec<ApSymbol>],
    by_source: BTreeMap<&'a str, Vec<&'a EditTransition>>,
    state_ix: BTreeMap<&'a str, usize>,
    wfse: &'a EditSystem,
    combiner: WeightCombiner,
    budget: OracleBudget,
    stack: Vec<String>,
    weights: Vec<u64>,
    candidates: u64,
    best: Option<BruteWitness>,
}

impl BruteSearch<'_> {
    fn visit(&mut self) -> Result<(), OracleError> {
        let exec: Vec<&ApSymbol> = self
            .stack
            .iter()
            .map(|x| self.ts.label(x).expect("trajectory states exist"))
            .collect();
        for word in self.words {
            self.candidates += 1;
            if self.candidates > self.budget.max_candidates {
                return Err(OracleError::BudgetExceeded(format!(
                    "more than {} candidate pairs",
                    self.budget.max_candidates
                )));
            }
            if let Some(cost) = align_cost(
                &exec,
                &self.weights,
                word,
                &self.by_source,
                &self.state_ix,
                self.wfse,
                self.combiner,
            ) {
                if self.best.as_ref().is_none_or(|b| cost < b.cost) {
                    self.best = Some(BruteWitness {
                        cost,
                        trajectory: self.stack.clone(),
                        spec_word: word.clone(),
                    });
                }
            }
        }
        if self.stack.len() < self.budget.max_trajectory_len {
            let here = self.stack.last().expect("stack never empty").clone();
            let moves: Vec<(String, u64)> = self
                .ts
                .successors(&here)
                .map(|(next, w)| (next.to_string(), w))
                .collect();
            for (next, w) in moves {
                self.stack.push(next);
                self.weights.push(w);
                self.visit()?;
                self.stack.pop();
                self.weights.pop();
            }
        }
        Ok(())
    }
}

/// Scores a single (trajectory, specification word) pair by the same rules
/// as [`brute_force_plan`], without any enumeration. `None` when the edit
/// system cannot relate the two words, or the trajectory is not a path of
/// the machine from its initial state.
pub fn score_pair(
    ts: &TransitionSystem,
    wfse: &EditSystem,
    combiner: WeightCombiner,
    trajectory: &[String],
    spec_word: &[ApSymbol],
) -> Option<f64> {
    let first = trajectory.first()?;
    if first != ts.initial() {
        return None;
    }
    let mut weights = vec![1u64];
    for pair in trajectory.windows(2) {
        let w = ts
            .successors(&pair[0])
            .find_map(|(next, w)| (next == pair[1]).then_some(w))?;
        weights.push(w);
    }
    let exec: Vec<&ApSymbol> = trajectory.iter().map(|x| ts.label(x)).collect::<Option<_>>()?;

    let state_ix: BTreeMap<&str, usize> = wfse
        .states()
        .enumerate()
        .map(|(ix, s)| (s, ix))
        .collect();
    let mut by_source: BTreeMap<&str, Vec<&EditTransition>> = BTreeMap::new();
    for t in wfse.transitions() {
        by_source.entry(t.from.as_str()).or_default().push(t);
    }
    align_cost(
        &exec, &weights, spec_word, &by_source, &state_ix, wfse, combiner,
    )
}

/// Direct evaluation of the planning problem: enumerate every trajectory and
/// every accepted specification word within the budget, score each pair with
/// [`align_cost`], and keep the global minimum. Returns `None` when no pair
/// is related.
pub fn brute_force_plan(
    ts: &TransitionSystem,
    dfa: &SpecDfa,
    wfse: &EditSystem,
    combiner: WeightCombiner,
    budget: OracleBudget,
) -> Result<Option<BruteWitness>, OracleError> {
    budget.validate()?;
    let words = accepted_words(dfa, budget.max_spec_len, budget.max_candidates)?;

    let state_ix: BTreeMap<&str, usize> = wfse
        .states()
        .enumerate()
        .map(|(ix, s)| (s, ix))
        .collect();
    let mut by_source: BTreeMap<&str, Vec<&EditTransition>> = BTreeMap::new();
    for t in wfse.transitions() {
        by_source.entry(t.from.as_str()).or_default().push(t);
    }

    let mut search = BruteSearch {
        ts,
        words: &words,
        by_source,
        state_ix,
        wfse,
        combiner,
        budget,
        // Depth-first over trajectories; each prefix is itself a trajectory.
        stack: vec![ts.initial().to_string()],
        weights: vec![1],
        candidates: 0,
        best: None,
    };
    search.visit()?;
    Ok(search.best)
}

/// Completion times of the formula on `word` when evaluation starts at `t`:
/// every index `u` such that `word[t..=u]` realizes the formula.
pub fn completion_times(f: &TwtlFormula, word: &[ApSymbol], t: usize) -> BTreeSet<usize> {
    match f {
        TwtlFormula::Hold {
            duration,
            prop,
            negated,
        } => {
            let end = t + *duration as usize;
            let ok = end < word.len()
                && word[t..=end]
                    .iter()
                    .all(|s| s.contains(prop) != *negated);
            if ok {
                BTreeSet::from([end])
            } else {
                BTreeSet::new()
            }
        }
        TwtlFormula::And(a, b) => {
            let ca = completion_times(a, word, t);
            let cb = completion_times(b, word, t);
            let mut out = BTreeSet::new();
            for &ua in &ca {
                for &ub in &cb {
                    out.insert(ua.max(ub));
                }
            }
            out
        }
        TwtlFormula::Or(a, b) => {
            let mut out = completion_times(a, word, t);
            out.extend(completion_times(b, word, t));
            out
        }
        TwtlFormula::Concat(a, b) => {
            let mut out = BTreeSet::new();
            for &ua in &completion_times(a, word, t) {
                out.extend(completion_times(b, word, ua + 1));
            }
            out
        }
        TwtlFormula::Within { child, lo, hi } => {
            let mut out = BTreeSet::new();
            for start in t + *lo as usize..=t + *hi as usize {
                for &u in &completion_times(child, word, start) {
                    if u <= t + *hi as usize {
                        out.insert(u);
                    }
                }
            }
            out
        }
    }
}

/// Truth of the formula on the word, by structural recursion over completion
/// times. A satisfied prefix is enough, mirroring the compiled automata.
pub fn semantic_twtl_check(f: &TwtlFormula, word: &[ApSymbol]) -> bool {
    !completion_times(f, word, 0).is_empty()
}

/// The formula with every window deadline pushed out by the matching entry
/// of `tau`, in the same operator order used for reported relaxations.
pub fn relax_formula(f: &TwtlFormula, tau: &[u32]) -> TwtlFormula {
    fn walk(f: &TwtlFormula, tau: &[u32], next: &mut usize) -> TwtlFormula {
        match f {
            TwtlFormula::Hold { .. } => f.clone(),
            TwtlFormula::And(a, b) => TwtlFormula::And(
                Box::new(walk(a, tau, next)),
                Box::new(walk(b, tau, next)),
            ),
            TwtlFormula::Or(a, b) => TwtlFormula::Or(
                Box::new(walk(a, tau, next)),
                Box::new(walk(b, tau, next)),
            ),
            TwtlFormula::Concat(a, b) => TwtlFormula::Concat(
                Box::new(walk(a, tau, next)),
                Box::new(walk(b, tau, next)),
            ),
            TwtlFormula::Within { child, lo, hi } => {
                let ix = *next;
                *next += 1;
                TwtlFormula::Within {
                    child: Box::new(walk(child, tau, next)),
                    lo: *lo,
                    hi: hi + tau.get(ix).copied().unwrap_or(0),
                }
            }
        }
    }
    let mut next = 0;
    walk(f, tau, &mut next)
}

/// Smallest total deadline extension under which the word satisfies the
/// formula, with the vector itself minimized lexicographically at that
/// total. Exhausts extension vectors in order of increasing sum.
pub fn min_ltr(
    f: &TwtlFormula,
    word: &[ApSymbol],
    max_candidates: u64,
) -> Result<Option<(u64, Vec<u32>)>, OracleError> {
    let m = f.within_count();
    if m == 0 {
        return Ok(semantic_twtl_check(f, word).then_some((0, Vec::new())));
    }
    let cap = word.len() as u32;
    let mut search = TauSearch {
        f,
        word,
        cap,
        tried: 0,
        max_candidates,
    };
    for total in 0..=u64::from(cap) * m as u64 {
        let mut tau = vec![0u32; m];
        if let Some(found) = search.spread(total, 0, &mut tau)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Lexicographic enumeration of extension vectors at a fixed total.
struct TauSearch<'a> {
    f: &'a TwtlFormula,
    word: &'a [ApSymbol],
    cap: u32,
    tried: u64,
    max_candidates: u64,
}

impl TauSearch<'_> {
    /// Distributes `remaining` across `tau[at..]` in lexicographic order and
    /// checks each completed vector.
    fn spread(
        &mut self,
        remaining: u64,
        at: usize,
        tau: &mut Vec<u32>,
    ) -> Result<Option<(u64, Vec<u32>)>, OracleError> {
        if at == tau.len() - 1 {
            if remaining > u64::from(self.cap) {
                return Ok(None);
            }
            tau[at] = remaining as u32;
            self.tried += 1;
            if self.tried > self.max_candidates {
                return Err(OracleError::BudgetExceeded(format!(
                    "more than {} extension vectors",
                    self.max_candidates
                )));
            }
            let total: u64 = tau.iter().map(|&x| u64::from(x)).sum();
            if semantic_twtl_check(&relax_formula(self.f, tau), self.word) {
                return Ok(Some((total, tau.clone())));
            }
            return Ok(None);
        }
        for v in 0..=self.cap.min(remaining.min(u64::from(u32::MAX)) as u32) {
            tau[at] = v;
            if let Some(found) = self.spread(remaining - u64::from(v), at + 1, tau)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::build_cp;
    use crate::twtl::parse_twtl;

    fn sym(props: &[&str]) -> ApSymbol {
        ApSymbol::new(props.iter().copied()).unwrap()
    }

    fn word(prop: &str, len: usize, hits: &[usize]) -> Vec<ApSymbol> {
        (0..len)
            .map(|i| if hits.contains(&i) { sym(&[prop]) } else { sym(&[]) })
            .collect()
    }

    fn reach_a(ap: &[&str]) -> SpecDfa {
        let mut d = SpecDfa::new(ap.iter().copied(), "s0");
        for s in crate::symbol::symbols_over(d.ap(), 64).unwrap() {
            let to = if s.contains("a") { "s1" } else { "s0" };
            d.add_transition("s0", s.clone(), to);
            d.add_transition("s1", s, "s1");
        }
        d.mark_accepting("s1");
        d
    }

    #[test]
    fn pass_through_oracle_is_the_shortest_path() {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_state("x1", sym(&[]));
        ts.add_state("x2", sym(&["a"]));
        ts.add_transition("x0", "x1", 2);
        ts.add_transition("x1", "x2", 3);
        let dfa = reach_a(&["a"]);
        let e0 = build_cp(["a"]).unwrap();
        let w = brute_force_plan(&ts, &dfa, &e0, WeightCombiner::Additive, Default::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.cost, 6.0);
        assert_eq!(w.trajectory, vec!["x0", "x1", "x2"]);
        assert_eq!(
            score_pair(&ts, &e0, WeightCombiner::Additive, &w.trajectory, &w.spec_word),
            Some(6.0)
        );
        let broken = vec!["x0".to_string(), "x2".to_string()];
        assert_eq!(
            score_pair(&ts, &e0, WeightCombiner::Additive, &broken, &w.spec_word),
            None
        );
    }

    #[test]
    fn travel_plus_substitution_prices_the_detour() {
        let mut ts = TransitionSystem::new(["a", "b"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_state("x1", sym(&[]));
        ts.add_state("x2", sym(&["b"]));
        ts.add_transition("x0", "x1", 2);
        ts.add_transition("x1", "x2", 3);
        let dfa = reach_a(&["a", "b"]);
        let mut e = EditSystem::new(["a", "b"], "z0");
        e.add_state("z0");
        e.mark_accepting("z0");
        for s in crate::symbol::symbols_over(e.ap(), 64).unwrap() {
            e.add_transition("z0", s.clone(), s, 0.0, "z0");
        }
        e.add_transition("z0", sym(&["b"]), sym(&["a"]), 5.0, "z0");

        let w = brute_force_plan(&ts, &dfa, &e, WeightCombiner::Additive, Default::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.cost, 11.0);
    }

    #[test]
    fn unrelated_instances_have_no_witness() {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_transition("x0", "x0", 1);
        let dfa = reach_a(&["a"]);
        let e0 = build_cp(["a"]).unwrap();
        let w = brute_force_plan(&ts, &dfa, &e0, WeightCombiner::Additive, Default::default())
            .unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn tiny_budgets_are_rejected_loudly() {
        let mut ts = TransitionSystem::new(["a"], "x0");
        ts.add_state("x0", sym(&["a"]));
        ts.add_transition("x0", "x0", 1);
        let dfa = reach_a(&["a"]);
        let e0 = build_cp(["a"]).unwrap();
        let tight = OracleBudget {
            max_trajectory_len: 8,
            max_spec_len: 8,
            max_candidates: 3,
        };
        assert!(matches!(
            brute_force_plan(&ts, &dfa, &e0, WeightCombiner::Additive, tight),
            Err(OracleError::BudgetExceeded(_))
        ));
    }

    #[test]
    fn renaming_states_does_not_move_the_optimum() {
        let mut a = TransitionSystem::new(["a"], "x0");
        a.add_state("x0", sym(&[]));
        a.add_state("x1", sym(&["a"]));
        a.add_transition("x0", "x1", 4);
        let mut b = TransitionSystem::new(["a"], "start");
        b.add_state("start", sym(&[]));
        b.add_state("finish", sym(&["a"]));
        b.add_transition("start", "finish", 4);
        let dfa = reach_a(&["a"]);
        let e0 = build_cp(["a"]).unwrap();
        let ca = brute_force_plan(&a, &dfa, &e0, WeightCombiner::Additive, Default::default())
            .unwrap()
            .unwrap()
            .cost;
        let cb = brute_force_plan(&b, &dfa, &e0, WeightCombiner::Additive, Default::default())
            .unwrap()
            .unwrap()
            .cost;
        assert_eq!(ca, cb);
    }

    #[test]
    fn held_propositions_complete_on_time() {
        let f = parse_twtl("H^1 a").unwrap();
        assert!(semantic_twtl_check(&f, &[sym(&["a"]), sym(&["a"])]));
        assert!(!semantic_twtl_check(&f, &[sym(&["a"])]));
        assert!(!semantic_twtl_check(&f, &[sym(&["a"]), sym(&[])]));
    }

    #[test]
    fn windows_bound_the_completion_not_the_start() {
        let f = parse_twtl("[H^2 T2]^[0,6]").unwrap();
        assert!(semantic_twtl_check(&f, &word("T2", 8, &[4, 5, 6])));
        assert!(!semantic_twtl_check(&f, &word("T2", 10, &[7, 8, 9])));
        let relaxed = relax_formula(&f, &[3]);
        assert!(semantic_twtl_check(&relaxed, &word("T2", 10, &[7, 8, 9])));
    }

    #[test]
    fn safety_conjunctions_fail_on_violations() {
        let f = parse_twtl("H^2 !O && [H^0 a]^[0,4]").unwrap();
        let mut w = vec![sym(&[]); 5];
        w[3] = sym(&["a"]);
        assert!(semantic_twtl_check(&f, &w));
        w[1] = sym(&["O"]);
        assert!(!semantic_twtl_check(&f, &w));
    }

    #[test]
    fn minimal_extensions_match_the_pipeline() {
        let f = parse_twtl("[H^0 a]^[0,1] . [H^0 b]^[0,1]").unwrap();
        let mut w = vec![sym(&[]); 6];
        w[2] = sym(&["a"]);
        w[5] = sym(&["b"]);
        let (ltr, tau) = min_ltr(&f, &w, 100_000).unwrap().unwrap();
        assert_eq!((ltr, tau), (2, vec![1, 1]));

        let unsat = vec![sym(&[]); 3];
        assert_eq!(min_ltr(&f, &unsat, 100_000).unwrap(), None);
    }
}
