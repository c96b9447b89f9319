//! Shortest-path planning over the synchronized product: a single-objective
//! planner, a deadline-relaxation planner, a blended two-objective planner,
//! and the full trade-off front computed by parametric search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::combine::WeightCombiner;
use crate::dfa::SpecDfa;
use crate::product::{build_product, EditOp, ProductAutomaton, ProductError, ProductState};
use crate::rules::{build_cp, RuleError};
use crate::symbol::ApSymbol;
use crate::ts::TransitionSystem;
use crate::twtl::{
    extend_ts, twtl_to_annotated_dfa, AnnotatedDfa, ExtendedTs, TemporalRelaxation, TwtlError,
    TwtlFormula,
};
use crate::wfse::EditSystem;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Formula(#[from] TwtlError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error("{0}")]
    Domain(String),
}

/// Aggregated path costs. `task` sums the combined edge weights plus the
/// accepting state's exit weight, `temporal` counts product transitions, and
/// `combined` is the objective the planner actually minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub task: f64,
    pub temporal: u64,
    pub combined: f64,
}

/// A planning outcome. Infeasibility is a value: `feasible` is false, the
/// path fields are empty, and `diagnosis` says which model starved.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub feasible: bool,
    pub product_path: Vec<ProductState>,
    pub trajectory: Vec<String>,
    pub exec_word: Vec<ApSymbol>,
    pub spec_word: Vec<ApSymbol>,
    pub edits: Vec<EditOp>,
    pub costs: Option<CostBreakdown>,
    pub relaxation: Option<TemporalRelaxation>,
    pub diagnosis: Option<String>,
}

impl PlanResult {
    fn infeasible(diagnosis: Option<&str>) -> Self {
        PlanResult {
            feasible: false,
            product_path: Vec::new(),
            trajectory: Vec::new(),
            exec_word: Vec::new(),
            spec_word: Vec::new(),
            edits: Vec::new(),
            costs: None,
            relaxation: None,
            diagnosis: diagnosis.map(str::to_owned),
        }
    }
}

/// One maximal interval of blend factors sharing an optimal cost pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoEntry {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub plan: PlanResult,
}

/// The trade-off front between task cost and plan length. Entries are ordered
/// by interval, which means decreasing task cost and increasing length; their
/// intervals tile [0, 1] with shared endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub entries: Vec<ParetoEntry>,
    pub diagnosis: Option<String>,
}

impl ParetoFront {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// A product path found by [`shortest_path`]: edge indices in order, plus the
/// total weight including the exit weight of the accepting state reached.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPath {
    pub edges: Vec<usize>,
    pub cost: f64,
}

/// Lexicographically ordered cost pair; the second component breaks ties in
/// the first.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pair(f64, f64);

impl Pair {
    const ZERO: Pair = Pair(0.0, 0.0);
    const INF: Pair = Pair(f64::INFINITY, f64::INFINITY);

    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }

    fn lex_cmp(&self, o: &Pair) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.total_cmp(&o.1))
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

#[derive(Debug, PartialEq)]
struct HeapItem(Pair, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we want the smallest first.
        o.0.lex_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Minimum lexicographic-pair path from `initial` to the goal node `goal` in
/// a graph given by parallel edge arrays. Ties beyond the cost pair are
/// broken by fewest edges, then by the smallest node sequence, then by the
/// smallest edge index, so the result is unique.
fn lex_search(
    nodes: usize,
    goal: usize,
    ends: &[(usize, usize)],
    costs: &[Pair],
    initial: usize,
) -> Option<(Vec<usize>, Pair)> {
    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (ix, &(u, v)) in ends.iter().enumerate() {
        fwd[u].push(ix);
        rev[v].push(ix);
    }

    // Cost-to-goal for every node.
    let mut to_goal = vec![Pair::INF; nodes];
    to_goal[goal] = Pair::ZERO;
    let mut heap = BinaryHeap::from([HeapItem(Pair::ZERO, goal)]);
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d.lex_cmp(&to_goal[v]) == Ordering::Greater {
            continue;
        }
        for &e in &rev[v] {
            let u = ends[e].0;
            let cand = costs[e].add(d);
            if cand.lex_cmp(&to_goal[u]) == Ordering::Less {
                to_goal[u] = cand;
                heap.push(HeapItem(cand, u));
            }
        }
    }
    if !to_goal[initial].is_finite() {
        return None;
    }

    // Optimal-support edges: exactly the ones whose endpoints' labels differ
    // by the edge cost. The relaxation above assigns sums verbatim, so every
    // shortest-path tree edge qualifies.
    let tight: Vec<bool> = ends
        .iter()
        .zip(costs)
        .map(|(&(u, v), &c)| to_goal[u] == c.add(to_goal[v]))
        .collect();

    // Fewest edges to the goal inside the optimal support.
    let mut hops = vec![usize::MAX; nodes];
    hops[goal] = 0;
    let mut queue = VecDeque::from([goal]);
    while let Some(v) = queue.pop_front() {
        for &e in &rev[v] {
            let u = ends[e].0;
            if tight[e] && hops[u] == usize::MAX {
                hops[u] = hops[v] + 1;
                queue.push_back(u);
            }
        }
    }

    // Walk forward, always taking the smallest next node.
    let mut path = Vec::new();
    let mut u = initial;
    while u != goal {
        let e = fwd[u]
            .iter()
            .copied()
            .filter(|&e| tight[e] && hops[ends[e].1].wrapping_add(1) == hops[u])
            .min_by_key(|&e| (ends[e].1, e))
            .expect("optimal support always leads to the goal");
        path.push(e);
        u = ends[e].1;
    }
    Some((path, to_goal[initial]))
}

/// Runs the tie-broken shortest-path search on a product with one primary and
/// one secondary weight per edge and per accepting exit. Returns the product
/// edge indices (the exit pseudo-move is dropped) and the cost pair.
fn search_product(
    pa: &ProductAutomaton,
    edge_costs: impl Fn(usize) -> Pair,
    exit_costs: impl Fn(usize, f64) -> Pair,
) -> Option<(Vec<usize>, Pair)> {
    let n = pa.len();
    let m = pa.edge_count();
    let mut ends: Vec<(usize, usize)> = pa.edges().iter().map(|e| (e.from, e.to)).collect();
    let mut costs: Vec<Pair> = (0..m).map(&edge_costs).collect();
    for (i, (state, fw)) in pa.accepting().enumerate() {
        ends.push((state, n));
        costs.push(exit_costs(i, fw));
    }
    let (path, total) = lex_search(n + 1, n, &ends, &costs, pa.initial())?;
    let edges = path.into_iter().filter(|&e| e < m).collect();
    Some((edges, total))
}

/// Minimum-weight path from the initial state to an accepting state, charging
/// each accepting state's exit weight on top. `edge_weights` runs parallel to
/// the product's edge list and `exit_weights` parallel to its accepting list.
/// Equal-weight paths are resolved toward fewer edges, then the smaller state
/// sequence. Returns `None` when no accepting state is reachable.
pub fn shortest_path(
    pa: &ProductAutomaton,
    edge_weights: &[f64],
    exit_weights: &[f64],
) -> Result<Option<ProductPath>, PlanError> {
    if edge_weights.len() != pa.edge_count() || exit_weights.len() != pa.accepting().count() {
        return Err(PlanError::Domain(format!(
            "expected {} edge weights and {} exit weights, got {} and {}",
            pa.edge_count(),
            pa.accepting().count(),
            edge_weights.len(),
            exit_weights.len()
        )));
    }
    for &w in edge_weights.iter().chain(exit_weights) {
        if w.is_nan() || w < 0.0 {
            return Err(PlanError::Product(ProductError::NegativeWeight {
                edge: "caller-supplied weight".into(),
                weight: w,
            }));
        }
    }
    let found = search_product(
        pa,
        |e| Pair(edge_weights[e], 1.0),
        |i, _| Pair(exit_weights[i], 0.0),
    );
    Ok(found.map(|(edges, total)| ProductPath {
        edges,
        cost: total.0,
    }))
}

fn product_path(pa: &ProductAutomaton, edges: &[usize]) -> Vec<ProductState> {
    std::iter::once(pa.initial())
        .chain(edges.iter().map(|&e| pa.edge(e).to))
        .map(|q| pa.state(q).clone())
        .collect()
}

fn exit_weight_of(pa: &ProductAutomaton, edges: &[usize]) -> f64 {
    let last = edges.last().map_or(pa.initial(), |&e| pa.edge(e).to);
    pa.accepting()
        .find(|&(q, _)| q == last)
        .map_or(0.0, |(_, fw)| fw)
}

/// Plans against an explicit automaton: builds the product, finds the
/// cheapest accepting path under the combined weights, and projects it back.
pub fn plan(
    ts: &TransitionSystem,
    dfa: &SpecDfa,
    wfse: &EditSystem,
    combiner: WeightCombiner,
) -> Result<PlanResult, PlanError> {
    let pa = build_product(ts, wfse, dfa, combiner)?;
    if pa.is_empty() {
        return Ok(PlanResult::infeasible(pa.diagnosis()));
    }
    let (edges, total) =
        search_product(&pa, |e| Pair(pa.edge(e).weight, 1.0), |_, fw| Pair(fw, 0.0))
            .expect("a trimmed non-empty product has an accepting path");
    let proj = pa.project(&edges)?;
    Ok(PlanResult {
        feasible: true,
        product_path: product_path(&pa, &edges),
        trajectory: proj.trajectory,
        exec_word: proj.exec_word,
        spec_word: proj.spec_word,
        edits: proj.edits,
        costs: Some(CostBreakdown {
            task: total.0,
            temporal: edges.len() as u64,
            combined: total.0,
        }),
        relaxation: None,
        diagnosis: None,
    })
}

/// The blended-planning workspace: the deadline-free automaton, the
/// unit-step system, and their product, built once and solved per λ.
struct BiProblem {
    product: ProductAutomaton,
    extended: ExtendedTs,
    annotated: AnnotatedDfa,
}

fn bi_problem(
    ts: &TransitionSystem,
    formula: &TwtlFormula,
    wfse: &EditSystem,
    combiner: WeightCombiner,
) -> Result<BiProblem, PlanError> {
    let annotated = twtl_to_annotated_dfa(formula, ts.ap().iter().cloned())?;
    let extended = extend_ts(ts);
    let product = build_product(extended.ts(), wfse, annotated.dfa(), combiner)?;
    Ok(BiProblem {
        product,
        extended,
        annotated,
    })
}

/// A solved instance before projection: path, task cost, and length.
#[derive(Debug, Clone)]
struct Solved {
    edges: Vec<usize>,
    task: f64,
    temporal: u64,
}

impl Solved {
    fn key(&self) -> (u64, u64) {
        (self.task.to_bits(), self.temporal)
    }
}

/// Minimizes λ·task + (1−λ)·length. At λ = 0 ties fall to the cheaper task
/// cost, otherwise to the shorter path, so both ends of the blend yield
/// undominated cost pairs.
fn solve_blend(prob: &BiProblem, lambda: f64) -> Option<Solved> {
    let pa = &prob.product;
    let found = if lambda == 0.0 {
        search_product(pa, |e| Pair(1.0, pa.edge(e).weight), |_, fw| Pair(0.0, fw))
    } else {
        search_product(
            pa,
            |e| Pair(lambda * pa.edge(e).weight + (1.0 - lambda), 1.0),
            |_, fw| Pair(lambda * fw, 0.0),
        )
    };
    found.map(|(edges, _)| {
        let task: f64 =
            edges.iter().map(|&e| pa.edge(e).weight).sum::<f64>() + exit_weight_of(pa, &edges);
        let temporal = edges.len() as u64;
        Solved {
            edges,
            task,
            temporal,
        }
    })
}

fn assemble(prob: &BiProblem, solved: Solved, combined: f64) -> Result<PlanResult, PlanError> {
    let pa = &prob.product;
    let proj = pa.project(&solved.edges)?;
    let relaxation = prob.annotated.ltr_of_run(&proj.spec_word)?;
    Ok(PlanResult {
        feasible: true,
        product_path: product_path(pa, &solved.edges),
        trajectory: prob
            .extended
            .project(proj.trajectory.iter().map(String::as_str)),
        exec_word: proj.exec_word,
        spec_word: proj.spec_word,
        edits: proj.edits,
        costs: Some(CostBreakdown {
            task: solved.task,
            temporal: solved.temporal,
            combined,
        }),
        relaxation: Some(relaxation),
        diagnosis: None,
    })
}

/// Plans for a deadline formula alone: unit-step system, deadline-free
/// automaton, pass-through edit system, and transition counting. The result
/// carries the per-window deadline extensions of the chosen run.
pub fn plan_temporal(ts: &TransitionSystem, formula: &TwtlFormula) -> Result<PlanResult, PlanError> {
    let e0 = build_cp(ts.ap().iter().cloned())?;
    let prob = bi_problem(ts, formula, &e0, WeightCombiner::TransitionCount)?;
    if prob.product.is_empty() {
        return Ok(PlanResult::infeasible(prob.product.diagnosis()));
    }
    let solved = solve_blend(&prob, 1.0).expect("non-empty product");
    let combined = solved.temporal as f64;
    assemble(&prob, solved, combined)
}

/// Plans under the blended objective λ·task + (1−λ)·length over the product
/// of the unit-step system, the edit system, and the deadline-free automaton.
pub fn plan_bi(
    ts: &TransitionSystem,
    formula: &TwtlFormula,
    wfse: &EditSystem,
    combiner: WeightCombiner,
    lambda: f64,
) -> Result<PlanResult, PlanError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(PlanError::Domain(format!(
            "blend factor {lambda} is outside [0, 1]"
        )));
    }
    let prob = bi_problem(ts, formula, wfse, combiner)?;
    if prob.product.is_empty() {
        return Ok(PlanResult::infeasible(prob.product.diagnosis()));
    }
    let solved = solve_blend(&prob, lambda).expect("non-empty product");
    let combined = lambda * solved.task + (1.0 - lambda) * solved.temporal as f64;
    assemble(&prob, solved, combined)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite cost")
}

/// Blend factor where the cost lines of two front entries cross.
fn intersection(lo: &Solved, hi: &Solved) -> Option<BigRational> {
    let t_lo = BigRational::from_integer(lo.temporal.into());
    let t_hi = BigRational::from_integer(hi.temporal.into());
    let num = &t_hi - &t_lo;
    let den = rational(lo.task) - rational(hi.task) + &num;
    (den > BigRational::from_integer(0.into())).then(|| num / den)
}

fn refine(
    prob: &BiProblem,
    lo: BigRational,
    e_lo: Solved,
    hi: BigRational,
    e_hi: Solved,
    depth: u32,
    out: &mut Vec<(BigRational, BigRational, Solved)>,
) {
    if e_lo.key() == e_hi.key() {
        out.push((lo, hi, e_lo));
        return;
    }
    let star = match intersection(&e_lo, &e_hi) {
        Some(s) if s > lo && s < hi => s,
        Some(s) if s >= hi => hi.clone(),
        _ => lo.clone(),
    };
    if star == lo || star == hi || depth == 0 {
        // The crossing sits on the bracket's edge: the two entries are
        // adjacent and one of the pushed intervals collapses away.
        out.push((lo, star.clone(), e_lo));
        out.push((star, hi, e_hi));
        return;
    }
    let mid = solve_blend(prob, star.to_f64().expect("blend factor fits in f64"))
        .expect("non-empty product");
    if mid.key() == e_lo.key() || mid.key() == e_hi.key() {
        out.push((lo, star.clone(), e_lo));
        out.push((star, hi, e_hi));
    } else {
        refine(prob, lo, e_lo, star.clone(), mid.clone(), depth - 1, out);
        refine(prob, star, mid, hi, e_hi, depth - 1, out);
    }
}

/// Computes every optimal (task, length) trade-off with the blend intervals
/// realizing it, by bisecting on the crossing points of the cost lines.
pub fn pareto(
    ts: &TransitionSystem,
    formula: &TwtlFormula,
    wfse: &EditSystem,
    combiner: WeightCombiner,
) -> Result<ParetoFront, PlanError> {
    let prob = bi_problem(ts, formula, wfse, combiner)?;
    if prob.product.is_empty() {
        return Ok(ParetoFront {
            entries: Vec::new(),
            diagnosis: prob.product.diagnosis().map(str::to_owned),
        });
    }
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    let e0 = solve_blend(&prob, 0.0).expect("non-empty product");
    let e1 = solve_blend(&prob, 1.0).expect("non-empty product");

    let mut raw = Vec::new();
    refine(&prob, zero, e0, one, e1, 64, &mut raw);

    // Merge neighbors that solved to the same cost pair and drop collapsed
    // intervals left behind by the degenerate-crossing guard.
    let mut merged: Vec<(BigRational, BigRational, Solved)> = Vec::new();
    for (lo, hi, s) in raw {
        match merged.last_mut() {
            Some((_, last_hi, last)) if last.key() == s.key() => {
                *last_hi = hi;
            }
            _ if lo == hi => {}
            _ => merged.push((lo, hi, s)),
        }
    }

    let mut entries = Vec::new();
    for (lo, hi, solved) in merged {
        let lambda_lo = lo.to_f64().expect("blend factor fits in f64");
        let lambda_hi = hi.to_f64().expect("blend factor fits in f64");
        let combined = lambda_lo * solved.task + (1.0 - lambda_lo) * solved.temporal as f64;
        entries.push(ParetoEntry {
            lambda_lo,
            lambda_hi,
            plan: assemble(&prob, solved, combined)?,
        });
    }
    Ok(ParetoFront {
        entries,
        diagnosis: None,
    })
}
