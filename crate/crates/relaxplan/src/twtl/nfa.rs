//! Guarded nondeterministic machines for formula compilation.
//!
//! Each formula compiles to a machine that consumes one symbol per step and
//! accepts exactly the words that complete the formula on their last symbol.
//! Machines built in relaxed mode drop every window deadline and instead
//! annotate each step taken past a deadline with a +1 extension for that
//! window operator, so the extension vector of a run is the sum of the
//! annotations along its path.

use std::collections::{BTreeMap, BTreeSet};

use crate::symbol::ApSymbol;

use super::TwtlFormula;

/// Conjunction of proposition literals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Guard {
    must: BTreeSet<String>,
    must_not: BTreeSet<String>,
}

impl Guard {
    fn top() -> Self {
        Guard::default()
    }

    fn literal(prop: &str, negated: bool) -> Self {
        let mut g = Guard::default();
        if negated {
            g.must_not.insert(prop.to_owned());
        } else {
            g.must.insert(prop.to_owned());
        }
        g
    }

    /// Conjunction of two guards; `None` when contradictory.
    fn and(&self, other: &Guard) -> Option<Guard> {
        let must: BTreeSet<String> = self.must.union(&other.must).cloned().collect();
        let must_not: BTreeSet<String> = self.must_not.union(&other.must_not).cloned().collect();
        if must.intersection(&must_not).next().is_some() {
            return None;
        }
        Some(Guard { must, must_not })
    }

    pub(crate) fn sat(&self, sym: &ApSymbol) -> bool {
        self.must.iter().all(|p| sym.contains(p))
            && self.must_not.iter().all(|p| !sym.contains(p))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TauEdge {
    pub from: usize,
    pub guard: Guard,
    /// Deadline extensions charged for taking this step, per window operator.
    pub inc: BTreeMap<usize, u32>,
    pub to: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct TauNfa {
    pub n: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub edges: Vec<TauEdge>,
    pub within_count: usize,
}

impl TauNfa {
    /// Closes the language under extension: once accepted, any continuation
    /// stays accepted. Realizes prefix satisfaction at the top level.
    pub(crate) fn pad_extension(&mut self) {
        let done = self.n;
        self.n += 1;
        for f in self.accepting.clone() {
            self.edges.push(TauEdge {
                from: f,
                guard: Guard::top(),
                inc: BTreeMap::new(),
                to: done,
            });
        }
        self.edges.push(TauEdge {
            from: done,
            guard: Guard::top(),
            inc: BTreeMap::new(),
            to: done,
        });
        self.accepting.insert(done);
    }
}

/// Machine fragment under construction. Guaranteed never to accept the empty
/// word: every formula consumes at least one symbol, so the initial state is
/// never accepting and acceptance always happens on an incoming edge.
struct SubNfa {
    n: usize,
    initial: usize,
    accepting: BTreeSet<usize>,
    edges: Vec<TauEdge>,
}

impl SubNfa {
    fn outgoing(&self, from: usize) -> Vec<TauEdge> {
        self.edges.iter().filter(|e| e.from == from).cloned().collect()
    }
}

fn hold(duration: u32, prop: &str, negated: bool) -> SubNfa {
    let steps = duration as usize + 1;
    let edges = (0..steps)
        .map(|i| TauEdge {
            from: i,
            guard: Guard::literal(prop, negated),
            inc: BTreeMap::new(),
            to: i + 1,
        })
        .collect();
    SubNfa {
        n: steps + 1,
        initial: 0,
        accepting: BTreeSet::from([steps]),
        edges,
    }
}

fn shift(edges: &[TauEdge], by: usize) -> impl Iterator<Item = TauEdge> + '_ {
    edges.iter().map(move |e| TauEdge {
        from: e.from + by,
        guard: e.guard.clone(),
        inc: e.inc.clone(),
        to: e.to + by,
    })
}

fn union(a: SubNfa, b: SubNfa) -> SubNfa {
    let off = a.n;
    let initial = a.n + b.n;
    let a_starts = a.outgoing(a.initial);
    let b_starts: Vec<TauEdge> = shift(&b.outgoing(b.initial), off).collect();
    let mut edges = a.edges;
    edges.extend(shift(&b.edges, off));
    for e in a_starts.into_iter().chain(b_starts) {
        edges.push(TauEdge { from: initial, ..e });
    }
    let mut accepting = a.accepting;
    accepting.extend(b.accepting.iter().map(|&s| s + off));
    SubNfa {
        n: initial + 1,
        initial,
        accepting,
        edges,
    }
}

fn concat(a: SubNfa, b: SubNfa) -> SubNfa {
    let off = a.n;
    let starts: Vec<TauEdge> = shift(&b.outgoing(b.initial), off).collect();
    let mut edges = a.edges;
    edges.extend(shift(&b.edges, off));
    for &f in &a.accepting {
        for e in &starts {
            edges.push(TauEdge {
                from: f,
                ..e.clone()
            });
        }
    }
    SubNfa {
        n: a.n + b.n,
        initial: a.initial,
        accepting: b.accepting.iter().map(|&s| s + off).collect(),
        edges,
    }
}

/// Side of a conjunction: a live machine state, or finished strictly earlier.
type AndSide = Option<usize>;

/// Synchronous product accepting when the later of the two sides completes.
/// A finished side idles on arbitrary symbols.
fn product_and(a: SubNfa, b: SubNfa) -> SubNfa {
    let side_moves = |m: &SubNfa, s: AndSide| -> Vec<(Guard, BTreeMap<usize, u32>, AndSide)> {
        match s {
            None => vec![(Guard::top(), BTreeMap::new(), None)],
            Some(u) => {
                let mut out: Vec<(Guard, BTreeMap<usize, u32>, AndSide)> = m
                    .outgoing(u)
                    .into_iter()
                    .map(|e| (e.guard, e.inc, Some(e.to)))
                    .collect();
                if m.accepting.contains(&u) {
                    out.push((Guard::top(), BTreeMap::new(), None));
                }
                out
            }
        }
    };
    let completes = |m: &SubNfa, s: AndSide| -> (bool, bool) {
        // (just completed, finished earlier)
        match s {
            None => (false, true),
            Some(u) => (m.accepting.contains(&u), false),
        }
    };

    let start = (Some(a.initial), Some(b.initial));
    let mut ids: BTreeMap<(AndSide, AndSide), usize> = BTreeMap::from([(start, 0)]);
    let mut queue = vec![start];
    let mut edges = Vec::new();
    let mut accepting = BTreeSet::new();
    let mut i = 0;
    while i < queue.len() {
        let (sa, sb) = queue[i];
        let from = ids[&(sa, sb)];
        let (fa, da) = completes(&a, sa);
        let (fb, db) = completes(&b, sb);
        if (fa && (fb || db)) || (fb && da) {
            accepting.insert(from);
        }
        for (ga, inca, ta) in side_moves(&a, sa) {
            for (gb, incb, tb) in side_moves(&b, sb) {
                let Some(guard) = ga.and(&gb) else { continue };
                let mut inc = inca.clone();
                inc.extend(incb.iter().map(|(&k, &v)| (k, v)));
                let key = (ta, tb);
                let fresh = ids.len();
                let to = *ids.entry(key).or_insert(fresh);
                if to == fresh {
                    queue.push(key);
                }
                edges.push(TauEdge {
                    from,
                    guard,
                    inc,
                    to,
                });
            }
        }
        i += 1;
    }
    SubNfa {
        n: ids.len(),
        initial: 0,
        accepting,
        edges,
    }
}

/// Window state: `None` = still waiting to start the child.
type WinState = (Option<usize>, u32);

/// Clock product realizing `[child]^[lo,hi]`. In strict mode the clock is
/// hard-capped so nothing completes after `hi`. In relaxed mode the clock
/// saturates one step past the deadline and every step taken from the
/// saturated value charges a +1 extension to operator `op`.
fn product_within(child: SubNfa, lo: u32, hi: u32, op: usize, relaxed: bool) -> SubNfa {
    let sat = hi + 1;
    let tick = |c: u32| -> Option<(u32, BTreeMap<usize, u32>)> {
        if relaxed {
            let inc = if c >= sat {
                BTreeMap::from([(op, 1)])
            } else {
                BTreeMap::new()
            };
            Some(((c + 1).min(sat), inc))
        } else if c < sat {
            Some((c + 1, BTreeMap::new()))
        } else {
            None
        }
    };

    let start = (None, 0);
    let mut ids: BTreeMap<WinState, usize> = BTreeMap::from([(start, 0)]);
    let mut queue = vec![start];
    let mut edges = Vec::new();
    let mut accepting = BTreeSet::new();
    let mut i = 0;
    while i < queue.len() {
        let (pos, c) = queue[i];
        let from = ids[&(pos, c)];
        if matches!(pos, Some(q) if child.accepting.contains(&q)) {
            accepting.insert(from);
        }
        let push = |key: WinState,
                        guard: Guard,
                        inc: BTreeMap<usize, u32>,
                        ids: &mut BTreeMap<WinState, usize>,
                        queue: &mut Vec<WinState>,
                        edges: &mut Vec<TauEdge>| {
            let fresh = ids.len();
            let to = *ids.entry(key).or_insert(fresh);
            if to == fresh {
                queue.push(key);
            }
            edges.push(TauEdge {
                from,
                guard,
                inc,
                to,
            });
        };
        let child_moves = |q: usize| child.outgoing(q);
        match pos {
            None => {
                // keep waiting (strict mode: only while the child can still start)
                if let Some((c2, inc)) = tick(c) {
                    if relaxed || c2 <= hi {
                        push((None, c2), Guard::top(), inc, &mut ids, &mut queue, &mut edges);
                    }
                }
                // start the child
                if c >= lo {
                    if let Some((c2, base_inc)) = tick(c) {
                        for e in child_moves(child.initial) {
                            let mut inc = base_inc.clone();
                            inc.extend(e.inc.iter().map(|(&k, &v)| (k, v)));
                            push((Some(e.to), c2), e.guard, inc, &mut ids, &mut queue, &mut edges);
                        }
                    }
                }
            }
            Some(q) => {
                if let Some((c2, base_inc)) = tick(c) {
                    for e in child_moves(q) {
                        let mut inc = base_inc.clone();
                        inc.extend(e.inc.iter().map(|(&k, &v)| (k, v)));
                        push((Some(e.to), c2), e.guard, inc, &mut ids, &mut queue, &mut edges);
                    }
                }
            }
        }
        i += 1;
    }
    SubNfa {
        n: ids.len(),
        initial: 0,
        accepting,
        edges,
    }
}

fn build(f: &TwtlFormula, relaxed: bool, ops: &mut usize) -> SubNfa {
    match f {
        TwtlFormula::Hold {
            duration,
            prop,
            negated,
        } => hold(*duration, prop, *negated),
        TwtlFormula::And(l, r) => {
            let a = build(l, relaxed, ops);
            let b = build(r, relaxed, ops);
            product_and(a, b)
        }
        TwtlFormula::Or(l, r) => {
            let a = build(l, relaxed, ops);
            let b = build(r, relaxed, ops);
            union(a, b)
        }
        TwtlFormula::Concat(l, r) => {
            let a = build(l, relaxed, ops);
            let b = build(r, relaxed, ops);
            concat(a, b)
        }
        TwtlFormula::Within { child, lo, hi } => {
            let op = *ops;
            *ops += 1;
            let c = build(child, relaxed, ops);
            product_within(c, *lo, *hi, op, relaxed)
        }
    }
}

/// Compiles the formula to a guarded machine accepting exactly the words
/// that complete it on their last symbol. Relaxed mode removes the window
/// deadlines and annotates late steps instead.
pub(crate) fn tau_nfa(f: &TwtlFormula, relaxed: bool) -> TauNfa {
    let mut ops = 0;
    let sub = build(f, relaxed, &mut ops);
    TauNfa {
        n: sub.n,
        initial: sub.initial,
        accepting: sub.accepting,
        edges: sub.edges,
        within_count: ops,
    }
}
