//! Compiled rule machines are compared against a direct recursive matcher
//! that interprets the expression tree, on every pair of words up to a fixed
//! length. The matcher shares nothing with the compiler: it works on the
//! tree, the compiler on automata.

use std::collections::BTreeMap;

use relaxplan::symbol::symbols_over;
use relaxplan::{compile_rules, parse_rules, ApSymbol, CompileOptions, EditSystem};
use relaxplan::rules::{RuleExpr, RulePattern};

/// Minimal derivation costs: for a start position `(i, j)` into the word
/// pair, every reachable end position with the cheapest cost of deriving the
/// consumed segment from the expression.
fn derive(
    expr: &RuleExpr,
    exec: &[ApSymbol],
    spec: &[ApSymbol],
    alpha: &[ApSymbol],
    from: &BTreeMap<(usize, usize), f64>,
) -> BTreeMap<(usize, usize), f64> {
    let mut out: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut relax = |key: (usize, usize), cost: f64| {
        let slot = out.entry(key).or_insert(f64::INFINITY);
        *slot = slot.min(cost);
    };
    match expr {
        RuleExpr::Atom(a) => {
            let pairs: Vec<(Option<ApSymbol>, Option<ApSymbol>)> =
                if a.exec == RulePattern::Any && a.spec == RulePattern::Any {
                    alpha.iter().map(|s| (Some(s.clone()), Some(s.clone()))).collect()
                } else {
                    let side = |p: &RulePattern| -> Vec<Option<ApSymbol>> {
                        match p {
                            RulePattern::Any => alpha.iter().cloned().map(Some).collect(),
                            RulePattern::Epsilon => vec![None],
                            RulePattern::Symbol(s) => vec![Some(s.clone())],
                        }
                    };
                    let mut v = Vec::new();
                    for e in side(&a.exec) {
                        for s in side(&a.spec) {
                            v.push((e.clone(), s));
                        }
                    }
                    v
                };
            for (&(i, j), &c) in from {
                for (pe, ps) in &pairs {
                    let i2 = match pe {
                        Some(x) if i < exec.len() && &exec[i] == x => i + 1,
                        Some(_) => continue,
                        None => i,
                    };
                    let j2 = match ps {
                        Some(x) if j < spec.len() && &spec[j] == x => j + 1,
                        Some(_) => continue,
                        None => j,
                    };
                    relax((i2, j2), c + a.cost);
                }
            }
        }
        RuleExpr::Concat(items) => {
            let mut cur = from.clone();
            for item in items {
                cur = derive(item, exec, spec, alpha, &cur);
            }
            out = cur;
        }
        RuleExpr::Alt(items) => {
            for item in items {
                for (key, c) in derive(item, exec, spec, alpha, from) {
                    relax(key, c);
                }
            }
        }
        RuleExpr::Star(inner) => {
            // Costs are nonnegative and every atom consumes a symbol, so
            // iterating to a fixpoint terminates.
            let mut cur = from.clone();
            loop {
                let step = derive(inner, exec, spec, alpha, &cur);
                let mut changed = false;
                for (key, c) in step {
                    let slot = cur.entry(key).or_insert(f64::INFINITY);
                    if c < *slot - 1e-12 {
                        *slot = c;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            out = cur;
        }
    }
    out
}

fn reference_cost(
    expr: &RuleExpr,
    exec: &[ApSymbol],
    spec: &[ApSymbol],
    alpha: &[ApSymbol],
) -> Option<f64> {
    let start = BTreeMap::from([((0, 0), 0.0)]);
    derive(expr, exec, spec, alpha, &start)
        .get(&(exec.len(), spec.len()))
        .copied()
        .filter(|c| c.is_finite())
}

fn words_up_to(alpha: &[ApSymbol], max_len: usize) -> Vec<Vec<ApSymbol>> {
    let mut out: Vec<Vec<ApSymbol>> = vec![Vec::new()];
    let mut layer: Vec<Vec<ApSymbol>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for s in alpha {
                let mut w2 = w.clone();
                w2.push(s.clone());
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn check(text: &str, ap: &[&str], max_len: usize) {
    let expr = parse_rules(text).unwrap();
    let machine: EditSystem =
        compile_rules(&expr, ap.iter().copied(), CompileOptions::default()).unwrap();
    let alpha = symbols_over(machine.ap(), 64).unwrap();
    let words = words_up_to(&alpha, max_len);
    for exec in &words {
        for spec in &words {
            let by_machine = machine.transduce(exec, spec);
            let by_tree = reference_cost(&expr, exec, spec, &alpha);
            let agree = match (by_machine, by_tree) {
                (None, None) => true,
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
                _ => false,
            };
            assert!(
                agree,
                "rule {text}: exec {exec:?} spec {spec:?}: machine {by_machine:?} tree {by_tree:?}"
            );
        }
    }
}

#[test]
fn compiled_machines_match_the_tree_interpreter() {
    check("(./., 0)*", &["a"], 3);
    check("( (./., 0) | ({}/{a}, 5) )*", &["a"], 3);
    check("( (./., 0) | ({a}/eps, 2) (eps/{a}, 1) )*", &["a"], 3);
    check("(./., 0)* ({a}/{b}, 4) (./., 0)*", &["a", "b"], 3);
    check("( ({a}/{b}, 1) | ({b}/{a}, 1) )*", &["a", "b"], 3);
    check("(eps/., 2)* (./., 0)*", &["a"], 3);
    check("({a}/{a}, 0) ({a}/{a}, 0)*", &["a"], 4);
    check("( (./., 0) (./., 0) | ({a,b}/{a}, 3) )*", &["a", "b"], 3);
}

#[test]
fn equivalent_spellings_compile_to_the_same_machine() {
    let a = parse_rules("( (./., 0) | ({}/{a}, 5) )*").unwrap();
    let b = parse_rules("( ({}/{a}, 5) | (./., 0) )*").unwrap();
    let ma = compile_rules(&a, ["a"], CompileOptions::default()).unwrap();
    let mb = compile_rules(&b, ["a"], CompileOptions::default()).unwrap();
    assert_eq!(ma.len(), mb.len());
    let ta: Vec<_> = ma.transitions().to_vec();
    let tb: Vec<_> = mb.transitions().to_vec();
    assert_eq!(ta, tb);
}
