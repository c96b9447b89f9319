use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use relaxplan::{
    build_cp, build_product, compile_rules, pareto, parse_rules, parse_twtl, plan, ApSymbol,
    CompileOptions, EditSystem, SpecDfa, TransitionSystem, WeightCombiner,
};

fn sym(props: &[&str]) -> ApSymbol {
    ApSymbol::new(props.iter().copied()).unwrap()
}

/// A ring machine with `n` states and transitions, a pass-through edit system
/// widened by two substitutions, and a three-state "a then b" acceptor.
fn ring_instance(n: usize) -> (TransitionSystem, EditSystem, SpecDfa) {
    let mut ts = TransitionSystem::new(["a", "b"], "r0");
    let labels = [sym(&["a"]), sym(&[]), sym(&["b"]), sym(&[])];
    for i in 0..n {
        ts.add_state(format!("r{i}"), labels[i % labels.len()].clone());
    }
    for i in 0..n {
        ts.add_transition(format!("r{i}"), format!("r{}", (i + 1) % n), 1);
    }

    let mut wfse = build_cp(["a", "b"]).unwrap();
    wfse.add_transition("z0", sym(&["a"]), sym(&["b"]), 1.0, "z0");
    wfse.add_transition("z0", sym(&["b"]), sym(&["a"]), 1.0, "z0");

    let mut dfa = SpecDfa::new(["a", "b"], "s0");
    for s in [sym(&[]), sym(&["a"]), sym(&["b"]), sym(&["a", "b"])] {
        let hit_a = s == sym(&["a"]) || s == sym(&["a", "b"]);
        let hit_b = s == sym(&["b"]) || s == sym(&["a", "b"]);
        dfa.add_transition("s0", s.clone(), if hit_a { "s1" } else { "s0" });
        dfa.add_transition("s1", s.clone(), if hit_b { "s2" } else { "s1" });
        dfa.add_transition("s2", s, "s2");
    }
    dfa.mark_accepting("s2");
    (ts, wfse, dfa)
}

fn bench_product_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_product");
    for n in [100usize, 400, 1600] {
        let (ts, wfse, dfa) = ring_instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                build_product(&ts, &wfse, &dfa, WeightCombiner::Additive)
                    .unwrap()
                    .edge_count()
            })
        });
    }
    group.finish();
}

fn bench_planning(c: &mut Criterion) {
    let (ts, wfse, dfa) = ring_instance(400);
    c.bench_function("plan ring 400", |b| {
        b.iter(|| plan(&ts, &dfa, &wfse, WeightCombiner::Additive).unwrap())
    });

    // the three-route trade-off instance, solved across the whole blend range
    let mut hub = TransitionSystem::new(["G", "pA", "pB"], "x0");
    hub.add_state("x0", sym(&[]));
    for (prefix, len, label) in [("a", 4, sym(&["pA"])), ("b", 7, sym(&["pB"])), ("c", 11, sym(&["G"]))]
    {
        let mut prev = "x0".to_string();
        for i in 1..=len {
            let name = format!("{prefix}{i}");
            hub.add_state(&name, if i == len { label.clone() } else { sym(&[]) });
            hub.add_transition(prev, &name, 1);
            prev = name;
        }
    }
    let formula = parse_twtl("[H^0 G]^[0,4]").unwrap();
    let expr = parse_rules("( (./., 0) | ({pA}/{G}, 24) | ({pB}/{G}, 12) )*").unwrap();
    let edits = compile_rules(&expr, ["G", "pA", "pB"], CompileOptions::default()).unwrap();
    c.bench_function("pareto three routes", |b| {
        b.iter(|| pareto(&hub, &formula, &edits, WeightCombiner::Additive).unwrap())
    });
}

fn bench_transduction(c: &mut Criterion) {
    let edits = relaxplan::build_mvp(["a", "b"], 2.5).unwrap();
    let spec: Vec<ApSymbol> = (0..24)
        .map(|i| if i % 3 == 0 { sym(&["a"]) } else { sym(&["b"]) })
        .collect();
    let exec: Vec<ApSymbol> = spec
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 4 != 0)
        .map(|(_, s)| s.clone())
        .collect();
    c.bench_function("transduce 18x24", |b| {
        b.iter(|| edits.transduce(&exec, &spec).unwrap())
    });
}

criterion_group!(
    benches,
    bench_product_construction,
    bench_planning,
    bench_transduction
);
criterion_main!(benches);
