//! Structural properties of the synchronized product: size bound, trimness,
//! deterministic construction, and monotonicity of planning cost in the edit
//! relation.

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relaxplan::symbol::symbols_over;
use relaxplan::{
    build_cp, build_product, plan, ApSymbol, EditSystem, SpecDfa, TransitionSystem,
    WeightCombiner,
};

fn sym(props: &[&str]) -> ApSymbol {
    ApSymbol::new(props.iter().copied()).unwrap()
}

fn random_parts(rng: &mut ChaCha8Rng) -> (TransitionSystem, SpecDfa, EditSystem) {
    let ap = ["a", "b"];
    let mut ts = TransitionSystem::new(ap, "x0");
    let alpha = symbols_over(ts.ap(), 64).unwrap();
    let n_x = rng.gen_range(2..=6);
    for i in 0..n_x {
        let label = alpha[rng.gen_range(0..alpha.len())].clone();
        ts.add_state(format!("x{i}"), label);
    }
    for i in 1..n_x {
        let from = rng.gen_range(0..i);
        ts.add_transition(format!("x{from}"), format!("x{i}"), rng.gen_range(1..=4));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let from = rng.gen_range(0..n_x);
        let to = rng.gen_range(0..n_x);
        ts.add_transition(format!("x{from}"), format!("x{to}"), rng.gen_range(1..=4));
    }

    let n_s = rng.gen_range(1..=4);
    let mut dfa = SpecDfa::new(ap, "s0");
    for i in 0..n_s {
        for s in &alpha {
            if rng.gen_bool(0.5) {
                let to = rng.gen_range(0..n_s);
                dfa.add_transition(format!("s{i}"), s.clone(), format!("s{to}"));
            }
        }
    }
    dfa.mark_accepting(format!("s{}", rng.gen_range(0..n_s)));

    let n_z = rng.gen_range(1..=3);
    let mut wfse = EditSystem::new(ap, "z0");
    for i in 0..n_z {
        wfse.add_state(format!("z{i}"));
    }
    for i in 0..n_z {
        for s in &alpha {
            if rng.gen_bool(0.55) {
                let to = rng.gen_range(0..n_z);
                wfse.add_transition(format!("z{i}"), s.clone(), s.clone(), 0.0, format!("z{to}"));
            }
        }
        if rng.gen_bool(0.5) {
            let spec = alpha[rng.gen_range(0..alpha.len())].clone();
            let exec = alpha[rng.gen_range(0..alpha.len())].clone();
            let to = rng.gen_range(0..n_z);
            wfse.add_transition(format!("z{i}"), exec, spec, 1.5, format!("z{to}"));
        }
    }
    wfse.mark_accepting(format!("z{}", rng.gen_range(0..n_z)));
    (ts, dfa, wfse)
}

#[test]
fn edge_count_is_bounded_by_the_component_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..80 {
        let (ts, dfa, wfse) = random_parts(&mut rng);
        let pa = build_product(&ts, &wfse, &dfa, WeightCombiner::Additive).unwrap();
        let d_t = ts.transitions().count();
        let d_e = wfse.transitions().len();
        let d_a = dfa.transitions().count();
        assert!(
            pa.edge_count() <= d_t * d_e * d_a,
            "product has {} edges, bound {}",
            pa.edge_count(),
            d_t * d_e * d_a
        );
    }
}

#[test]
fn construction_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (ts, dfa, wfse) = random_parts(&mut rng);
        let a = build_product(&ts, &wfse, &dfa, WeightCombiner::Additive).unwrap();
        let b = build_product(&ts, &wfse, &dfa, WeightCombiner::Additive).unwrap();
        assert_eq!(a.to_dot(), b.to_dot());
    }
}

#[test]
fn every_state_lies_on_an_accepting_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..60 {
        let (ts, dfa, wfse) = random_parts(&mut rng);
        let pa = build_product(&ts, &wfse, &dfa, WeightCombiner::Additive).unwrap();
        if pa.is_empty() {
            continue;
        }
        let n = pa.len();
        let mut fwd = vec![false; n];
        fwd[pa.initial()] = true;
        let mut stack = vec![pa.initial()];
        while let Some(u) = stack.pop() {
            for &e in pa.outgoing(u) {
                let v = pa.edge(e).to;
                if !fwd[v] {
                    fwd[v] = true;
                    stack.push(v);
                }
            }
        }
        let mut back = vec![false; n];
        let mut stack: Vec<usize> = pa.accepting().map(|(s, _)| s).collect();
        for &s in &stack {
            back[s] = true;
        }
        while let Some(v) = stack.pop() {
            for e in pa.edges() {
                if e.to == v && !back[e.from] {
                    back[e.from] = true;
                    stack.push(e.from);
                }
            }
        }
        for v in 0..n {
            assert!(fwd[v] && back[v], "state {v} survives trimming but is not useful");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Widening the edit relation can only help: adding one substitution
    /// rule never increases the optimal cost, and a zero-cost rule that
    /// applies is always at least as good as paying the detour.
    #[test]
    fn extra_rules_never_increase_the_cost(weight in 0.0f64..6.0, target in 0usize..3) {
        let mut ts = TransitionSystem::new(["a", "b"], "x0");
        ts.add_state("x0", sym(&[]));
        ts.add_state("x1", sym(&["b"]));
        ts.add_state("x2", sym(&["a"]));
        ts.add_transition("x0", "x1", 1);
        ts.add_transition("x1", "x2", 6);
        let mut dfa = SpecDfa::new(["a", "b"], "s0");
        for s in [sym(&[]), sym(&["b"]), sym(&["a", "b"])] {
            dfa.add_transition("s0", s, "s0");
        }
        dfa.add_transition("s0", sym(&["a"]), "s1");
        dfa.mark_accepting("s1");

        let base = build_cp(["a", "b"]).unwrap();
        let base_cost = plan(&ts, &dfa, &base, WeightCombiner::Additive)
            .unwrap()
            .costs
            .unwrap()
            .task;

        let mut widened = base.clone();
        let targets = [sym(&[]), sym(&["b"]), sym(&["a", "b"])];
        widened.add_transition("z0", targets[target].clone(), sym(&["a"]), weight, "z0");
        let widened_cost = plan(&ts, &dfa, &widened, WeightCombiner::Additive)
            .unwrap()
            .costs
            .unwrap()
            .task;

        prop_assert!(widened_cost <= base_cost + 1e-12);
    }
}
