//! Unit-duration rewriting of a transition system.
//!
//! A transition of weight w is replaced by a chain of w unit transitions
//! through fresh intermediate states. Intermediates carry the source state's
//! label, so the output word of a trajectory samples labels once per time
//! step, which is what the step-indexed logic expects.

use std::collections::BTreeSet;

use crate::ts::TransitionSystem;

/// A transition system with unit weights plus the bookkeeping to map its
/// trajectories back onto the original system.
#[derive(Debug, Clone)]
pub struct ExtendedTs {
    ts: TransitionSystem,
    originals: BTreeSet<String>,
}

impl ExtendedTs {
    pub fn ts(&self) -> &TransitionSystem {
        &self.ts
    }

    /// True for states of the original system, false for chain intermediates.
    pub fn is_original(&self, state: &str) -> bool {
        self.originals.contains(state)
    }

    /// Drops chain intermediates, leaving the original trajectory.
    pub fn project<'a, I>(&self, trajectory: I) -> Vec<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        trajectory
            .into_iter()
            .filter(|s| self.is_original(s))
            .map(str::to_owned)
            .collect()
    }
}

/// Splits every weighted transition into unit steps. Durations of all routes
/// are preserved exactly; unit-weight systems come back unchanged.
pub fn extend_ts(ts: &TransitionSystem) -> ExtendedTs {
    let originals: BTreeSet<String> = ts.states().map(str::to_owned).collect();
    let mut taken = originals.clone();
    let mut out = TransitionSystem::new(ts.ap().iter().cloned(), ts.initial());
    for s in ts.states() {
        out.add_state(s, ts.label(s).expect("listed state").clone());
    }
    for (from, to, w) in ts.transitions() {
        if w == 1 {
            out.add_transition(from, to, 1);
            continue;
        }
        let label = ts.label(from).expect("endpoint is a state").clone();
        let mut prev = from.to_owned();
        for k in 1..w {
            let mut name = format!("{from}~{to}~{k}");
            while taken.contains(&name) {
                name.push('~');
            }
            taken.insert(name.clone());
            out.add_state(name.clone(), label.clone());
            out.add_transition(prev, name.clone(), 1);
            prev = name;
        }
        out.add_transition(prev, to, 1);
    }
    ExtendedTs {
        ts: out,
        originals,
    }
}
