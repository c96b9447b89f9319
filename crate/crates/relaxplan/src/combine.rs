//! Weight combiners: how a duration from the transition system and an edit
//! weight merge into one edge cost in the product.

use std::fmt;

#[derive(Clone, Copy)]
pub enum WeightCombiner {
    /// ts + edit
    Additive,
    /// ts * edit
    Multiplicative,
    /// ts * (1 + edit): edit weights act as a fractional surcharge on time
    Rate,
    /// Constant 1 per edge, so path cost counts transitions
    TransitionCount,
    /// Caller-supplied combination; the name is used in diagnostics only
    Custom(&'static str, fn(f64, f64) -> f64),
}

impl WeightCombiner {
    pub fn combine(&self, ts_weight: f64, edit_weight: f64) -> f64 {
        match self {
            WeightCombiner::Additive => ts_weight + edit_weight,
            WeightCombiner::Multiplicative => ts_weight * edit_weight,
            WeightCombiner::Rate => ts_weight * (1.0 + edit_weight),
            WeightCombiner::TransitionCount => 1.0,
            WeightCombiner::Custom(_, f) => f(ts_weight, edit_weight),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightCombiner::Additive => "additive",
            WeightCombiner::Multiplicative => "multiplicative",
            WeightCombiner::Rate => "rate",
            WeightCombiner::TransitionCount => "count",
            WeightCombiner::Custom(name, _) => name,
        }
    }
}

impl fmt::Debug for WeightCombiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightCombiner({})", self.name())
    }
}

impl PartialEq for WeightCombiner {
    /// Custom combiners compare by name.
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}
