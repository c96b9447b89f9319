//! Route planning with relaxation preferences.

pub mod combine;
pub mod dfa;
mod minimize;
pub mod oracle;
pub mod planning;
pub mod product;
pub mod rules;
pub mod symbol;
mod trim;
pub mod ts;
pub mod twtl;
pub mod validate;
pub mod wfse;

pub use combine::WeightCombiner;
pub use dfa::{DfaError, SpecDfa};
pub use oracle::{
    brute_force_plan, min_ltr, relax_formula, score_pair, semantic_twtl_check, BruteWitness,
    OracleBudget, OracleError,
};
pub use planning::{
    pareto, plan, plan_bi, plan_temporal, shortest_path, CostBreakdown, ParetoEntry, ParetoFront,
    PlanError, PlanResult, ProductPath,
};
pub use product::{
    build_product, EditKind, EditOp, ProductAutomaton, ProductEdge, ProductError, ProductState,
    Projection,
};
pub use rules::{
    build_cp, build_hsc, build_mrp, build_mvp, build_ps, compile_rules, parse_rules,
    CompileOptions, RuleError, SubstitutionCostMatrix,
};
pub use symbol::{ApSymbol, EditSymbol, SymbolError};
pub use ts::TransitionSystem;
pub use twtl::{
    extend_ts, parse_twtl, twtl_to_annotated_dfa, twtl_to_dfa, AnnotatedDfa, ExtendedTs,
    TemporalRelaxation, TwtlError, TwtlFormula,
};
pub use validate::{Validate, Violation};
pub use wfse::{EditSystem, EditTransition};
