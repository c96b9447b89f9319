//! Command-line planner: plan, pareto, compile, and certify verbs over TOML
//! model files.
//!
//! Exit codes: 0 success (and feasible, where that applies), 1 usage or
//! validation error, 2 infeasible instance, 3 enumeration budget exceeded,
//! 4 certification disagreement.

mod model;
mod render;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use relaxplan::{
    brute_force_plan, build_cp, build_hsc, build_mrp, build_mvp, build_ps, compile_rules, pareto,
    plan, plan_bi, plan_temporal, twtl_to_annotated_dfa, twtl_to_dfa, CompileOptions, EditSystem,
    OracleBudget, OracleError, SpecDfa, TransitionSystem, TwtlFormula, WeightCombiner,
};

use model::{load_model, model_to_toml, Model, ModelError};
use report::{write_atomic, InputRecord, ReportHeader};

#[derive(Parser)]
#[command(name = "relaxplan", version, about = "Minimum-relaxation route planning")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Find the cheapest satisfying plan for one specification.
    Plan(PlanArgs),
    /// Trace the whole task-cost/length trade-off for a deadline formula.
    Pareto(ParetoArgs),
    /// Compile a rules file to an edit system, or a formula to an automaton.
    Compile(CompileArgs),
    /// Cross-check the planner against brute-force enumeration.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuilderKind {
    Cp,
    Mvp,
    Mrp,
    Hsc,
    Ps,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CombineKind {
    Additive,
    Multiplicative,
    Rate,
    Count,
}

impl CombineKind {
    fn combiner(self) -> WeightCombiner {
        match self {
            CombineKind::Additive => WeightCombiner::Additive,
            CombineKind::Multiplicative => WeightCombiner::Multiplicative,
            CombineKind::Rate => WeightCombiner::Rate,
            CombineKind::Count => WeightCombiner::TransitionCount,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CombineKind::Additive => "additive",
            CombineKind::Multiplicative => "multiplicative",
            CombineKind::Rate => "rate",
            CombineKind::Count => "count",
        }
    }
}

/// The model flags shared by plan, pareto, and certify.
#[derive(Args)]
struct ModelArgs {
    /// Transition system file.
    #[arg(long)]
    ts: PathBuf,
    /// Specification automaton file (mutually exclusive with --twtl).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Deadline formula file (mutually exclusive with --spec).
    #[arg(long)]
    twtl: Option<PathBuf>,
    /// Edit rules file to compile.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Pre-built edit system file.
    #[arg(long)]
    wfse: Option<PathBuf>,
    /// Ready-made edit relation.
    #[arg(long, value_enum)]
    builder: Option<BuilderKind>,
    /// Penalty for the mvp and hsc builders.
    #[arg(long)]
    penalty: Option<f64>,
    /// Soft-constraint automaton file for the hsc builder.
    #[arg(long)]
    soft: Option<PathBuf>,
    /// Substitution cost matrix file for the mrp builder.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// How machine and edit weights combine along a path.
    #[arg(long, value_enum, default_value = "additive")]
    combine: CombineKind,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Blend between task cost (1) and plan length (0); needs --twtl.
    #[arg(long)]
    lambda: Option<f64>,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Report file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Front table file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Front plot file.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    /// Edit rules file to compile into an edit system.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Deadline formula file to compile into an automaton.
    #[arg(long)]
    twtl: Option<PathBuf>,
    /// Compile the deadline-free automaton that tracks relaxations.
    #[arg(long)]
    annotated: bool,
    /// Compiled model file.
    #[arg(long)]
    out: PathBuf,
    /// Graph description of the compiled machine.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Longest trajectory the enumeration considers, in states.
    #[arg(long, default_value_t = 8)]
    max_trajectory_len: usize,
    /// Longest specification word the enumeration considers.
    #[arg(long, default_value_t = 8)]
    max_spec_len: usize,
    /// Most (trajectory, word) pairs scored before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    max_candidates: u64,
}

enum Failure {
    Usage(String),
    Infeasible,
    Budget(String),
    Disagree(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Infeasible => 2,
            Failure::Budget(_) => 3,
            Failure::Disagree(_) => 4,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            Failure::Usage(m) | Failure::Budget(m) | Failure::Disagree(m) => Some(m),
            Failure::Infeasible => None,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("io error: {e}"))
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let start = Instant::now();
    let outcome = match cli.verb {
        Verb::Plan(args) => run_plan(args, start),
        Verb::Pareto(args) => run_pareto(args, start),
        Verb::Compile(args) => run_compile(args),
        Verb::Certify(args) => run_certify(args),
    };
    if let Err(f) = outcome {
        if let Some(m) = f.message() {
            eprintln!("error: {m}");
        }
        std::process::exit(f.code());
    }
}

fn strict_mode() -> bool {
    std::env::var("RELAXPLAN_STRICT").is_ok_and(|v| v == "1")
}

/// Everything loaded for a planning-style verb: the machine, the
/// specification (automaton or formula), the edit system, and the verbatim
/// input records for the report.
struct LoadedInstance {
    ts: TransitionSystem,
    spec: SpecSide,
    wfse: EditSystem,
    inputs: Vec<InputRecord>,
}

enum SpecSide {
    Dfa(SpecDfa),
    Formula(TwtlFormula),
}

fn record(role: &'static str, path: &Path, text: String) -> InputRecord {
    InputRecord {
        role,
        path: path.display().to_string(),
        text,
    }
}

fn expect_kind(model: Model, want: &str, path: &Path) -> Result<Model, Failure> {
    if model.kind() == want {
        Ok(model)
    } else {
        Err(Failure::Usage(format!(
            "{}: expected a {want} file, found kind {:?}",
            path.display(),
            model.kind()
        )))
    }
}

fn load_instance(args: &ModelArgs) -> Result<LoadedInstance, Failure> {
    let strict = strict_mode();
    let mut inputs = Vec::new();

    let (ts_model, ts_text) = load_model(&args.ts, strict)?;
    let Model::TransitionSystem(ts) = expect_kind(ts_model, "transition-system", &args.ts)? else {
        unreachable!("kind checked above");
    };
    inputs.push(record("ts", &args.ts, ts_text));

    let spec = match (&args.spec, &args.twtl) {
        (Some(path), None) => {
            let (m, text) = load_model(path, strict)?;
            let Model::Dfa(dfa) = expect_kind(m, "dfa", path)? else {
                unreachable!("kind checked above");
            };
            inputs.push(record("spec", path, text));
            SpecSide::Dfa(dfa)
        }
        (None, Some(path)) => {
            let (m, text) = load_model(path, strict)?;
            let Model::Twtl { formula, .. } = expect_kind(m, "twtl", path)? else {
                unreachable!("kind checked above");
            };
            inputs.push(record("twtl", path, text));
            SpecSide::Formula(formula)
        }
        _ => {
            return Err(Failure::Usage(
                "exactly one of --spec or --twtl is required".into(),
            ))
        }
    };

    let edit_flags = [
        args.rules.is_some(),
        args.wfse.is_some(),
        args.builder.is_some(),
    ];
    if edit_flags.iter().filter(|&&b| b).count() > 1 {
        return Err(Failure::Usage(
            "at most one of --rules, --wfse, or --builder may be given".into(),
        ));
    }
    let builder = args.builder.unwrap_or(BuilderKind::Cp);
    if args.penalty.is_some()
        && args.builder != Some(BuilderKind::Mvp)
        && args.builder != Some(BuilderKind::Hsc)
    {
        return Err(Failure::Usage(
            "--penalty only applies to --builder mvp or hsc".into(),
        ));
    }
    if args.soft.is_some() && args.builder != Some(BuilderKind::Hsc) {
        return Err(Failure::Usage("--soft only applies to --builder hsc".into()));
    }
    if args.matrix.is_some() && args.builder != Some(BuilderKind::Mrp) {
        return Err(Failure::Usage("--matrix only applies to --builder mrp".into()));
    }

    let wfse = if let Some(path) = &args.rules {
        let (m, text) = load_model(path, strict)?;
        let Model::Rules { ap, expr, .. } = expect_kind(m, "rules", path)? else {
            unreachable!("kind checked above");
        };
        inputs.push(record("rules", path, text));
        compile_rules(&expr, ap, CompileOptions::default())
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
    } else if let Some(path) = &args.wfse {
        let (m, text) = load_model(path, strict)?;
        let Model::Wfse(wfse) = expect_kind(m, "wfse", path)? else {
            unreachable!("kind checked above");
        };
        inputs.push(record("wfse", path, text));
        wfse
    } else {
        let ap = ts.ap().iter().cloned();
        match builder {
            BuilderKind::Cp => build_cp(ap).map_err(|e| Failure::Usage(e.to_string()))?,
            BuilderKind::Ps => build_ps(ap).map_err(|e| Failure::Usage(e.to_string()))?,
            BuilderKind::Mvp => {
                let penalty = args.penalty.ok_or_else(|| {
                    Failure::Usage("--builder mvp requires --penalty".into())
                })?;
                build_mvp(ap, penalty).map_err(|e| Failure::Usage(e.to_string()))?
            }
            BuilderKind::Mrp => {
                let path = args.matrix.as_ref().ok_or_else(|| {
                    Failure::Usage("--builder mrp requires --matrix".into())
                })?;
                let (m, text) = load_model(path, strict)?;
                let Model::CostMatrix(matrix) = expect_kind(m, "cost-matrix", path)? else {
                    unreachable!("kind checked above");
                };
                inputs.push(record("matrix", path, text));
                build_mrp(&matrix).map_err(|e| Failure::Usage(e.to_string()))?
            }
            BuilderKind::Hsc => {
                let penalty = args.penalty.ok_or_else(|| {
                    Failure::Usage("--builder hsc requires --penalty".into())
                })?;
                let path = args.soft.as_ref().ok_or_else(|| {
                    Failure::Usage("--builder hsc requires --soft".into())
                })?;
                let (m, text) = load_model(path, strict)?;
                let Model::Dfa(soft) = expect_kind(m, "dfa", path)? else {
                    unreachable!("kind checked above");
                };
                inputs.push(record("soft", path, text));
                build_hsc(&soft, penalty).map_err(|e| Failure::Usage(e.to_string()))?
            }
        }
    };

    Ok(LoadedInstance {
        ts,
        spec,
        wfse,
        inputs,
    })
}

fn print_plan(result: &relaxplan::PlanResult) {
    if !result.feasible {
        println!(
            "infeasible: {}",
            result.diagnosis.as_deref().unwrap_or("no accepting path")
        );
        return;
    }
    let costs = result.costs.as_ref().expect("feasible plans carry costs");
    let mut line = format!(
        "feasible: task cost {}, length {}",
        costs.task, costs.temporal
    );
    if let Some(r) = &result.relaxation {
        line.push_str(&format!(", deadline extension {}", r.ltr()));
    }
    println!("{line}");
    println!("trajectory: {}", result.trajectory.join(" "));
    for op in &result.edits {
        use relaxplan::EditKind::*;
        let what = match &op.kind {
            Substitution { executed, required } => {
                format!("substituted {executed} for required {required}")
            }
            Insertion { executed } => format!("inserted {executed}"),
            Deletion { required } => format!("dropped required {required}"),
        };
        println!("edit at step {}: {what} (weight {})", op.step, op.weight);
    }
}

fn run_plan(args: PlanArgs, start: Instant) -> Result<(), Failure> {
    let inst = load_instance(&args.model)?;
    let combiner = args.model.combine.combiner();
    let result = match (&inst.spec, args.lambda) {
        (SpecSide::Dfa(_), Some(_)) => {
            return Err(Failure::Usage(
                "--lambda requires a --twtl specification".into(),
            ))
        }
        (SpecSide::Dfa(dfa), None) => plan(&inst.ts, dfa, &inst.wfse, combiner),
        (SpecSide::Formula(f), None) => {
            let default_edit = args.model.rules.is_none()
                && args.model.wfse.is_none()
                && args.model.builder.is_none();
            if default_edit {
                plan_temporal(&inst.ts, f)
            } else {
                plan_bi(&inst.ts, f, &inst.wfse, combiner, 1.0)
            }
        }
        (SpecSide::Formula(f), Some(lambda)) => {
            plan_bi(&inst.ts, f, &inst.wfse, combiner, lambda)
        }
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;

    print_plan(&result);
    if let Some(out) = &args.out {
        let header = ReportHeader {
            verb: "plan",
            combiner: Some(args.model.combine.name()),
            lambda: args.lambda,
            wall_clock_ms: start.elapsed().as_millis(),
            inputs: &inst.inputs,
        };
        write_atomic(out, report::plan_report(&header, &result).as_bytes())?;
    }
    if result.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn run_pareto(args: ParetoArgs, start: Instant) -> Result<(), Failure> {
    let inst = load_instance(&args.model)?;
    let combiner = args.model.combine.combiner();
    let SpecSide::Formula(formula) = &inst.spec else {
        return Err(Failure::Usage(
            "the pareto verb requires a --twtl specification".into(),
        ));
    };
    let front =
        pareto(&inst.ts, formula, &inst.wfse, combiner).map_err(|e| Failure::Usage(e.to_string()))?;

    if front.is_empty() {
        println!(
            "infeasible: {}",
            front.diagnosis.as_deref().unwrap_or("no accepting path")
        );
    } else {
        println!("front has {} entries", front.entries.len());
        for e in &front.entries {
            let c = e.plan.costs.as_ref().expect("front entries are feasible");
            println!(
                "lambda in [{}, {}]: task cost {}, length {}",
                e.lambda_lo, e.lambda_hi, c.task, c.temporal
            );
        }
    }

    if let Some(out) = &args.out {
        let header = ReportHeader {
            verb: "pareto",
            combiner: Some(args.model.combine.name()),
            lambda: None,
            wall_clock_ms: start.elapsed().as_millis(),
            inputs: &inst.inputs,
        };
        write_atomic(out, report::pareto_report(&header, &front).as_bytes())?;
    }
    if let Some(csv_path) = &args.csv {
        let table = render::front_to_csv(&front)
            .map_err(|e| Failure::Usage(format!("csv rendering failed: {e}")))?;
        write_atomic(csv_path, table.as_bytes())?;
    }
    if let Some(svg_path) = &args.svg {
        write_atomic(svg_path, render::front_to_svg(&front).as_bytes())?;
    }
    if front.is_empty() {
        Err(Failure::Infeasible)
    } else {
        Ok(())
    }
}

fn run_compile(args: CompileArgs) -> Result<(), Failure> {
    let strict = strict_mode();
    match (&args.rules, &args.twtl) {
        (Some(path), None) => {
            let (m, _) = load_model(path, strict)?;
            let Model::Rules { ap, expr, .. } = expect_kind(m, "rules", path)? else {
                unreachable!("kind checked above");
            };
            let wfse = compile_rules(&expr, ap, CompileOptions::default())
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            println!(
                "compiled edit system with {} states and {} transitions",
                wfse.len(),
                wfse.transitions().len()
            );
            if let Some(dot) = &args.dot {
                write_atomic(dot, render::wfse_to_dot(&wfse).as_bytes())?;
            }
            let out_model = Model::Wfse(wfse);
            write_atomic(&args.out, model_to_toml(&out_model).as_bytes())?;
            Ok(())
        }
        (None, Some(path)) => {
            let (m, _) = load_model(path, strict)?;
            let Model::Twtl { ap, formula, .. } = expect_kind(m, "twtl", path)? else {
                unreachable!("kind checked above");
            };
            let (dfa, note) = if args.annotated {
                let annotated = twtl_to_annotated_dfa(&formula, ap)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let deadlines: Vec<String> = annotated
                    .deadlines()
                    .iter()
                    .map(u32::to_string)
                    .collect();
                let note = format!(
                    "# deadline-free automaton; original window deadlines: [{}]\n",
                    deadlines.join(", ")
                );
                (annotated.dfa().clone(), note)
            } else {
                let dfa = twtl_to_dfa(&formula, ap)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                (dfa, String::new())
            };
            println!("compiled automaton with {} states", dfa.len());
            if let Some(dot) = &args.dot {
                write_atomic(dot, render::dfa_to_dot(&dfa).as_bytes())?;
            }
            let text = format!("{note}{}", model_to_toml(&Model::Dfa(dfa)));
            write_atomic(&args.out, text.as_bytes())?;
            Ok(())
        }
        _ => Err(Failure::Usage(
            "exactly one of --rules or --twtl is required".into(),
        )),
    }
}

fn run_certify(args: CertifyArgs) -> Result<(), Failure> {
    let inst = load_instance(&args.model)?;
    let combiner = args.model.combine.combiner();
    let dfa = match &inst.spec {
        SpecSide::Dfa(dfa) => dfa.clone(),
        SpecSide::Formula(f) => twtl_to_dfa(f, inst.ts.ap().iter().cloned())
            .map_err(|e| Failure::Usage(e.to_string()))?,
    };
    let budget = OracleBudget {
        max_trajectory_len: args.max_trajectory_len,
        max_spec_len: args.max_spec_len,
        max_candidates: args.max_candidates,
    };

    let result =
        plan(&inst.ts, &dfa, &inst.wfse, combiner).map_err(|e| Failure::Usage(e.to_string()))?;
    let brute = match brute_force_plan(&inst.ts, &dfa, &inst.wfse, combiner, budget) {
        Ok(b) => b,
        Err(OracleError::BudgetExceeded(m)) => return Err(Failure::Budget(m)),
    };

    let bias: f64 = std::env::var("RELAXPLAN_CERTIFY_BIAS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0.0);

    match (&result.costs, &brute) {
        (None, None) => {
            println!("planner: infeasible");
            println!("enumeration: no witness");
            println!("agreement: both infeasible");
            Ok(())
        }
        (Some(c), _)
            if result.trajectory.len() > budget.max_trajectory_len
                || result.spec_word.len() > budget.max_spec_len =>
        {
            Err(Failure::Budget(format!(
                "planner optimum (cost {}) uses {} states and {} specification symbols, beyond \
                 the enumeration bounds; raise --max-trajectory-len or --max-spec-len",
                c.task,
                result.trajectory.len(),
                result.spec_word.len()
            )))
        }
        (Some(c), Some(w)) => {
            let planner_cost = c.task + bias;
            println!("planner: cost {planner_cost}");
            println!("enumeration: cost {}", w.cost);
            if (planner_cost - w.cost).abs() <= 1e-9 {
                println!("agreement: costs match within 1e-9");
                Ok(())
            } else {
                Err(Failure::Disagree(format!(
                    "planner found {planner_cost} but enumeration found {}",
                    w.cost
                )))
            }
        }
        (None, Some(w)) => Err(Failure::Disagree(format!(
            "planner reported infeasible but enumeration found cost {}",
            w.cost
        ))),
        (Some(c), None) => Err(Failure::Disagree(format!(
            "planner found cost {} but enumeration found no witness within the budget",
            c.task + bias
        ))),
    }
}
