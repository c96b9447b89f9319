//! Model files: one automaton or formula per TOML document, with a declared
//! kind and format version. Loading validates eagerly and reports the file
//! and offending field; saving emits a canonical form that reloads to the
//! same model byte-for-byte.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use toml::value::{Table, Value};

use relaxplan::rules::RuleExpr;
use relaxplan::{
    parse_rules, parse_twtl, ApSymbol, EditSymbol, EditSystem, SpecDfa, SubstitutionCostMatrix,
    TransitionSystem, TwtlFormula,
};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Bad { path: String, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn bad(path: &Path, message: impl Into<String>) -> ModelError {
    ModelError::Bad {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    TransitionSystem(TransitionSystem),
    Dfa(SpecDfa),
    Wfse(EditSystem),
    Rules {
        ap: Vec<String>,
        text: String,
        expr: RuleExpr,
    },
    Twtl {
        ap: Vec<String>,
        text: String,
        formula: TwtlFormula,
    },
    CostMatrix(SubstitutionCostMatrix),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::TransitionSystem(_) => "transition-system",
            Model::Dfa(_) => "dfa",
            Model::Wfse(_) => "wfse",
            Model::Rules { .. } => "rules",
            Model::Twtl { .. } => "twtl",
            Model::CostMatrix(_) => "cost-matrix",
        }
    }
}

pub fn parse_symbol(text: &str, path: &Path, ctx: &str) -> Result<ApSymbol, ModelError> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| bad(path, format!("{ctx}: symbol {text:?} is not brace-delimited")))?;
    let props: Vec<&str> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    ApSymbol::new(props).map_err(|e| bad(path, format!("{ctx}: {e}")))
}

fn parse_edit_symbol(text: &str, path: &Path, ctx: &str) -> Result<EditSymbol, ModelError> {
    if text == "eps" {
        Ok(EditSymbol::Epsilon)
    } else {
        Ok(EditSymbol::Sym(parse_symbol(text, path, ctx)?))
    }
}

/// Rejects keys outside `allowed` when strict parsing is on.
fn check_keys(
    t: &Table,
    allowed: &[&str],
    path: &Path,
    ctx: &str,
    strict: bool,
) -> Result<(), ModelError> {
    if !strict {
        return Ok(());
    }
    for key in t.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(bad(path, format!("{ctx}: unknown key {key:?} in strict mode")));
        }
    }
    Ok(())
}

fn str_field<'v>(t: &'v Table, key: &str, path: &Path, ctx: &str) -> Result<&'v str, ModelError> {
    t.get(key)
        .ok_or_else(|| bad(path, format!("{ctx}: missing key {key:?}")))?
        .as_str()
        .ok_or_else(|| bad(path, format!("{ctx}: key {key:?} must be a string")))
}

fn float_field(t: &Table, key: &str, path: &Path, ctx: &str) -> Result<f64, ModelError> {
    match t.get(key) {
        Some(Value::Float(f)) => Ok(*f),
        Some(Value::Integer(i)) => Ok(*i as f64),
        Some(_) => Err(bad(path, format!("{ctx}: key {key:?} must be a number"))),
        None => Err(bad(path, format!("{ctx}: missing key {key:?}"))),
    }
}

fn string_array(t: &Table, key: &str, path: &Path, ctx: &str) -> Result<Vec<String>, ModelError> {
    let v = t
        .get(key)
        .ok_or_else(|| bad(path, format!("{ctx}: missing key {key:?}")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| bad(path, format!("{ctx}: key {key:?} must be an array")))?;
    arr.iter()
        .map(|x| {
            x.as_str()
                .map(str::to_owned)
                .ok_or_else(|| bad(path, format!("{ctx}: key {key:?} must hold strings")))
        })
        .collect()
}

fn table_array<'v>(
    t: &'v Table,
    key: &str,
    path: &Path,
    ctx: &str,
) -> Result<Vec<&'v Table>, ModelError> {
    match t.get(key) {
        None => Ok(Vec::new()),
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or_else(|| bad(path, format!("{ctx}: key {key:?} must be an array of tables")))?;
            arr.iter()
                .map(|x| {
                    x.as_table().ok_or_else(|| {
                        bad(path, format!("{ctx}: key {key:?} must hold tables"))
                    })
                })
                .collect()
        }
    }
}

pub fn parse_model(text: &str, path: &Path, strict: bool) -> Result<Model, ModelError> {
    let root: Value = text
        .parse()
        .map_err(|e| bad(path, format!("not valid TOML: {e}")))?;
    let t = root
        .as_table()
        .ok_or_else(|| bad(path, "top level must be a table"))?;

    match t.get("format_version").and_then(Value::as_integer) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(bad(path, format!("unsupported format_version {v}"))),
        None => return Err(bad(path, "missing integer key \"format_version\"")),
    }
    let kind = str_field(t, "kind", path, "top level")?;

    match kind {
        "transition-system" => {
            check_keys(
                t,
                &["format_version", "kind", "ap", "initial", "state", "transition"],
                path,
                "top level",
                strict,
            )?;
            let ap = string_array(t, "ap", path, "top level")?;
            let initial = str_field(t, "initial", path, "top level")?;
            let mut ts = TransitionSystem::new(ap, initial);
            for (i, st) in table_array(t, "state", path, "top level")?.iter().enumerate() {
                let ctx = format!("state #{}", i + 1);
                check_keys(st, &["name", "label"], path, &ctx, strict)?;
                let name = str_field(st, "name", path, &ctx)?;
                let label = string_array(st, "label", path, &ctx)?;
                let label = ApSymbol::new(label).map_err(|e| bad(path, format!("{ctx}: {e}")))?;
                ts.add_state(name, label);
            }
            for (i, tr) in table_array(t, "transition", path, "top level")?.iter().enumerate() {
                let ctx = format!("transition #{}", i + 1);
                check_keys(tr, &["from", "to", "weight"], path, &ctx, strict)?;
                let from = str_field(tr, "from", path, &ctx)?;
                let to = str_field(tr, "to", path, &ctx)?;
                let weight = tr
                    .get("weight")
                    .and_then(Value::as_integer)
                    .ok_or_else(|| bad(path, format!("{ctx}: missing integer key \"weight\"")))?;
                let weight = u64::try_from(weight)
                    .map_err(|_| bad(path, format!("{ctx}: weight must be nonnegative")))?;
                ts.add_transition(from, to, weight);
            }
            Ok(Model::TransitionSystem(ts))
        }
        "dfa" => {
            check_keys(
                t,
                &["format_version", "kind", "ap", "initial", "accepting", "transition"],
                path,
                "top level",
                strict,
            )?;
            let ap = string_array(t, "ap", path, "top level")?;
            let initial = str_field(t, "initial", path, "top level")?;
            let mut dfa = SpecDfa::new(ap, initial);
            for (i, tr) in table_array(t, "transition", path, "top level")?.iter().enumerate() {
                let ctx = format!("transition #{}", i + 1);
                check_keys(tr, &["from", "symbol", "to"], path, &ctx, strict)?;
                let from = str_field(tr, "from", path, &ctx)?;
                let symbol = parse_symbol(str_field(tr, "symbol", path, &ctx)?, path, &ctx)?;
                let to = str_field(tr, "to", path, &ctx)?;
                dfa.add_transition(from, symbol, to);
            }
            for name in string_array(t, "accepting", path, "top level")? {
                dfa.mark_accepting(name);
            }
            Ok(Model::Dfa(dfa))
        }
        "wfse" => {
            check_keys(
                t,
                &[
                    "format_version",
                    "kind",
                    "ap",
                    "initial",
                    "accepting",
                    "final_weight",
                    "transition",
                ],
                path,
                "top level",
                strict,
            )?;
            let ap = string_array(t, "ap", path, "top level")?;
            let initial = str_field(t, "initial", path, "top level")?;
            let mut wfse = EditSystem::new(ap, initial);
            for (i, tr) in table_array(t, "transition", path, "top level")?.iter().enumerate() {
                let ctx = format!("transition #{}", i + 1);
                check_keys(tr, &["from", "exec", "spec", "weight", "to"], path, &ctx, strict)?;
                let from = str_field(tr, "from", path, &ctx)?;
                let exec = parse_edit_symbol(str_field(tr, "exec", path, &ctx)?, path, &ctx)?;
                let spec = parse_edit_symbol(str_field(tr, "spec", path, &ctx)?, path, &ctx)?;
                if exec.is_epsilon() && spec.is_epsilon() {
                    return Err(bad(path, format!("{ctx}: exec and spec cannot both be eps")));
                }
                let weight = float_field(tr, "weight", path, &ctx)?;
                let to = str_field(tr, "to", path, &ctx)?;
                wfse.add_transition(from, exec, spec, weight, to);
            }
            for name in string_array(t, "accepting", path, "top level")? {
                wfse.mark_accepting(name);
            }
            for (i, fw) in table_array(t, "final_weight", path, "top level")?.iter().enumerate() {
                let ctx = format!("final_weight #{}", i + 1);
                check_keys(fw, &["state", "weight"], path, &ctx, strict)?;
                let state = str_field(fw, "state", path, &ctx)?;
                let weight = float_field(fw, "weight", path, &ctx)?;
                wfse.set_final_weight(state, weight);
            }
            Ok(Model::Wfse(wfse))
        }
        "rules" => {
            check_keys(
                t,
                &["format_version", "kind", "ap", "rules"],
                path,
                "top level",
                strict,
            )?;
            let ap = string_array(t, "ap", path, "top level")?;
            let text = str_field(t, "rules", path, "top level")?.to_owned();
            let expr = parse_rules(&text).map_err(|e| bad(path, format!("rules: {e}")))?;
            Ok(Model::Rules { ap, text, expr })
        }
        "twtl" => {
            check_keys(
                t,
                &["format_version", "kind", "ap", "formula"],
                path,
                "top level",
                strict,
            )?;
            let text = str_field(t, "formula", path, "top level")?.to_owned();
            let formula = parse_twtl(&text).map_err(|e| bad(path, format!("formula: {e}")))?;
            let ap = if t.contains_key("ap") {
                string_array(t, "ap", path, "top level")?
            } else {
                formula.props().into_iter().collect()
            };
            let declared: BTreeSet<&str> = ap.iter().map(String::as_str).collect();
            for p in formula.props() {
                if !declared.contains(p.as_str()) {
                    return Err(bad(
                        path,
                        format!("formula mentions {p:?}, which is not in the declared ap set"),
                    ));
                }
            }
            Ok(Model::Twtl { ap, text, formula })
        }
        "cost-matrix" => {
            check_keys(
                t,
                &["format_version", "kind", "ap", "entry"],
                path,
                "top level",
                strict,
            )?;
            let ap = string_array(t, "ap", path, "top level")?;
            let mut m = SubstitutionCostMatrix::new(ap);
            for (i, en) in table_array(t, "entry", path, "top level")?.iter().enumerate() {
                let ctx = format!("entry #{}", i + 1);
                check_keys(en, &["from", "to", "cost"], path, &ctx, strict)?;
                let from = parse_symbol(str_field(en, "from", path, &ctx)?, path, &ctx)?;
                let to = parse_symbol(str_field(en, "to", path, &ctx)?, path, &ctx)?;
                let cost = float_field(en, "cost", path, &ctx)?;
                m.set(from, to, cost)
                    .map_err(|e| bad(path, format!("{ctx}: {e}")))?;
            }
            Ok(Model::CostMatrix(m))
        }
        other => Err(bad(
            path,
            format!(
                "unknown kind {other:?} (expected transition-system, dfa, wfse, rules, twtl, or cost-matrix)"
            ),
        )),
    }
}

pub fn load_model(path: &Path, strict: bool) -> Result<(Model, String), ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(path, format!("cannot read: {e}")))?;
    let model = parse_model(&text, path, strict)?;
    Ok((model, text))
}

fn push_ap(out: &mut String, ap: &BTreeSet<String>) {
    let quoted: Vec<String> = ap.iter().map(|p| format!("{p:?}")).collect();
    let _ = writeln!(out, "ap = [{}]", quoted.join(", "));
}

/// Canonical text form: stable key order, stable float formatting, one
/// transition per table. Reloading the output reproduces the model, and
/// saving again reproduces the bytes.
pub fn model_to_toml(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "kind = {:?}", model.kind());
    match model {
        Model::TransitionSystem(ts) => {
            push_ap(&mut out, ts.ap());
            let _ = writeln!(out, "initial = {:?}", ts.initial());
            for name in ts.states() {
                let label: Vec<String> = ts
                    .label(name)
                    .expect("listed states carry labels")
                    .props()
                    .map(|p| format!("{p:?}"))
                    .collect();
                let _ = writeln!(out, "\n[[state]]");
                let _ = writeln!(out, "name = {name:?}");
                let _ = writeln!(out, "label = [{}]", label.join(", "));
            }
            for (from, to, weight) in ts.transitions() {
                let _ = writeln!(out, "\n[[transition]]");
                let _ = writeln!(out, "from = {from:?}");
                let _ = writeln!(out, "to = {to:?}");
                let _ = writeln!(out, "weight = {weight}");
            }
        }
        Model::Dfa(dfa) => {
            push_ap(&mut out, dfa.ap());
            let _ = writeln!(out, "initial = {:?}", dfa.initial());
            let accepting: Vec<String> = dfa.accepting().map(|s| format!("{s:?}")).collect();
            let _ = writeln!(out, "accepting = [{}]", accepting.join(", "));
            for (from, symbol, to) in dfa.transitions() {
                let _ = writeln!(out, "\n[[transition]]");
                let _ = writeln!(out, "from = {from:?}");
                let _ = writeln!(out, "symbol = \"{symbol}\"");
                let _ = writeln!(out, "to = {to:?}");
            }
        }
        Model::Wfse(wfse) => {
            push_ap(&mut out, wfse.ap());
            let _ = writeln!(out, "initial = {:?}", wfse.initial());
            let accepting: Vec<String> = wfse.accepting().map(|s| format!("{s:?}")).collect();
            let _ = writeln!(out, "accepting = [{}]", accepting.join(", "));
            for (state, weight) in wfse.final_weights() {
                if weight != 0.0 {
                    let _ = writeln!(out, "\n[[final_weight]]");
                    let _ = writeln!(out, "state = {state:?}");
                    let _ = writeln!(out, "weight = {weight:?}");
                }
            }
            for tr in wfse.transitions() {
                let _ = writeln!(out, "\n[[transition]]");
                let _ = writeln!(out, "from = {:?}", tr.from);
                let _ = writeln!(out, "exec = \"{}\"", tr.exec);
                let _ = writeln!(out, "spec = \"{}\"", tr.spec);
                let _ = writeln!(out, "weight = {:?}", tr.weight);
                let _ = writeln!(out, "to = {:?}", tr.to);
            }
        }
        Model::Rules { ap, text, .. } => {
            let quoted: Vec<String> = ap.iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(out, "ap = [{}]", quoted.join(", "));
            let _ = writeln!(out, "rules = {text:?}");
        }
        Model::Twtl { ap, text, .. } => {
            let quoted: Vec<String> = ap.iter().map(|p| format!("{p:?}")).collect();
            let _ = writeln!(out, "ap = [{}]", quoted.join(", "));
            let _ = writeln!(out, "formula = {text:?}");
        }
        Model::CostMatrix(m) => {
            push_ap(&mut out, m.ap());
            for (from, to, cost) in m.entries() {
                let _ = writeln!(out, "\n[[entry]]");
                let _ = writeln!(out, "from = \"{from}\"");
                let _ = writeln!(out, "to = \"{to}\"");
                let _ = writeln!(out, "cost = {cost:?}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path() -> std::path::PathBuf {
        std::path::PathBuf::from("test.toml")
    }

    #[test]
    fn transition_system_round_trips_canonically() {
        let text = r#"
format_version = 1
kind = "transition-system"
ap = ["a"]
initial = "x0"

[[state]]
name = "x0"
label = []

[[state]]
name = "x1"
label = ["a"]

[[transition]]
from = "x0"
to = "x1"
weight = 2
"#;
        let m = parse_model(text, &path(), true).unwrap();
        let first = model_to_toml(&m);
        let reparsed = parse_model(&first, &path(), true).unwrap();
        assert_eq!(model_to_toml(&reparsed), first);
    }

    #[test]
    fn strict_mode_rejects_unknown_keys() {
        let text = r#"
format_version = 1
kind = "twtl"
formula = "H^1 a"
comment = "oops"
"#;
        assert!(parse_model(text, &path(), false).is_ok());
        let err = parse_model(text, &path(), true).unwrap_err();
        assert!(err.to_string().contains("comment"));
    }

    #[test]
    fn wrong_version_is_refused() {
        let text = "format_version = 2\nkind = \"twtl\"\nformula = \"H^1 a\"\n";
        let err = parse_model(text, &path(), false).unwrap_err();
        assert!(err.to_string().contains("format_version"));
    }

    #[test]
    fn formula_props_must_be_declared() {
        let text = "format_version = 1\nkind = \"twtl\"\nap = [\"b\"]\nformula = \"H^1 a\"\n";
        let err = parse_model(text, &path(), false).unwrap_err();
        assert!(err.to_string().contains("not in the declared ap set"));
    }

    #[test]
    fn epsilon_pair_is_rejected() {
        let text = r#"
format_version = 1
kind = "wfse"
ap = ["a"]
initial = "z0"
accepting = ["z0"]

[[transition]]
from = "z0"
exec = "eps"
spec = "eps"
weight = 1.0
to = "z0"
"#;
        let err = parse_model(text, &path(), false).unwrap_err();
        assert!(err.to_string().contains("both be eps"));
    }

    #[test]
    fn wfse_round_trips_with_final_weights() {
        let text = r#"
format_version = 1
kind = "wfse"
ap = ["a"]
initial = "z0"
accepting = ["z0", "z1"]

[[final_weight]]
state = "z1"
weight = 2.5

[[transition]]
from = "z0"
exec = "{a}"
spec = "eps"
weight = 1.5
to = "z1"
"#;
        let m = parse_model(text, &path(), true).unwrap();
        let first = model_to_toml(&m);
        assert!(first.contains("weight = 2.5"));
        let reparsed = parse_model(&first, &path(), true).unwrap();
        assert_eq!(model_to_toml(&reparsed), first);
    }
}
