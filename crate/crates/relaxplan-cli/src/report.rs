//! Run reports: a TOML document carrying the result plus everything needed
//! to reproduce it (verbatim input texts and their digests). Reports are
//! written atomically, and their bytes depend only on the inputs except for
//! the wall-clock field.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use relaxplan::{EditKind, ParetoFront, PlanResult};

use crate::model::FORMAT_VERSION;

/// One loaded input file, kept verbatim for provenance.
pub struct InputRecord {
    pub role: &'static str,
    pub path: String,
    pub text: String,
}

pub fn sha256_hex(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Temp-and-rename in the destination directory, so a crash never leaves a
/// half-written file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub struct ReportHeader<'a> {
    pub verb: &'a str,
    pub combiner: Option<&'a str>,
    pub lambda: Option<f64>,
    pub wall_clock_ms: u128,
    pub inputs: &'a [InputRecord],
}

fn push_header(out: &mut String, h: &ReportHeader<'_>) {
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "verb = {:?}", h.verb);
    if let Some(c) = h.combiner {
        let _ = writeln!(out, "combiner = {c:?}");
    }
    if let Some(l) = h.lambda {
        let _ = writeln!(out, "lambda = {l:?}");
    }
    let _ = writeln!(out, "wall_clock_ms = {}", h.wall_clock_ms);
    for rec in h.inputs {
        let _ = writeln!(out, "\n[inputs.{}]", rec.role);
        let _ = writeln!(out, "path = {:?}", rec.path);
        let _ = writeln!(out, "sha256 = {:?}", sha256_hex(&rec.text));
        let _ = writeln!(out, "text = {:?}", rec.text);
    }
}

fn push_plan_body(out: &mut String, header: &str, plan: &PlanResult) {
    let _ = writeln!(out, "\n[{header}]");
    let _ = writeln!(out, "feasible = {}", plan.feasible);
    if let Some(d) = &plan.diagnosis {
        let _ = writeln!(out, "diagnosis = {d:?}");
    }
    if let Some(c) = &plan.costs {
        let _ = writeln!(out, "cost_task = {:?}", c.task);
        let _ = writeln!(out, "cost_temporal = {}", c.temporal);
        let _ = writeln!(out, "cost_combined = {:?}", c.combined);
    }
    if let Some(r) = &plan.relaxation {
        let taus: Vec<String> = r.tau.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "tau = [{}]", taus.join(", "));
        let _ = writeln!(out, "ltr = {}", r.ltr());
    }
    if plan.feasible {
        let states: Vec<String> = plan.trajectory.iter().map(|s| format!("{s:?}")).collect();
        let _ = writeln!(out, "trajectory = [{}]", states.join(", "));
        let exec: Vec<String> = plan.exec_word.iter().map(|s| format!("\"{s}\"")).collect();
        let _ = writeln!(out, "exec_word = [{}]", exec.join(", "));
        let spec: Vec<String> = plan.spec_word.iter().map(|s| format!("\"{s}\"")).collect();
        let _ = writeln!(out, "spec_word = [{}]", spec.join(", "));
        for op in &plan.edits {
            let _ = writeln!(out, "\n[[{header}.edit]]");
            let _ = writeln!(out, "step = {}", op.step);
            match &op.kind {
                EditKind::Substitution { executed, required } => {
                    let _ = writeln!(out, "kind = \"substitution\"");
                    let _ = writeln!(out, "executed = \"{executed}\"");
                    let _ = writeln!(out, "required = \"{required}\"");
                }
                EditKind::Insertion { executed } => {
                    let _ = writeln!(out, "kind = \"insertion\"");
                    let _ = writeln!(out, "executed = \"{executed}\"");
                }
                EditKind::Deletion { required } => {
                    let _ = writeln!(out, "kind = \"deletion\"");
                    let _ = writeln!(out, "required = \"{required}\"");
                }
            }
            let _ = writeln!(out, "weight = {:?}", op.weight);
        }
    }
}

pub fn plan_report(header: &ReportHeader<'_>, plan: &PlanResult) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    push_plan_body(&mut out, "result", plan);
    out
}

pub fn pareto_report(header: &ReportHeader<'_>, front: &ParetoFront) -> String {
    let mut out = String::new();
    push_header(&mut out, header);
    if let Some(d) = &front.diagnosis {
        let _ = writeln!(out, "\n[result]");
        let _ = writeln!(out, "feasible = false");
        let _ = writeln!(out, "diagnosis = {d:?}");
    }
    for entry in &front.entries {
        let _ = writeln!(out, "\n[[front]]");
        let _ = writeln!(out, "lambda_lo = {:?}", entry.lambda_lo);
        let _ = writeln!(out, "lambda_hi = {:?}", entry.lambda_hi);
        push_plan_body(&mut out, "front.plan", &entry.plan);
    }
    out
}
