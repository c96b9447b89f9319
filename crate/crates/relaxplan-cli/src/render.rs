//! Plain-text exports: CSV for front tables, DOT for automata, and a small
//! hand-written SVG plotter for the front itself. Everything here is
//! deterministic: same input, same bytes.

use std::fmt::Write as _;

use relaxplan::{EditSystem, ParetoFront, SpecDfa};

/// One row per front entry: the blend interval, both costs, and the
/// trajectory as a space-separated state list.
pub fn front_to_csv(front: &ParetoFront) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda_lo", "lambda_hi", "C_E", "C_TR", "trajectory"])?;
    for entry in &front.entries {
        let costs = entry
            .plan
            .costs
            .as_ref()
            .expect("front entries are feasible plans");
        w.write_record([
            entry.lambda_lo.to_string(),
            entry.lambda_hi.to_string(),
            costs.task.to_string(),
            costs.temporal.to_string(),
            entry.plan.trajectory.join(" "),
        ])?;
    }
    let bytes = w.into_inner().expect("writing to a Vec cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.max_x - self.min_x).max(1e-12);
        self.x0 + (v - self.min_x) / span * self.w
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.max_y - self.min_y).max(1e-12);
        self.y0 + self.h - (v - self.min_y) / span * self.h
    }
}

fn axes(out: &mut String, f: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"  <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        f.x0, f.y0, f.w, f.h
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{title}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 - 8.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{xlabel}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 24.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
        f.x0 - 26.0,
        f.y0 + f.h / 2.0,
        f.x0 - 26.0,
        f.y0 + f.h / 2.0
    );
    for (v, frac) in [(f.min_x, 0.0), (f.max_x, 1.0)] {
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{v:.3}</text>"#,
            f.x0 + frac * f.w,
            f.y0 + f.h + 12.0
        );
    }
    for (v, frac) in [(f.min_y, 0.0), (f.max_y, 1.0)] {
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" text-anchor="end" font-size="9">{v:.3}</text>"#,
            f.x0 - 4.0,
            f.y0 + f.h - frac * f.h + 3.0
        );
    }
}

/// Two panels: the blended cost as a function of the blend parameter (one
/// straight segment per front entry, jointly the lower envelope), and the
/// front itself as cost pairs.
pub fn front_to_svg(front: &ParetoFront) -> String {
    let pairs: Vec<(f64, f64, f64, u64)> = front
        .entries
        .iter()
        .map(|e| {
            let c = e.plan.costs.as_ref().expect("front entries are feasible");
            (e.lambda_lo, e.lambda_hi, c.task, c.temporal)
        })
        .collect();
    let blend = |lambda: f64, task: f64, temporal: u64| {
        lambda * task + (1.0 - lambda) * temporal as f64
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="320" viewBox="0 0 640 320">"#
    );
    let _ = writeln!(out, r#"  <rect width="640" height="320" fill="white"/>"#);

    if !pairs.is_empty() {
        let mut vals: Vec<f64> = Vec::new();
        for &(lo, hi, task, temporal) in &pairs {
            vals.push(blend(lo, task, temporal));
            vals.push(blend(hi, task, temporal));
        }
        let min_v = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_v = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let env = Frame {
            x0: 50.0,
            y0: 40.0,
            w: 240.0,
            h: 220.0,
            min_x: 0.0,
            max_x: 1.0,
            min_y: min_v,
            max_y: max_v,
        };
        axes(&mut out, &env, "blended cost", "lambda", "cost");
        for &(lo, hi, task, temporal) in &pairs {
            let _ = writeln!(
                out,
                r#"  <line class="segment" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="2"/>"#,
                env.x(lo),
                env.y(blend(lo, task, temporal)),
                env.x(hi),
                env.y(blend(hi, task, temporal))
            );
        }

        let min_t = pairs.iter().map(|p| p.3).min().expect("non-empty") as f64;
        let max_t = pairs.iter().map(|p| p.3).max().expect("non-empty") as f64;
        let min_e = pairs.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
        let max_e = pairs.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        let scatter = Frame {
            x0: 360.0,
            y0: 40.0,
            w: 240.0,
            h: 220.0,
            min_x: min_t,
            max_x: max_t,
            min_y: min_e,
            max_y: max_e,
        };
        axes(&mut out, &scatter, "front", "length", "task cost");
        for &(_, _, task, temporal) in &pairs {
            let _ = writeln!(
                out,
                r#"  <circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#,
                scatter.x(temporal as f64),
                scatter.y(task)
            );
        }
    } else {
        let _ = writeln!(
            out,
            r#"  <text x="320" y="160" text-anchor="middle" font-size="12">no feasible plans</text>"#
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}

pub fn wfse_to_dot(wfse: &EditSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph wfse {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  start [shape=point];");
    for state in wfse.states() {
        let shape = if wfse.is_accepting(state) {
            "doublecircle"
        } else {
            "circle"
        };
        let fw = wfse.final_weight(state);
        let extra = if wfse.is_accepting(state) && fw != 0.0 {
            format!(", xlabel=\"exit {fw}\"")
        } else {
            String::new()
        };
        let _ = writeln!(out, "  {state:?} [shape={shape}{extra}];");
    }
    let _ = writeln!(out, "  start -> {:?};", wfse.initial());
    for t in wfse.transitions() {
        let _ = writeln!(
            out,
            "  {:?} -> {:?} [label=\"{}/{}, {}\"];",
            t.from, t.to, t.exec, t.spec, t.weight
        );
    }
    let _ = writeln!(out, "}}");
    out
}

pub fn dfa_to_dot(dfa: &SpecDfa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph dfa {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  start [shape=point];");
    for state in dfa.states() {
        let shape = if dfa.is_accepting(state) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(out, "  {state:?} [shape={shape}];");
    }
    let _ = writeln!(out, "  start -> {:?};", dfa.initial());
    for (from, symbol, to) in dfa.transitions() {
        let _ = writeln!(out, "  {from:?} -> {to:?} [label=\"{symbol}\"];");
    }
    let _ = writeln!(out, "}}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use relaxplan::build_cp;

    #[test]
    fn empty_front_still_renders() {
        let front = ParetoFront {
            entries: Vec::new(),
            diagnosis: Some("nothing".into()),
        };
        let svg = front_to_svg(&front);
        assert!(svg.contains("no feasible plans"));
        let csv = front_to_csv(&front).unwrap();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn wfse_dot_lists_every_transition() {
        let e = build_cp(["a"]).unwrap();
        let dot = wfse_to_dot(&e);
        assert_eq!(
            dot.matches(" -> ").count(),
            e.transitions().len() + 1,
            "one edge per transition plus the start marker"
        );
    }
}
