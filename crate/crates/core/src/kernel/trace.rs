use super::{Rule, TraceStep};
use crate::chc::ClauseId;
use std::collections::BTreeSet;

fn ids(xs: &[ClauseId]) -> String {
    xs.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// `STEP <n> <RULE> in=<ids> out=<ids> flags=<flags>`
pub fn render_step(n: usize, s: &TraceStep) -> String {
    let mut flags = Vec::new();
    if s.self_unfolding {
        flags.push("self_unfolding");
    }
    if s.reversible_folding {
        flags.push("reversible");
    }
    let flags = if flags.is_empty() { "-".to_string() } else { flags.join(",") };
    format!("STEP {n} {} in={} out={} flags={flags}", s.rule, ids(&s.inputs), ids(&s.outputs))
}

fn parse_ids(s: &str) -> Result<Vec<ClauseId>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.parse::<u64>().map(ClauseId).map_err(|e| format!("bad clause id {x:?}: {e}"))).collect()
}

/// Reads back the `STEP` lines of a trace log; other lines are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceStep>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        if parts.next() != Some("STEP") {
            continue;
        }
        let err = |m: &str| format!("line {}: {m}", lineno + 1);
        let _n = parts.next().ok_or_else(|| err("missing step number"))?;
        let rule = match parts.next() {
            Some("DEFINE") => Rule::Definition,
            Some("UNFOLD") => Rule::Unfolding,
            Some("FOLD") => Rule::Folding,
            Some("REPLACE") => Rule::ConstraintReplacement,
            other => return Err(err(&format!("unknown rule {other:?}"))),
        };
        let mut step = TraceStep::new(rule);
        for field in parts {
            let (key, val) = field.split_once('=').ok_or_else(|| err(&format!("bad field {field:?}")))?;
            match key {
                "in" => step.inputs = parse_ids(val).map_err(|m| err(&m))?,
                "out" => step.outputs = parse_ids(val).map_err(|m| err(&m))?,
                "flags" => {
                    for f in val.split(',') {
                        match f {
                            "self_unfolding" => step.self_unfolding = true,
                            "reversible" => step.reversible_folding = true,
                            "-" => {}
                            other => return Err(err(&format!("unknown flag {other:?}"))),
                        }
                    }
                }
                other => return Err(err(&format!("unknown field {other:?}"))),
            }
        }
        if rule == Rule::Folding {
            step.def = step.inputs.get(1).copied();
        }
        out.push(step);
    }
    Ok(out)
}

/// Whether every definition introduced in `trace` is unfolded by a later
/// step, with the offending definitions.
pub fn check_all_defs_unfolded(trace: &[TraceStep]) -> (bool, Vec<ClauseId>) {
    let mut missing = Vec::new();
    for (i, s) in trace.iter().enumerate() {
        if s.rule != Rule::Definition {
            continue;
        }
        let defs: BTreeSet<ClauseId> = s.outputs.iter().copied().collect();
        for d in defs {
            let unfolded = trace[i + 1..].iter().any(|t| t.rule == Rule::Unfolding && t.inputs.first() == Some(&d));
            if !unfolded {
                missing.push(d);
            }
        }
    }
    (missing.is_empty(), missing)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    /// Every sequence preserves the existence of definable models forward.
    pub a_sound: bool,
    pub no_self_unfolding: bool,
    pub all_foldings_reversible: bool,
}

impl Classification {
    /// Both syntactic conditions for the backward direction hold.
    pub fn a_complete(&self) -> bool {
        self.no_self_unfolding && self.all_foldings_reversible
    }
}

pub fn classify_sequence(trace: &[TraceStep]) -> Classification {
    Classification {
        a_sound: true,
        no_self_unfolding: !trace.iter().any(|s| s.rule == Rule::Unfolding && s.self_unfolding),
        all_foldings_reversible: trace.iter().filter(|s| s.rule == Rule::Folding).all(|s| s.reversible_folding),
    }
}
