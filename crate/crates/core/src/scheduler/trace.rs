//! Textual trace lines and golden-trace replay.
//!
//! A step line reads `step  RULE  subject[→object]  energy  hash`; the last
//! line is `outcome NAME`. Blank lines, `#` comments and indented lines
//! (printed terms) are ignored when parsing.

use std::fmt::Write;

use thiserror::Error;

use super::{run, Hint, Mode, Outcome, RunConfig, SchedulerError, Trace};
use crate::engine::{Rule, StepLabel};
use crate::network::{Network, SensorId};
use crate::num::Amount;

pub fn format_step(step: usize, label: &StepLabel, hash: u64) -> String {
    let r = &label.redex;
    let mut who = r.subject.to_string();
    if let Some(o) = &r.object {
        let _ = write!(who, "→{o}");
    }
    format!("{step}  {}  {who}  {}  {hash:016x}", r.rule, label.energy)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenLine {
    pub step: usize,
    pub rule: Rule,
    pub subject: SensorId,
    pub object: Option<SensorId>,
    pub energy: Amount,
    /// `-` in the file leaves the hash unchecked.
    pub hash: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldenTrace {
    pub lines: Vec<GoldenLine>,
    pub outcome: Option<Outcome>,
}

impl GoldenTrace {
    pub fn hints(&self) -> Vec<Hint> {
        self.lines
            .iter()
            .map(|l| Hint {
                rule: l.rule,
                subject: Some(l.subject.clone()),
                object: l.object.clone(),
                hash: l.hash,
            })
            .collect()
    }
}

pub fn parse_trace(text: &str) -> Result<GoldenTrace, TraceParseError> {
    let mut trace = GoldenTrace::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let err = |message: String| TraceParseError { line, message };
        if raw.starts_with(char::is_whitespace) {
            continue;
        }
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if trace.outcome.is_some() {
            return Err(err("content after the outcome line".into()));
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields[0] == "outcome" {
            let name = fields.get(1).ok_or_else(|| err("missing outcome name".into()))?;
            trace.outcome = Some(Outcome::from_name(name).ok_or_else(|| err(format!("unknown outcome `{name}`")))?);
            continue;
        }
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let step: usize = fields[0].parse().map_err(|_| err(format!("bad step number `{}`", fields[0])))?;
        if step != trace.lines.len() + 1 {
            return Err(err(format!("expected step {}, found {step}", trace.lines.len() + 1)));
        }
        let rule = Rule::from_name(fields[1]).ok_or_else(|| err(format!("unknown rule `{}`", fields[1])))?;
        let who = fields[2].replace("->", "→");
        let (subject, object) = match who.split_once('→') {
            Some((s, o)) => (SensorId::new(s), Some(SensorId::new(o))),
            None => (SensorId::new(who.as_str()), None),
        };
        let energy: Amount = fields[3].parse().map_err(|e| err(format!("bad energy `{}`: {e}", fields[3])))?;
        let hash = match fields[4] {
            "-" => None,
            h => Some(u64::from_str_radix(h, 16).map_err(|_| err(format!("bad hash `{h}`")))?),
        };
        trace.lines.push(GoldenLine {
            step,
            rule,
            subject,
            object,
            energy,
            hash,
        });
    }
    Ok(trace)
}

#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub trace: Trace,
    /// Human-readable differences; empty when the replay matches.
    pub diffs: Vec<String>,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.diffs.is_empty()
    }
}

/// Replays a golden trace and compares energies, hashes and the outcome.
pub fn replay(net: &Network, golden: &GoldenTrace, cfg: &RunConfig) -> Result<ReplayReport, SchedulerError> {
    let cfg = RunConfig {
        mode: Mode::Scripted(golden.hints()),
        ..cfg.clone()
    };
    let trace = run(net, &cfg)?;
    let mut diffs = Vec::new();
    for (g, s) in golden.lines.iter().zip(&trace.steps) {
        if g.energy != s.label.energy {
            diffs.push(format!("step {}: energy {} expected {}", g.step, s.label.energy, g.energy));
        }
        if let Some(h) = g.hash {
            if h != s.hash {
                diffs.push(format!("step {}: hash {:016x} expected {h:016x}", g.step, s.hash));
            }
        }
    }
    if let Some(o) = golden.outcome {
        if o != trace.outcome {
            diffs.push(format!("outcome {} expected {o}", trace.outcome));
        }
    }
    Ok(ReplayReport { trace, diffs })
}
