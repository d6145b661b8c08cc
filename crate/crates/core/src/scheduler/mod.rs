//! Drives reduction: seeded random runs, scripted replays and bounded
//! breadth-first exploration.

mod explore;
mod trace;

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::congruence::{canonical_hash, canonical_network};
use crate::engine::{self, enabled_redexes, fire_event, Config, EngineError, Redex, Rule, StepLabel};
use crate::network::{Network, SensorId};

pub use explore::{explore, ExploreReport, StateKey};
pub use trace::{format_step, parse_trace, replay, GoldenLine, GoldenTrace, ReplayReport, TraceParseError};

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("step {step}: no enabled redex matches {hint}; enabled: {enabled}")]
    ScriptMismatch { step: usize, hint: String, enabled: String },
    #[error("step {step}: {hint} matches redexes with different results")]
    Ambiguous { step: usize, hint: String },
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// One expected step of a scripted run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hint {
    pub rule: Rule,
    pub subject: Option<SensorId>,
    pub object: Option<SensorId>,
    /// Canonical hash of the resulting term, used to disambiguate.
    pub hash: Option<u64>,
}

impl Hint {
    pub fn new(rule: Rule, subject: &str) -> Self {
        Hint {
            rule,
            subject: Some(SensorId::new(subject)),
            object: None,
            hash: None,
        }
    }

    pub fn to(mut self, object: &str) -> Self {
        self.object = Some(SensorId::new(object));
        self
    }

    fn matches(&self, r: &Redex) -> bool {
        r.rule == self.rule
            && self.subject.as_ref().is_none_or(|s| *s == r.subject)
            && self.object.as_ref().is_none_or(|o| Some(o) == r.object.as_ref())
    }
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if let Some(s) = &self.subject {
            write!(f, " {s}")?;
        }
        if let Some(o) = &self.object {
            write!(f, "→{o}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Random { seed: u64 },
    Scripted(Vec<Hint>),
    Exhaustive { max_depth: usize, max_states: usize },
}

/// An event fired on a sensor just before the given step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledEvent {
    pub step: u64,
    pub sensor: SensorId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub config: Config,
    pub max_steps: u64,
    pub events: Vec<ScheduledEvent>,
    /// Probability per step of an event on a random sensor (random mode).
    pub event_rate: f64,
    /// Keep the canonical term of every step.
    pub emit_terms: bool,
}

impl RunConfig {
    pub fn random(seed: u64) -> Self {
        RunConfig {
            mode: Mode::Random { seed },
            config: Config::default(),
            max_steps: 10_000,
            events: Vec::new(),
            event_rate: 0.0,
            emit_terms: false,
        }
    }

    pub fn scripted(hints: Vec<Hint>) -> Self {
        RunConfig {
            mode: Mode::Scripted(hints),
            ..RunConfig::random(0)
        }
    }

    pub fn exhaustive(max_depth: usize, max_states: usize) -> Self {
        RunConfig {
            mode: Mode::Exhaustive { max_depth, max_states },
            ..RunConfig::random(0)
        }
    }

    pub fn validate(&self) -> Result<(), SchedulerError> {
        if self.max_steps == 0 {
            return Err(SchedulerError::Config("max_steps must be at least 1".into()));
        }
        if let Mode::Exhaustive { max_depth, max_states } = self.mode {
            if max_depth == 0 || max_states == 0 {
                return Err(SchedulerError::Config("exploration bounds must be positive".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.event_rate) {
            return Err(SchedulerError::Config("event rate must lie in [0, 1]".into()));
        }
        if (self.event_rate > 0.0 || !self.events.is_empty()) && !self.config.extensions.events {
            return Err(SchedulerError::Config("events are scheduled but the `events` extension is off".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// No redex is enabled.
    Quiescent,
    /// Only stutters on undefined methods remain.
    QuiescentBlocked,
    StepLimit,
    /// Every sensor ran out of battery.
    AllExpired,
    StateLimit,
    /// A scripted run consumed its script before reaching a terminal state.
    ScriptEnd,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::Quiescent,
        Outcome::QuiescentBlocked,
        Outcome::StepLimit,
        Outcome::AllExpired,
        Outcome::StateLimit,
        Outcome::ScriptEnd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Quiescent => "Quiescent",
            Outcome::QuiescentBlocked => "QuiescentBlocked",
            Outcome::StepLimit => "StepLimit",
            Outcome::AllExpired => "AllExpired",
            Outcome::StateLimit => "StateLimit",
            Outcome::ScriptEnd => "ScriptEnd",
        }
    }

    pub fn from_name(s: &str) -> Option<Outcome> {
        Outcome::ALL.into_iter().find(|o| o.name() == s)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub label: StepLabel,
    /// Canonical hash of the term after the step.
    pub hash: u64,
    pub term: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
    pub initial: Network,
    pub last: Network,
}

impl Trace {
    pub fn count(&self, rule: Rule) -> usize {
        self.steps.iter().filter(|s| s.label.redex.rule == rule).count()
    }

    /// The trace in its textual line format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format_step(i + 1, &s.label, s.hash));
            out.push('\n');
            if let Some(term) = &s.term {
                for line in term.lines() {
                    out.push_str("    ");
                    out.push_str(line);
                    out.push('\n');
                }
            }
        }
        out.push_str(&format!("outcome {}\n", self.outcome));
        out
    }
}

/// Classifies a state with no step taken from it, if it is terminal.
pub fn terminal_outcome(net: &Network, enabled: &[Redex]) -> Option<Outcome> {
    if net.sensors.is_empty() {
        return Some(if net.expired.is_empty() {
            Outcome::Quiescent
        } else {
            Outcome::AllExpired
        });
    }
    if enabled.is_empty() {
        return Some(Outcome::Quiescent);
    }
    if enabled.iter().all(|r| !r.rule.is_productive()) {
        return Some(Outcome::QuiescentBlocked);
    }
    None
}

/// A seeded, weakly fair random run that can be stepped one redex at a time.
pub struct Simulation {
    net: Network,
    cfg: RunConfig,
    rng: ChaCha8Rng,
    /// Sensors that stuttered since the last productive step.
    stuttered: HashSet<SensorId>,
    /// Scheduled events whose sensor was captured when they fell due.
    pending: Vec<SensorId>,
    steps: u64,
    outcome: Option<Outcome>,
}

impl Simulation {
    pub fn new(net: Network, cfg: RunConfig) -> Result<Self, SchedulerError> {
        cfg.validate()?;
        let seed = match cfg.mode {
            Mode::Random { seed } => seed,
            _ => return Err(SchedulerError::Config("a simulation needs random mode".into())),
        };
        Ok(Simulation {
            net,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stuttered: HashSet::new(),
            pending: Vec::new(),
            steps: 0,
            outcome: None,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    fn record(&self, label: StepLabel) -> TraceStep {
        let energy = &self.cfg.config.energy;
        TraceStep {
            label,
            hash: canonical_hash(&self.net, energy),
            term: self.cfg.emit_terms.then(|| canonical_network(&self.net, energy)),
        }
    }

    /// Picks the event to fire before the next step, if any. Scheduled
    /// events wait while their sensor is captured and are dropped once it
    /// has expired. When the network is otherwise terminal, the next
    /// scheduled event fires early.
    fn pending_event(&mut self, terminal: bool) -> Option<SensorId> {
        let now = self.steps;
        let (mut due, later): (Vec<ScheduledEvent>, Vec<ScheduledEvent>) =
            std::mem::take(&mut self.cfg.events).into_iter().partition(|e| e.step <= now);
        self.cfg.events = later;
        if terminal && due.is_empty() && self.pending.is_empty() && !self.cfg.events.is_empty() {
            self.cfg.events.sort_by_key(|e| e.step);
            due.push(self.cfg.events.remove(0));
        }
        self.pending.extend(due.into_iter().map(|e| e.sensor));
        let net = &self.net;
        self.pending.retain(|id| net.find(id).is_some());
        if let Some(i) = self.pending.iter().position(|id| net.sensor(id).is_some_and(|s| s.bag.is_none())) {
            return Some(self.pending.remove(i));
        }
        if self.cfg.event_rate > 0.0 && self.rng.random_bool(self.cfg.event_rate) {
            let free: Vec<&SensorId> = self.net.sensors.iter().filter(|s| s.bag.is_none()).map(|s| &s.id).collect();
            if !free.is_empty() {
                return Some(free[self.rng.random_range(0..free.len())].clone());
            }
        }
        None
    }

    /// Takes one step. Returns `None` once the run has ended.
    pub fn next_step(&mut self) -> Result<Option<TraceStep>, SchedulerError> {
        if self.outcome.is_some() {
            return Ok(None);
        }
        if self.steps >= self.cfg.max_steps {
            self.outcome = Some(Outcome::StepLimit);
            return Ok(None);
        }
        let enabled = enabled_redexes(&self.net, &self.cfg.config)?;
        let terminal = terminal_outcome(&self.net, &enabled);
        if let Some(id) = self.pending_event(terminal.is_some()) {
            let (next, label) = fire_event(&self.net, &id, &self.cfg.config)?;
            self.net = next;
            self.steps += 1;
            self.stuttered.clear();
            return Ok(Some(self.record(label)));
        }
        if let Some(o) = terminal {
            self.outcome = Some(o);
            return Ok(None);
        }
        let candidates: Vec<&Redex> = enabled
            .iter()
            .filter(|r| r.rule.is_productive() || !self.stuttered.contains(&r.subject))
            .collect();
        let redex = candidates[self.rng.random_range(0..candidates.len())].clone();
        if redex.rule.is_productive() {
            self.stuttered.clear();
        } else {
            self.stuttered.insert(redex.subject.clone());
        }
        let label = engine::step(&mut self.net, &redex, &self.cfg.config)?;
        self.steps += 1;
        Ok(Some(self.record(label)))
    }

    pub fn into_network(self) -> Network {
        self.net
    }
}

/// Runs a network to completion under the given configuration.
pub fn run(net: &Network, cfg: &RunConfig) -> Result<Trace, SchedulerError> {
    cfg.validate()?;
    match &cfg.mode {
        Mode::Random { .. } => {
            let mut sim = Simulation::new(net.clone(), cfg.clone())?;
            let mut steps = Vec::new();
            while let Some(s) = sim.next_step()? {
                steps.push(s);
            }
            let outcome = sim.outcome().expect("finished run has an outcome");
            Ok(Trace {
                steps,
                outcome,
                initial: net.clone(),
                last: sim.into_network(),
            })
        }
        Mode::Scripted(hints) => run_scripted(net, hints, cfg),
        Mode::Exhaustive { .. } => Err(SchedulerError::Config("use `explore` for exhaustive mode".into())),
    }
}

fn run_scripted(net: &Network, hints: &[Hint], cfg: &RunConfig) -> Result<Trace, SchedulerError> {
    let energy = &cfg.config.energy;
    let mut cur = net.clone();
    let mut steps = Vec::new();
    for (i, hint) in hints.iter().enumerate() {
        let record = |next: &Network, label: StepLabel| TraceStep {
            label,
            hash: canonical_hash(next, energy),
            term: cfg.emit_terms.then(|| canonical_network(next, energy)),
        };
        if hint.rule == Rule::Event {
            let id = hint.subject.clone().ok_or_else(|| SchedulerError::ScriptMismatch {
                step: i + 1,
                hint: hint.to_string(),
                enabled: "an event needs a sensor".into(),
            })?;
            let (next, label) = fire_event(&cur, &id, &cfg.config)?;
            steps.push(record(&next, label));
            cur = next;
            continue;
        }
        let enabled = enabled_redexes(&cur, &cfg.config)?;
        let mut results: Vec<(Network, StepLabel, String)> = Vec::new();
        for r in enabled.iter().filter(|r| hint.matches(r)) {
            let mut next = cur.clone();
            let label = engine::step(&mut next, r, &cfg.config)?;
            let key = canonical_network(&next, energy);
            if hint.hash.is_some_and(|h| h != crate::congruence::stable_hash(key.as_bytes())) {
                continue;
            }
            results.push((next, label, key));
        }
        let Some((next, label, key)) = results.first().cloned() else {
            return Err(SchedulerError::ScriptMismatch {
                step: i + 1,
                hint: hint.to_string(),
                enabled: enabled.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
            });
        };
        if results.iter().any(|(_, _, k)| *k != key) {
            return Err(SchedulerError::Ambiguous {
                step: i + 1,
                hint: hint.to_string(),
            });
        }
        steps.push(record(&next, label));
        cur = next;
    }
    let enabled = enabled_redexes(&cur, &cfg.config)?;
    let outcome = terminal_outcome(&cur, &enabled).unwrap_or(Outcome::ScriptEnd);
    Ok(Trace {
        steps,
        outcome,
        initial: net.clone(),
        last: cur,
    })
}
