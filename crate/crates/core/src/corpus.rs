//! Bundled example networks and the checks `csn corpus` runs on them.

use std::collections::BTreeMap;

use crate::congruence::normalize_module;
use crate::engine::{Config, DeliveryPolicy, Rule};
use crate::extensions::Extensions;
use crate::network::{Network, SensorId};
use crate::scheduler::{self, parse_trace, replay, Outcome, RunConfig, ScheduledEvent, SchedulerError};
use crate::syntax::ast::{Label, Module, Program, Value};
use crate::syntax::parser::{parse_module, parse_network, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// Replay the golden trace.
    Golden,
    /// The sink logs a `log_position_and_power` entry.
    SinkLogs(&'static str),
    /// Every non-sink sensor runs out of battery.
    SensorsExpire,
    /// After sealing, a fresh deploy changes no sealed module.
    SealHolds,
    /// Quiescent with every sensor alive and one forward per sensor.
    ScopedFlood,
}

#[derive(Clone, Copy, Debug)]
pub struct Example {
    pub name: &'static str,
    pub source: &'static str,
    pub golden: Option<&'static str>,
    pub extensions: Extensions,
    pub delivery: DeliveryPolicy,
    pub check: Check,
}

const STATE: Extensions = Extensions {
    state: true,
    events: false,
    nonce: false,
};

const EVENTS: Extensions = Extensions {
    state: false,
    events: true,
    nonce: false,
};

const NONE: Extensions = Extensions {
    state: false,
    events: false,
    nonce: false,
};

pub const EXAMPLES: [Example; 10] = [
    Example {
        name: "sample2",
        source: include_str!("../corpus/sample2.csn"),
        golden: Some(include_str!("../corpus/traces/sample2.trace")),
        extensions: NONE,
        delivery: DeliveryPolicy::Nondeterministic,
        check: Check::Golden,
    },
    Example {
        name: "deployseal",
        source: include_str!("../corpus/deployseal.csn"),
        golden: Some(include_str!("../corpus/traces/deployseal.trace")),
        extensions: NONE,
        delivery: DeliveryPolicy::Nondeterministic,
        check: Check::Golden,
    },
    Example {
        name: "ping",
        source: include_str!("../corpus/ping.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SinkLogs("log_position_and_power"),
    },
    Example {
        name: "querying",
        source: include_str!("../corpus/querying.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SensorsExpire,
    },
    Example {
        name: "polling",
        source: include_str!("../corpus/polling.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SinkLogs("log_position_and_value"),
    },
    Example {
        name: "deploy",
        source: include_str!("../corpus/deploy.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SinkLogs("log_position_and_value"),
    },
    Example {
        name: "deploy_refined",
        source: include_str!("../corpus/deploy_refined.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SinkLogs("log_position_and_value"),
    },
    Example {
        name: "sealing",
        source: include_str!("../corpus/sealing.csn"),
        golden: None,
        extensions: NONE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SealHolds,
    },
    Example {
        name: "ping_scoped",
        source: include_str!("../corpus/ping_scoped.csn"),
        golden: None,
        extensions: STATE,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::ScopedFlood,
    },
    Example {
        name: "alarm",
        source: include_str!("../corpus/alarm.csn"),
        golden: None,
        extensions: EVENTS,
        delivery: DeliveryPolicy::AllInRange,
        check: Check::SinkLogs("sing_bell"),
    },
];

/// Name of the sink in every bundled network.
pub const SINK: &str = "senS";

pub fn find(name: &str) -> Option<&'static Example> {
    let stem = name.strip_suffix(".csn").unwrap_or(name);
    EXAMPLES.iter().find(|e| e.name == stem)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub passed: bool,
    pub detail: String,
}

impl Example {
    pub fn network(&self) -> Result<Network, ParseError> {
        parse_network(self.source)
    }

    pub fn config(&self) -> Config {
        Config {
            delivery: self.delivery,
            extensions: self.extensions,
            ..Config::default()
        }
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::random(seed);
        cfg.config = self.config();
        cfg.max_steps = 100_000;
        if self.extensions.events {
            // Once the handlers are deployed, an event on each sensor.
            cfg.events = ["senX", "senY", "senZ"]
                .iter()
                .enumerate()
                .map(|(i, s)| ScheduledEvent {
                    step: 40 + 10 * i as u64,
                    sensor: SensorId::new(*s),
                })
                .collect();
        }
        cfg
    }

    /// Runs the example's check with one seed.
    pub fn check(&self, seed: u64) -> Result<CheckReport, SchedulerError> {
        let net = self.network().map_err(|e| SchedulerError::Config(format!("{}: {e}", self.name)))?;
        let sink = SensorId::new(SINK);
        let report = |passed: bool, detail: String| Ok(CheckReport { passed, detail });
        match self.check {
            Check::Golden => {
                let text = self.golden.unwrap_or("");
                let golden = parse_trace(text).map_err(|e| SchedulerError::Config(e.to_string()))?;
                let r = replay(&net, &golden, &self.run_config(seed))?;
                let detail = if r.matches() {
                    format!("{} steps replayed", r.trace.steps.len())
                } else {
                    r.diffs.join("; ")
                };
                report(r.matches(), detail)
            }
            Check::SinkLogs(intrinsic) => {
                let t = scheduler::run(&net, &self.run_config(seed))?;
                let n = t.last.log_of(&sink).filter(|e| e.intrinsic == intrinsic).count();
                report(n > 0, format!("{n} {intrinsic} entries, outcome {}", t.outcome))
            }
            Check::SensorsExpire => {
                let t = scheduler::run(&net, &self.run_config(seed))?;
                let alive: Vec<String> = t
                    .last
                    .all_sensors()
                    .iter()
                    .filter(|s| s.id != sink)
                    .map(|s| s.id.to_string())
                    .collect();
                report(
                    alive.is_empty(),
                    format!("outcome {} after {} steps, alive: [{}]", t.outcome, t.steps.len(), alive.join(", ")),
                )
            }
            Check::SealHolds => {
                let t = scheduler::run(&net, &self.run_config(seed))?;
                let sealed = sealed_modules(&t.last);
                let Some(mut probe) = inject_deploy(&t.last, &sink) else {
                    return report(false, "the sink did not survive sealing".into());
                };
                probe.clock = 0;
                let after = scheduler::run(&probe, &self.run_config(seed))?;
                let changed: Vec<String> = sealed
                    .iter()
                    .filter(|(id, m)| after.last.find(id).is_some_and(|s| normalize_module(&s.module) != **m))
                    .map(|(id, _)| id.to_string())
                    .collect();
                report(
                    !sealed.is_empty() && changed.is_empty(),
                    format!("{} sealed, changed after deploy: [{}]", sealed.len(), changed.join(", ")),
                )
            }
            Check::ScopedFlood => {
                let t = scheduler::run(&net, &self.run_config(seed))?;
                let forwards = own_forwards(&t);
                let sensors: Vec<&SensorId> = t.initial.sensors.iter().map(|s| &s.id).filter(|id| **id != sink).collect();
                let once = sensors.iter().all(|id| forwards.get(*id) == Some(&1));
                let alive = t.last.expired.is_empty();
                let counts: Vec<String> = forwards.iter().map(|(id, n)| format!("{id}={n}")).collect();
                report(
                    t.outcome == Outcome::Quiescent && once && alive,
                    format!("outcome {}, own forwards [{}], expired {}", t.outcome, counts.join(", "), t.last.expired.len()),
                )
            }
        }
    }
}

/// The module a sensor gets once `seal` has run.
pub fn is_sealed(m: &Module) -> bool {
    let sealed = parse_module("{ deploy = (x) idle }").expect("literal parses");
    m.get(&Label::new("deploy")) == sealed.get(&Label::new("deploy"))
}

/// Sealed sensors with their normalized modules.
pub fn sealed_modules(net: &Network) -> BTreeMap<SensorId, Module> {
    net.all_sensors()
        .into_iter()
        .filter(|s| is_sealed(&s.module))
        .map(|s| (s.id.clone(), normalize_module(&s.module)))
        .collect()
}

/// Adds a thread `net.deploy[M]` to a live sensor, where `M` carries a new
/// `intruder` method and an unsealed `deploy`.
pub fn inject_deploy(net: &Network, at: &SensorId) -> Option<Network> {
    let mut next = net.clone();
    let s = next.sensors.iter_mut().find(|s| &s.id == at && s.bag.is_none())?;
    let intruder = parse_module("{ intruder = () idle  deploy = (x) install x; net.deploy[x] }").expect("literal parses");
    let mut threads = std::mem::take(&mut s.threads);
    threads.push(vec![Program::net("deploy", vec![Value::Module(intruder)])]);
    s.threads = crate::congruence::normalize_threads(threads);
    Some(next)
}

/// How many times each sensor released a `forward` carrying its own
/// position.
pub fn own_forwards(t: &scheduler::Trace) -> BTreeMap<SensorId, usize> {
    let mut out = BTreeMap::new();
    for step in &t.steps {
        let l = &step.label;
        if l.redex.rule != Rule::Release {
            continue;
        }
        let Some((label, args)) = &l.message else { continue };
        let Some(s) = t.initial.find(&l.redex.subject) else { continue };
        if label.as_str() == "forward" && args.first() == Some(&Value::Position(s.position)) {
            *out.entry(l.redex.subject.clone()).or_insert(0) += 1;
        }
    }
    out
}
