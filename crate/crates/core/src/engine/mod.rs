//! One-step reduction of networks.

mod step;

use std::fmt;

use thiserror::Error;

use crate::extensions::{ExtError, Extensions, LOG_INTRINSICS, PUT};
use crate::field::in_range;
use crate::network::{Network, Sensor, SensorId};
use crate::num::Amount;
use crate::syntax::ast::{Label, Program, Target, Value};
use crate::syntax::pretty;

pub use step::{apply, fire_event, resolve_value, step};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("energy costs must be positive (c_in={c_in}, c_out={c_out})")]
    BadEnergy { c_in: Amount, c_out: Amount },
    #[error("sensor {sensor}: cannot dispatch on {method}")]
    Dispatch { sensor: SensorId, method: String },
    #[error("redex {0} is not enabled")]
    NotEnabled(Redex),
    #[error("sensor {sensor}: {what} expects {expected} value(s), got {got}")]
    ArityMismatch {
        sensor: SensorId,
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("sensor {sensor}: a parallel composition would have to join before `{rest}`")]
    ForkJoin { sensor: SensorId, rest: String },
    #[error("sensor {sensor}: cannot install {value}, not a module")]
    NotAModule { sensor: SensorId, value: String },
    #[error("unknown or expired sensor {0}")]
    UnknownSensor(SensorId),
    #[error("sensor {0} is captured in a broadcast and cannot step")]
    Frozen(SensorId),
    #[error("events are disabled")]
    EventsDisabled,
    #[error("sensor {sensor}: {source}")]
    Extension {
        sensor: SensorId,
        #[source]
        source: ExtError,
    },
}

/// Costs of an internal step and of a broadcast release.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyConfig {
    pub c_in: Amount,
    pub c_out: Amount,
}

impl EnergyConfig {
    pub fn new(c_in: Amount, c_out: Amount) -> Result<Self, EngineError> {
        if c_in <= Amount::ZERO || c_out <= Amount::ZERO {
            return Err(EngineError::BadEnergy { c_in, c_out });
        }
        Ok(EnergyConfig { c_in, c_out })
    }

    /// A sensor with less than this is off.
    pub fn threshold(&self) -> Amount {
        self.c_in.max(self.c_out)
    }
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            c_in: Amount::from_units(1),
            c_out: Amount::from_units(10),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeliveryPolicy {
    /// Release only once every reachable receiver has the message.
    #[default]
    AllInRange,
    /// Release at any time, so some receivers may miss the message.
    Nondeterministic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub energy: EnergyConfig,
    pub delivery: DeliveryPolicy,
    pub extensions: Extensions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Method,
    NoMethod,
    Deliver,
    Release,
    Install,
    Sense,
    Cond,
    Let,
    Event,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::Method,
        Rule::NoMethod,
        Rule::Deliver,
        Rule::Release,
        Rule::Install,
        Rule::Sense,
        Rule::Cond,
        Rule::Let,
        Rule::Event,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Method => "METHOD",
            Rule::NoMethod => "NOMETHOD",
            Rule::Deliver => "DELIVER",
            Rule::Release => "RELEASE",
            Rule::Install => "INSTALL",
            Rule::Sense => "SENSE",
            Rule::Cond => "COND",
            Rule::Let => "LET",
            Rule::Event => "EVENT",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name().eq_ignore_ascii_case(s))
    }

    /// Energy charged when the rule fires.
    pub fn cost(self, energy: &EnergyConfig) -> Amount {
        match self {
            Rule::Method | Rule::Install | Rule::Sense | Rule::Cond | Rule::Let => energy.c_in,
            Rule::Release => energy.c_out,
            Rule::NoMethod | Rule::Deliver | Rule::Event => Amount::ZERO,
        }
    }

    pub fn is_productive(self) -> bool {
        self != Rule::NoMethod
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One enabled rule instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub rule: Rule,
    pub subject: SensorId,
    /// Thread index in the subject's canonical program.
    pub thread: usize,
    /// Receiver of a delivery.
    pub object: Option<SensorId>,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.rule, self.subject)?;
        if let Some(o) = &self.object {
            write!(f, "→{o}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepLabel {
    pub redex: Redex,
    pub energy: Amount,
    pub description: String,
    /// Method label and resolved arguments, for invocations and deliveries.
    pub message: Option<(Label, Vec<Value>)>,
}

/// Every redex of the network, in a deterministic order.
pub fn enabled_redexes(net: &Network, cfg: &Config) -> Result<Vec<Redex>, EngineError> {
    let mut out = Vec::new();
    for s in &net.sensors {
        sensor_redexes(net, s, cfg, &mut out)?;
    }
    Ok(out)
}

fn receivers<'a>(net: &'a Network, s: &'a Sensor) -> impl Iterator<Item = &'a Sensor> + 'a {
    net.sensors
        .iter()
        .filter(move |o| o.id != s.id && o.bag.is_none() && in_range(s, o))
}

pub(crate) fn method_label(s: &Sensor, method: &Value) -> Result<Label, EngineError> {
    match method {
        Value::Label(l) => Ok(l.clone()),
        other => Err(EngineError::Dispatch {
            sensor: s.id.clone(),
            method: pretty::value(other),
        }),
    }
}

fn broadcast_redexes(net: &Network, s: &Sensor, thread: usize, cfg: &Config, out: &mut Vec<Redex>) {
    let mut delivered = false;
    if s.battery >= cfg.energy.c_out {
        for o in receivers(net, s) {
            delivered = true;
            out.push(Redex {
                rule: Rule::Deliver,
                subject: s.id.clone(),
                thread,
                object: Some(o.id.clone()),
            });
        }
    }
    if cfg.delivery == DeliveryPolicy::Nondeterministic || !delivered {
        out.push(Redex {
            rule: Rule::Release,
            subject: s.id.clone(),
            thread,
            object: None,
        });
    }
}

fn sensor_redexes(net: &Network, s: &Sensor, cfg: &Config, out: &mut Vec<Redex>) -> Result<(), EngineError> {
    if let Some(bag) = &s.bag {
        broadcast_redexes(net, s, bag.thread, cfg, out);
        return Ok(());
    }
    let internal = s.battery >= cfg.energy.c_in;
    let simple = |rule| Redex {
        rule,
        subject: s.id.clone(),
        thread: 0,
        object: None,
    };
    for (i, thread) in s.threads.iter().enumerate() {
        let head = &thread[0];
        let rule = match head {
            Program::Invoke {
                target: Target::Net,
                method,
                ..
            } => {
                method_label(s, method)?;
                broadcast_redexes(net, s, i, cfg, out);
                continue;
            }
            Program::Invoke {
                target: Target::This,
                method,
                ..
            } => {
                let l = method_label(s, method)?;
                let builtin = LOG_INTRINSICS.contains(&l.as_str()) || (cfg.extensions.state && l.as_str() == PUT);
                if s.module.contains(&l) || builtin {
                    Rule::Method
                } else {
                    Rule::NoMethod
                }
            }
            Program::Install(_) => Rule::Install,
            Program::Sense { .. } => Rule::Sense,
            Program::If { .. } => Rule::Cond,
            Program::Let { .. } => Rule::Let,
            Program::Seq(..) | Program::Par(..) | Program::Idle => {
                return Err(EngineError::ForkJoin {
                    sensor: s.id.clone(),
                    rest: pretty::program(head),
                })
            }
        };
        if rule == Rule::NoMethod || internal {
            out.push(Redex { thread: i, ..simple(rule) });
        }
    }
    Ok(())
}
