//! Runtime terms: sensors and networks.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::congruence::{normalize_program, CanonicalProgram, Thread};
use crate::engine::EnergyConfig;
use crate::extensions::Heap;
use crate::field::FieldSpec;
use crate::num::{Amount, Num};
use crate::syntax::ast::{Module, Pos, Program, Target, Value};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("battery must be nonnegative, got {0}")]
    NegativeBattery(Amount),
    #[error("position must be finite")]
    BadPosition,
    #[error("no thread of the sensor is headed by a `net` invocation")]
    NoBroadcastThread,
}

/// Sensor name. Names are side annotations used for traces; they play no
/// role in structural congruence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SensorId(pub String);

impl SensorId {
    pub fn new(name: impl Into<String>) -> Self {
        SensorId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Receivers captured during a broadcast, and the thread doing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Bag {
    pub thread: usize,
    pub sensors: Vec<Sensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sensor {
    pub id: SensorId,
    /// The running program as a multiset of sequential threads.
    pub threads: Vec<Thread>,
    pub module: Module,
    pub position: Pos,
    pub radius: Num,
    pub battery: Amount,
    /// Present only while a broadcast has captured at least one receiver.
    pub bag: Option<Bag>,
    pub heap: Heap,
    /// Counter for nonce-salted keys.
    pub nonce: u64,
}

impl Sensor {
    pub fn try_new(
        id: &str,
        program: Program,
        module: Module,
        position: Pos,
        radius: f64,
        battery: Amount,
    ) -> Result<Sensor, NetworkError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(NetworkError::BadRadius(radius));
        }
        if battery.is_negative() {
            return Err(NetworkError::NegativeBattery(battery));
        }
        if !(position.x.get().is_finite() && position.y.get().is_finite()) {
            return Err(NetworkError::BadPosition);
        }
        Ok(Sensor {
            id: SensorId::new(id),
            threads: normalize_program(&program).threads,
            module,
            position,
            radius: Num::new(radius),
            battery,
            bag: None,
            heap: Heap::default(),
            nonce: 0,
        })
    }

    /// Convenience constructor for tests and embedders; panics on invalid
    /// attributes.
    pub fn new(id: &str, program: Program, module: Module, position: Pos, radius: f64, battery: Amount) -> Sensor {
        Sensor::try_new(id, program, module, position, radius, battery).expect("valid sensor attributes")
    }

    /// The running program, rebuilt from its threads.
    pub fn program(&self) -> Program {
        CanonicalProgram {
            threads: self.threads.clone(),
        }
        .to_program()
    }

    pub fn bag_sensors(&self) -> &[Sensor] {
        self.bag.as_ref().map(|b| b.sensors.as_slice()).unwrap_or(&[])
    }

    pub fn is_idle(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn is_exhausted(&self, energy: &EnergyConfig) -> bool {
        self.battery < energy.threshold()
    }

    /// Puts the sensor in the broadcast phase with the given receivers
    /// already captured. The first thread headed by `net.l[..]` broadcasts.
    pub fn start_bag(&mut self, sensors: Vec<Sensor>) -> Result<(), NetworkError> {
        let thread = self
            .threads
            .iter()
            .position(|t| matches!(t.first(), Some(Program::Invoke { target: Target::Net, .. })))
            .ok_or(NetworkError::NoBroadcastThread)?;
        self.bag = if sensors.is_empty() {
            None
        } else {
            Some(Bag { thread, sensors })
        };
        Ok(())
    }
}

/// A sensor removed by battery exhaustion, with its residual charge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpiredSensor {
    pub id: SensorId,
    pub battery: Amount,
}

/// An entry appended by a logging intrinsic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub step: u64,
    pub sensor: SensorId,
    pub intrinsic: String,
    pub args: Vec<Value>,
}

/// Sensors immersed in a field.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    /// Top-level sensors. Sensors captured in a bag live inside their
    /// broadcaster.
    pub sensors: Vec<Sensor>,
    pub field: Arc<FieldSpec>,
    pub expired: Vec<ExpiredSensor>,
    pub log: Vec<LogEntry>,
    /// Number of steps applied so far.
    pub clock: u64,
}

impl Network {
    /// Top-level sensors are kept ordered by name.
    pub fn new(mut sensors: Vec<Sensor>, field: Arc<FieldSpec>) -> Network {
        sensors.sort_by(|a, b| a.id.cmp(&b.id));
        Network {
            sensors,
            field,
            expired: Vec::new(),
            log: Vec::new(),
            clock: 0,
        }
    }

    pub fn sensor(&self, id: &SensorId) -> Option<&Sensor> {
        self.sensors.iter().find(|s| &s.id == id)
    }

    pub(crate) fn sensor_index(&self, id: &SensorId) -> Option<usize> {
        self.sensors.iter().position(|s| &s.id == id)
    }

    /// Finds a live sensor, looking inside bags too.
    pub fn find(&self, id: &SensorId) -> Option<&Sensor> {
        fn go<'a>(sensors: &'a [Sensor], id: &SensorId) -> Option<&'a Sensor> {
            for s in sensors {
                if &s.id == id {
                    return Some(s);
                }
                if let Some(found) = go(s.bag_sensors(), id) {
                    return Some(found);
                }
            }
            None
        }
        go(&self.sensors, id)
    }

    /// Every live sensor, top level and captured.
    pub fn all_sensors(&self) -> Vec<&Sensor> {
        fn go<'a>(sensors: &'a [Sensor], out: &mut Vec<&'a Sensor>) {
            for s in sensors {
                out.push(s);
                go(s.bag_sensors(), out);
            }
        }
        let mut out = Vec::new();
        go(&self.sensors, &mut out);
        out
    }

    pub fn is_expired(&self, id: &SensorId) -> bool {
        self.expired.iter().any(|e| &e.id == id)
    }

    /// Sum of all batteries, including residual charge of expired sensors.
    pub fn total_battery(&self) -> Amount {
        self.all_sensors().iter().map(|s| s.battery).sum::<Amount>()
            + self.expired.iter().map(|e| e.battery).sum::<Amount>()
    }

    /// Rewrites top-level sensors whose battery is below
    /// `max(c_in, c_out)` to `off`. Returns the ids that expired.
    pub fn expire_exhausted(&mut self, energy: &EnergyConfig) -> Vec<SensorId> {
        let mut gone = Vec::new();
        let mut i = 0;
        while i < self.sensors.len() {
            let s = &self.sensors[i];
            if s.bag.is_none() && s.is_exhausted(energy) {
                let s = self.sensors.remove(i);
                gone.push(s.id.clone());
                self.expired.push(ExpiredSensor {
                    id: s.id,
                    battery: s.battery,
                });
            } else {
                i += 1;
            }
        }
        gone
    }

    /// Log entries written by the given sensor.
    pub fn log_of<'a>(&'a self, id: &'a SensorId) -> impl Iterator<Item = &'a LogEntry> + 'a {
        self.log.iter().filter(move |e| &e.sensor == id)
    }
}
