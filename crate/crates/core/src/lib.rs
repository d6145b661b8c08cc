//! Interpreter and simulator for the Calculus for Sensor Networks.
//!
//! A network is a multiset of sensors immersed in a field. Each sensor runs
//! a program against a module of methods and pays for every step out of its
//! battery. [`engine`] implements one reduction step, [`scheduler`] drives
//! runs, replays and bounded exploration.

pub mod congruence;
pub mod corpus;
pub mod engine;
pub mod extensions;
pub mod field;
pub mod network;
pub mod num;
pub mod scheduler;
pub mod syntax;

pub use congruence::{congruent, normalize_program, substitute, CanonicalProgram};
pub use engine::{apply, enabled_redexes, fire_event, Config, DeliveryPolicy, EnergyConfig, EngineError, Redex, Rule, StepLabel};
pub use extensions::{Extensions, Heap};
pub use field::FieldSpec;
pub use network::{Network, Sensor, SensorId};
pub use num::{Amount, Num};
