//! Simulator and keyspace auditor for a four-latch keypad combination lock.
//!
//! The lock is a cascade of RS latches driven by four code keys (9, 5, 0, 2
//! by default). Four further keys reset the cascade and two are unwired
//! decoys. Opening energizes a relay through a BC547 driver and an R6/C1
//! network resets the latches once its hold window runs out.
//!
//! - [`lock`]: the time-free latch automaton
//! - [`analog`]: RC timing, the relay driver and the supply rail
//! - [`sim`]: timed scenarios on a virtual clock
//! - [`scenario`]: the text scenario format
//! - [`table1`]: replay of the recorded bench tests
//! - [`analyzer`]: exhaustive keyspace audit

pub mod analog;
pub mod analyzer;
pub mod lock;
pub mod scenario;
pub mod sim;
pub mod table1;

pub use analog::{AnalogError, BjtOperatingPoint, CircuitParams};
pub use analyzer::{AnalyzerError, KeyspaceStats};
pub use lock::{
    ConfigError, KeyId, KeyRole, LatchVector, LockConfig, PressEffect, PressOutcome, SequenceResult,
};
pub use scenario::{parse_scenario, ScenarioError};
pub use sim::{
    run_scenario, KeyEvent, OutputState, SimError, SimTrace, Simulator, Stimulus, TimerMode,
    TraceRecord,
};
pub use table1::{reproduce_table1, Table1Report};
