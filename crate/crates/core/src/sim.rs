//! Timed simulation of the lock on a virtual millisecond clock.
//!
//! Key presses arrive as timestamped events. When the last latch rises the
//! relay energizes and the hold network starts timing; after
//! `hold_time_ms` it pulls every reset input high and the lock closes again.

use std::fmt;

use thiserror::Error;

use crate::lock::{KeyId, LatchVector, LockConfig, PressEffect};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("event at {t_ms} ms follows an event at {prev_ms} ms")]
    UnsortedEvents { prev_ms: u64, t_ms: u64 },
    #[error("negative time {0} ms")]
    NegativeTime(i64),
    #[error("end time {t_end_ms} ms precedes the last event at {last_ms} ms")]
    EndBeforeLastEvent { t_end_ms: u64, last_ms: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyEvent {
    pub t_ms: u64,
    pub key: KeyId,
}

impl KeyEvent {
    pub fn new(t_ms: u64, key: KeyId) -> Self {
        KeyEvent { t_ms, key }
    }
}

/// When the hold window is armed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimerMode {
    /// At the rising edge of the last latch (relay energization).
    #[default]
    OnUnlock,
    /// At the rising edge of the first latch; the whole entry must then
    /// complete, and the lock stay open, within one window.
    OnFirstPress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solenoid {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lamp {
    On,
    Off,
}

impl fmt::Display for Solenoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Solenoid::Open => "OPEN",
            Solenoid::Close => "CLOSE",
        })
    }
}

impl fmt::Display for Lamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Lamp::On => "ON",
            Lamp::Off => "OFF",
        })
    }
}

/// Loads switched by the double-pole relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputState {
    pub solenoid: Solenoid,
    pub green: Lamp,
    pub red: Lamp,
}

impl OutputState {
    pub const OPEN: OutputState = OutputState {
        solenoid: Solenoid::Open,
        green: Lamp::On,
        red: Lamp::Off,
    };
    pub const CLOSED: OutputState = OutputState {
        solenoid: Solenoid::Close,
        green: Lamp::Off,
        red: Lamp::On,
    };
}

/// The relay follows the last latch.
pub fn outputs_of(state: &LatchVector) -> OutputState {
    if state.is_open() {
        OutputState::OPEN
    } else {
        OutputState::CLOSED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stimulus {
    Start,
    Press(KeyId),
    HoldExpired,
}

impl fmt::Display for Stimulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stimulus::Start => f.write_str("Start"),
            Stimulus::Press(k) => write!(f, "Press({k})"),
            Stimulus::HoldExpired => f.write_str("HoldExpired"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub t_ms: u64,
    pub stimulus: Stimulus,
    pub latches: LatchVector,
    pub outputs: OutputState,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimTrace {
    pub records: Vec<TraceRecord>,
}

impl SimTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn hold_expiries(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records
            .iter()
            .filter(|r| r.stimulus == Stimulus::HoldExpired)
    }

    /// Writes the trace as CSV with a `t_ms,stimulus,q0,..` header.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let depth = self.records.first().map_or(4, |r| r.latches.len());
        write!(out, "t_ms,stimulus")?;
        for i in 0..depth {
            write!(out, ",q{i}")?;
        }
        writeln!(out, ",solenoid,green,red")?;
        for r in &self.records {
            write!(out, "{},{}", r.t_ms, r.stimulus)?;
            for &q in r.latches.as_slice() {
                write!(out, ",{}", level_label(q))?;
            }
            writeln!(
                out,
                ",{},{},{}",
                r.outputs.solenoid, r.outputs.green, r.outputs.red
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace CSV is ASCII")
    }
}

pub fn level_label(high: bool) -> &'static str {
    if high {
        "HIGH"
    } else {
        "LOW"
    }
}

/// Incremental event loop. Drives the lock one stimulus at a time so that
/// both batch scenarios and the interactive shell share the same rules.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: LockConfig,
    mode: TimerMode,
    state: LatchVector,
    now_ms: u64,
    expiry_ms: Option<u64>,
    trace: SimTrace,
}

impl Simulator {
    pub fn new(cfg: LockConfig, mode: TimerMode) -> Self {
        let state = cfg.rest_state();
        let trace = SimTrace {
            records: vec![TraceRecord {
                t_ms: 0,
                stimulus: Stimulus::Start,
                latches: state,
                outputs: outputs_of(&state),
            }],
        };
        Simulator {
            cfg,
            mode,
            state,
            now_ms: 0,
            expiry_ms: None,
            trace,
        }
    }

    pub fn config(&self) -> &LockConfig {
        &self.cfg
    }

    pub fn state(&self) -> LatchVector {
        self.state
    }

    pub fn outputs(&self) -> OutputState {
        outputs_of(&self.state)
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    /// Scheduled auto-reset, if the hold window is running.
    pub fn pending_expiry_ms(&self) -> Option<u64> {
        self.expiry_ms
    }

    pub fn trace(&self) -> &SimTrace {
        &self.trace
    }

    pub fn into_trace(self) -> SimTrace {
        self.trace
    }

    /// Presses `key` at `t_ms`. Expiries due strictly before `t_ms` fire
    /// first; an expiry due at exactly `t_ms` fires after the press.
    pub fn press(&mut self, t_ms: u64, key: KeyId) -> Result<PressEffect, SimError> {
        if t_ms < self.now_ms {
            return Err(SimError::UnsortedEvents {
                prev_ms: self.now_ms,
                t_ms,
            });
        }
        if let Some(expiry) = self.expiry_ms {
            if expiry < t_ms {
                self.fire_expiry(expiry);
            }
        }
        self.now_ms = t_ms;
        let outcome = self.cfg.press(&self.state, key);
        self.state = outcome.new_state;
        match (outcome.effect, self.mode) {
            (PressEffect::ResetAll, _) => self.expiry_ms = None,
            (PressEffect::UnlockEdge, TimerMode::OnUnlock) => {
                self.expiry_ms = Some(t_ms + self.cfg.hold_time_ms());
            }
            (PressEffect::Advanced(0), TimerMode::OnFirstPress)
            | (PressEffect::UnlockEdge, TimerMode::OnFirstPress)
                if self.expiry_ms.is_none() =>
            {
                self.expiry_ms = Some(t_ms + self.cfg.hold_time_ms());
            }
            _ => {}
        }
        self.record(Stimulus::Press(key));
        Ok(outcome.effect)
    }

    /// Moves the clock to `t_ms`, firing an expiry due at or before it.
    pub fn advance_to(&mut self, t_ms: u64) -> Result<(), SimError> {
        if t_ms < self.now_ms {
            return Err(SimError::UnsortedEvents {
                prev_ms: self.now_ms,
                t_ms,
            });
        }
        if let Some(expiry) = self.expiry_ms {
            if expiry <= t_ms {
                self.fire_expiry(expiry);
            }
        }
        self.now_ms = t_ms;
        Ok(())
    }

    fn fire_expiry(&mut self, at_ms: u64) {
        self.now_ms = at_ms;
        self.expiry_ms = None;
        self.state = self.cfg.rest_state();
        self.record(Stimulus::HoldExpired);
    }

    fn record(&mut self, stimulus: Stimulus) {
        self.trace.records.push(TraceRecord {
            t_ms: self.now_ms,
            stimulus,
            latches: self.state,
            outputs: outputs_of(&self.state),
        });
    }
}

/// Runs a complete scenario up to `t_end_ms`. Events must be sorted by
/// time; events sharing a timestamp are applied in slice order.
pub fn run_scenario(
    cfg: &LockConfig,
    events: &[KeyEvent],
    t_end_ms: u64,
    mode: TimerMode,
) -> Result<SimTrace, SimError> {
    if let Some(pair) = events.windows(2).find(|w| w[1].t_ms < w[0].t_ms) {
        return Err(SimError::UnsortedEvents {
            prev_ms: pair[0].t_ms,
            t_ms: pair[1].t_ms,
        });
    }
    if let Some(last) = events.last() {
        if t_end_ms < last.t_ms {
            return Err(SimError::EndBeforeLastEvent {
                t_end_ms,
                last_ms: last.t_ms,
            });
        }
    }
    let mut sim = Simulator::new(cfg.clone(), mode);
    for ev in events {
        sim.press(ev.t_ms, ev.key)?;
    }
    sim.advance_to(t_end_ms)?;
    Ok(sim.into_trace())
}
