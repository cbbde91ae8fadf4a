//! Scenario files: one `<t_ms> <key-digit>` event per line.
//!
//! ```text
//! # open the lock
//! 0    9
//! 1000 5
//! 2000 0
//! 3000 2
//! ```
//!
//! `#` starts a comment, blank lines are skipped and timestamps must not
//! decrease.

use thiserror::Error;

use crate::lock::KeyId;
use crate::sim::{KeyEvent, SimError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ScenarioErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioErrorKind {
    #[error("expected `<t_ms> <key-digit>`, found `{0}`")]
    Malformed(String),
    #[error("`{0}` is not a time in milliseconds")]
    BadTime(String),
    #[error("`{0}` is not a keypad digit 0-9")]
    BadKey(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub fn parse_scenario(text: &str) -> Result<Vec<KeyEvent>, ScenarioError> {
    let mut events: Vec<KeyEvent> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |kind| ScenarioError { line, kind };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [time, key] = fields[..] else {
            return Err(err(ScenarioErrorKind::Malformed(content.to_string())));
        };
        let t_ms = match time.parse::<i64>() {
            Ok(t) if t < 0 => return Err(err(SimError::NegativeTime(t).into())),
            Ok(t) => t as u64,
            Err(_) => return Err(err(ScenarioErrorKind::BadTime(time.to_string()))),
        };
        let key = key
            .parse::<u8>()
            .ok()
            .and_then(|d| KeyId::new(d).ok())
            .ok_or_else(|| err(ScenarioErrorKind::BadKey(key.to_string())))?;
        if let Some(prev) = events.last() {
            if t_ms < prev.t_ms {
                return Err(err(SimError::UnsortedEvents {
                    prev_ms: prev.t_ms,
                    t_ms,
                }
                .into()));
            }
        }
        events.push(KeyEvent { t_ms, key });
    }
    Ok(events)
}
