//! Time-free model of the latch cascade.
//!
//! Each code key drives the set input of one RS latch. Latch `i` can only be
//! set while latch `i - 1` is already high, so the set latches always form a
//! prefix of the cascade. Reset keys clear every latch; dummy keys are not
//! wired to anything.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Number of switches on the keypad (legends 0..=9).
pub const KEYPAD_SIZE: usize = 10;

/// Upper bound on the cascade depth; the code uses distinct keypad keys.
pub const MAX_CODE_LEN: usize = KEYPAD_SIZE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("key {0} appears more than once in the code")]
    DuplicateCodeKey(KeyId),
    #[error("key {0} is assigned to more than one role")]
    OverlappingRoles(KeyId),
    #[error("key {0} is outside the keypad range 0..=9")]
    KeyOutOfRange(u8),
    #[error("the code must contain at least one key")]
    EmptyCode,
    #[error("hold time must be positive")]
    ZeroHoldTime,
}

/// A keypad switch, identified by its legend digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KeyId(u8);

impl KeyId {
    pub fn new(label: u8) -> Result<Self, ConfigError> {
        if (label as usize) < KEYPAD_SIZE {
            Ok(KeyId(label))
        } else {
            Err(ConfigError::KeyOutOfRange(label))
        }
    }

    pub fn label(self) -> u8 {
        self.0
    }

    /// All ten keypad keys in legend order.
    pub fn all() -> impl Iterator<Item = KeyId> + Clone {
        (0..KEYPAD_SIZE as u8).map(KeyId)
    }
}

impl TryFrom<u8> for KeyId {
    type Error = ConfigError;

    fn try_from(label: u8) -> Result<Self, Self::Error> {
        KeyId::new(label)
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyRole {
    /// Drives the set input of latch `index`.
    CodePosition(usize),
    ResetKey,
    DummyKey,
}

/// Identity of a lock: the secret code, the reset and decoy switches and the
/// hold window after an unlock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockConfig {
    code: Vec<KeyId>,
    reset_keys: BTreeSet<KeyId>,
    dummy_keys: BTreeSet<KeyId>,
    hold_time_ms: u64,
}

impl Default for LockConfig {
    /// Code 9-5-0-2, resets {3,4,7,8}, decoys {1,6}, 4.7 s hold.
    fn default() -> Self {
        LockConfig::from_digits(&[9, 5, 0, 2], &[3, 4, 7, 8], &[1, 6], 4700)
            .expect("default lock configuration is valid")
    }
}

impl LockConfig {
    pub fn new(
        code: Vec<KeyId>,
        reset_keys: BTreeSet<KeyId>,
        dummy_keys: BTreeSet<KeyId>,
        hold_time_ms: u64,
    ) -> Result<Self, ConfigError> {
        LockConfig {
            code,
            reset_keys,
            dummy_keys,
            hold_time_ms,
        }
        .validate()
    }

    /// Builds a configuration from raw keypad digits.
    pub fn from_digits(
        code: &[u8],
        reset_keys: &[u8],
        dummy_keys: &[u8],
        hold_time_ms: u64,
    ) -> Result<Self, ConfigError> {
        let keys = |digits: &[u8]| -> Result<Vec<KeyId>, ConfigError> {
            digits.iter().map(|&d| KeyId::new(d)).collect()
        };
        LockConfig::new(
            keys(code)?,
            keys(reset_keys)?.into_iter().collect(),
            keys(dummy_keys)?.into_iter().collect(),
            hold_time_ms,
        )
    }

    /// Returns the configuration unchanged if every invariant holds.
    pub fn validate(self) -> Result<Self, ConfigError> {
        if self.code.is_empty() {
            return Err(ConfigError::EmptyCode);
        }
        let all_keys = self
            .code
            .iter()
            .chain(&self.reset_keys)
            .chain(&self.dummy_keys);
        for key in all_keys {
            if key.label() as usize >= KEYPAD_SIZE {
                return Err(ConfigError::KeyOutOfRange(key.label()));
            }
        }
        let mut code_set = BTreeSet::new();
        for &key in &self.code {
            if !code_set.insert(key) {
                return Err(ConfigError::DuplicateCodeKey(key));
            }
        }
        let overlap = code_set
            .intersection(&self.reset_keys)
            .chain(code_set.intersection(&self.dummy_keys))
            .chain(self.reset_keys.intersection(&self.dummy_keys))
            .min()
            .copied();
        if let Some(key) = overlap {
            return Err(ConfigError::OverlappingRoles(key));
        }
        if self.hold_time_ms == 0 {
            return Err(ConfigError::ZeroHoldTime);
        }
        Ok(self)
    }

    pub fn code(&self) -> &[KeyId] {
        &self.code
    }

    pub fn code_len(&self) -> usize {
        self.code.len()
    }

    pub fn reset_keys(&self) -> &BTreeSet<KeyId> {
        &self.reset_keys
    }

    pub fn dummy_keys(&self) -> &BTreeSet<KeyId> {
        &self.dummy_keys
    }

    pub fn hold_time_ms(&self) -> u64 {
        self.hold_time_ms
    }

    /// Same lock with a different hold window.
    pub fn with_hold_time_ms(self, hold_time_ms: u64) -> Result<Self, ConfigError> {
        LockConfig {
            hold_time_ms,
            ..self
        }
        .validate()
    }

    /// Unassigned keys are treated as decoys: they are not wired in.
    pub fn classify(&self, key: KeyId) -> KeyRole {
        if let Some(index) = self.code.iter().position(|&k| k == key) {
            KeyRole::CodePosition(index)
        } else if self.reset_keys.contains(&key) {
            KeyRole::ResetKey
        } else {
            KeyRole::DummyKey
        }
    }

    /// The all-low state for this lock's cascade depth.
    pub fn rest_state(&self) -> LatchVector {
        LatchVector::cleared(self.code.len())
    }

    /// Applies one key press to `state`.
    pub fn press(&self, state: &LatchVector, key: KeyId) -> PressOutcome {
        debug_assert_eq!(state.len(), self.code.len());
        match self.classify(key) {
            KeyRole::DummyKey => PressOutcome {
                new_state: *state,
                effect: PressEffect::NoOp,
            },
            KeyRole::ResetKey => PressOutcome {
                new_state: LatchVector::cleared(state.len()),
                effect: PressEffect::ResetAll,
            },
            KeyRole::CodePosition(index) => {
                let gated = index == 0 || state.get(index - 1);
                if !gated || state.get(index) {
                    return PressOutcome {
                        new_state: *state,
                        effect: PressEffect::NoOp,
                    };
                }
                let mut new_state = *state;
                new_state.q[index] = true;
                let effect = if index + 1 == state.len() {
                    PressEffect::UnlockEdge
                } else {
                    PressEffect::Advanced(index)
                };
                PressOutcome { new_state, effect }
            }
        }
    }

    /// Folds [`press`](Self::press) over `keys` from the rest state.
    ///
    /// `unlocked` records whether the last latch rose at any point, so a
    /// trailing reset does not hide an opening.
    pub fn run_sequence(&self, keys: &[KeyId]) -> SequenceResult {
        let mut state = self.rest_state();
        let mut unlocked = false;
        for &key in keys {
            let outcome = self.press(&state, key);
            unlocked |= outcome.effect == PressEffect::UnlockEdge;
            state = outcome.new_state;
        }
        SequenceResult {
            final_state: state,
            unlocked,
        }
    }
}

/// Q outputs of the cascade, `q[i]` being latch `i` (true = HIGH).
///
/// Stored inline so the vector is `Copy`; only the first `len` entries are
/// meaningful.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatchVector {
    q: [bool; MAX_CODE_LEN],
    len: u8,
}

impl LatchVector {
    pub fn cleared(len: usize) -> Self {
        assert!(
            (1..=MAX_CODE_LEN).contains(&len),
            "cascade depth {len} out of range"
        );
        LatchVector {
            q: [false; MAX_CODE_LEN],
            len: len as u8,
        }
    }

    /// Builds a vector from explicit outputs. Returns `None` if the slice is
    /// empty, too long, or not a prefix pattern.
    pub fn from_bools(q: &[bool]) -> Option<Self> {
        if q.is_empty() || q.len() > MAX_CODE_LEN {
            return None;
        }
        let mut v = LatchVector::cleared(q.len());
        v.q[..q.len()].copy_from_slice(q);
        v.is_prefix().then_some(v)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> bool {
        self.as_slice()[index]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.q[..self.len()]
    }

    /// Number of latches currently HIGH.
    pub fn depth(&self) -> usize {
        self.as_slice().iter().take_while(|&&b| b).count()
    }

    pub fn is_cleared(&self) -> bool {
        self.as_slice().iter().all(|&b| !b)
    }

    /// True when the final latch (the one driving the relay) is HIGH.
    pub fn is_open(&self) -> bool {
        self.as_slice().last().copied().unwrap_or(false)
    }

    /// A HIGH latch implies every earlier latch is HIGH.
    pub fn is_prefix(&self) -> bool {
        self.as_slice().windows(2).all(|w| w[0] || !w[1])
    }
}

impl fmt::Debug for LatchVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, &b) in self.as_slice().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if b { "T" } else { "F" })?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressEffect {
    Advanced(usize),
    ResetAll,
    NoOp,
    /// The last latch went HIGH on this press.
    UnlockEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PressOutcome {
    pub new_state: LatchVector,
    pub effect: PressEffect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceResult {
    pub final_state: LatchVector,
    pub unlocked: bool,
}

/// Parses a key list such as `9,5,0,2` (commas and/or whitespace).
pub fn parse_keys(text: &str) -> Result<Vec<KeyId>, KeyParseError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let digit: u8 = s
                .parse()
                .map_err(|_| KeyParseError::NotADigit(s.to_string()))?;
            KeyId::new(digit).map_err(|_| KeyParseError::NotADigit(s.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyParseError {
    #[error("`{0}` is not a keypad digit 0-9")]
    NotADigit(String),
}
