//! Exhaustive audit of the key-sequence space.
//!
//! Every sequence of a given length over the full ten-key pad is replayed
//! through the lock and the unlocking ones are counted. The space is split by
//! leading keys and the partial counts are summed on a rayon pool; integer
//! addition makes the result independent of worker count and scheduling.

use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::lock::{KeyId, LatchVector, LockConfig, PressEffect, KEYPAD_SIZE};

/// Longest sequence length the auditor will enumerate (10^8 sequences).
pub const MAX_AUDIT_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzerError {
    #[error("k = {k} is outside 0..={n}")]
    KOutOfRange { n: u64, k: u64 },
    #[error("C({n}, {k}) overflows 128 bits")]
    Overflow { n: u64, k: u64 },
    #[error("length out of range: {0} (allowed 1..={MAX_AUDIT_LEN})")]
    LengthOutOfRange(usize),
    #[error("invalid range {l_min}..={l_max}")]
    EmptyRange { l_min: usize, l_max: usize },
    #[error("prefix of {prefix} keys is longer than the sequence length {length}")]
    PrefixTooLong { prefix: usize, length: usize },
}

/// Binomial coefficient `n! / (k! (n−k)!)`.
///
/// Uses the multiplicative form; each intermediate `C(n−k+i, i)` is an
/// integer so the division is always exact.
pub fn nominal_combinations(n: u64, k: u64) -> Result<u128, AnalyzerError> {
    if k > n {
        return Err(AnalyzerError::KOutOfRange { n, k });
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or(AnalyzerError::Overflow { n, k })?
            / i;
    }
    Ok(acc)
}

pub fn is_unlocking(cfg: &LockConfig, seq: &[KeyId]) -> bool {
    cfg.run_sequence(seq).unlocked
}

/// Result of auditing one sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyspaceStats {
    pub length: usize,
    pub total_sequences: u64,
    pub unlocking: u64,
    /// Unordered code choices, `C(10, code length)`.
    pub nominal_claim: u128,
}

impl KeyspaceStats {
    /// Exact chance that a uniformly random sequence of this length opens
    /// the lock.
    pub fn probability(&self) -> Ratio<u64> {
        Ratio::new(self.unlocking, self.total_sequences)
    }

    pub fn probability_f64(&self) -> f64 {
        self.unlocking as f64 / self.total_sequences as f64
    }

    pub const CSV_HEADER: &'static str = "length,total,unlocking,probability,nominal_claim";
}

impl fmt::Display for KeyspaceStats {
    /// One CSV row under [`KeyspaceStats::CSV_HEADER`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.probability();
        write!(
            f,
            "{},{},{},{}/{},{}",
            self.length,
            self.total_sequences,
            self.unlocking,
            p.numer(),
            p.denom(),
            self.nominal_claim
        )
    }
}

fn check_length(length: usize) -> Result<(), AnalyzerError> {
    if (1..=MAX_AUDIT_LEN).contains(&length) {
        Ok(())
    } else {
        Err(AnalyzerError::LengthOutOfRange(length))
    }
}

fn subtree_count(cfg: &LockConfig, state: LatchVector, unlocked: bool, remaining: usize) -> u64 {
    if remaining == 0 {
        return u64::from(unlocked);
    }
    KeyId::all()
        .map(|key| {
            let out = cfg.press(&state, key);
            let unlocked = unlocked || out.effect == PressEffect::UnlockEdge;
            subtree_count(cfg, out.new_state, unlocked, remaining - 1)
        })
        .sum()
}

/// Counts unlocking sequences of `length` that start with `prefix`.
pub fn count_with_prefix(
    cfg: &LockConfig,
    prefix: &[KeyId],
    length: usize,
) -> Result<u64, AnalyzerError> {
    if prefix.len() > length {
        return Err(AnalyzerError::PrefixTooLong {
            prefix: prefix.len(),
            length,
        });
    }
    let head = cfg.run_sequence(prefix);
    Ok(subtree_count(
        cfg,
        head.final_state,
        head.unlocked,
        length - prefix.len(),
    ))
}

/// All `KEYPAD_SIZE^len` key prefixes in lexicographic order.
pub fn prefixes(len: usize) -> Vec<Vec<KeyId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                KeyId::all().map(move |k| {
                    let mut next = p.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

/// Counts unlocking sequences by splitting the space on the first
/// `prefix_len` keys and summing partial counts in parallel.
pub fn count_unlocking_partitioned(
    cfg: &LockConfig,
    length: usize,
    prefix_len: usize,
) -> Result<u64, AnalyzerError> {
    check_length(length)?;
    if prefix_len > length {
        return Err(AnalyzerError::PrefixTooLong {
            prefix: prefix_len,
            length,
        });
    }
    let parts = prefixes(prefix_len);
    parts
        .par_iter()
        .map(|p| count_with_prefix(cfg, p, length))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

pub fn count_unlocking(cfg: &LockConfig, length: usize) -> Result<KeyspaceStats, AnalyzerError> {
    check_length(length)?;
    let unlocking = count_unlocking_partitioned(cfg, length, length.min(2))?;
    Ok(KeyspaceStats {
        length,
        total_sequences: (KEYPAD_SIZE as u64).pow(length as u32),
        unlocking,
        nominal_claim: nominal_combinations(KEYPAD_SIZE as u64, cfg.code_len() as u64)?,
    })
}

pub fn analyze_range(
    cfg: &LockConfig,
    l_min: usize,
    l_max: usize,
) -> Result<Vec<KeyspaceStats>, AnalyzerError> {
    check_length(l_min)?;
    check_length(l_max)?;
    if l_min > l_max {
        return Err(AnalyzerError::EmptyRange { l_min, l_max });
    }
    (l_min..=l_max).map(|l| count_unlocking(cfg, l)).collect()
}
