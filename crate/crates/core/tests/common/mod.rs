//! Oracles, strategies and property checks shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use comlock::analog;
use comlock::lock::{KeyId, LatchVector, LockConfig, PressEffect};
use comlock::sim::{run_scenario, KeyEvent, OutputState, Stimulus, TimerMode};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn keys(digits: &[u8]) -> Vec<KeyId> {
    digits.iter().map(|&d| KeyId::new(d).unwrap()).collect()
}

// ---------------------------------------------------------------------------
// Oracles

/// Hand-written model of the default lock (code 9-5-0-2, resets 3/4/7/8),
/// kept apart from the library automaton. Returns final Q0..Q3 and whether
/// Q3 ever rose.
pub fn reference_default_lock(seq: &[u8]) -> ([bool; 4], bool) {
    let mut q = [false; 4];
    let mut opened = false;
    for &k in seq {
        match k {
            3 | 4 | 7 | 8 => q = [false; 4],
            9 => q[0] = true,
            5 if q[0] => q[1] = true,
            0 if q[1] => q[2] = true,
            2 if q[2] => {
                if !q[3] {
                    opened = true;
                }
                q[3] = true;
            }
            _ => {}
        }
    }
    (q, opened)
}

/// Odometer over every sequence of `length` keypad digits.
pub fn for_each_sequence(length: usize, mut f: impl FnMut(&[u8])) {
    let mut digits = vec![0u8; length];
    loop {
        f(&digits);
        let mut i = length;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < 10 {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Naive enumerator: replays every sequence through `run_sequence`.
pub fn naive_count(cfg: &LockConfig, length: usize) -> u64 {
    let mut n = 0;
    for_each_sequence(length, |seq| {
        if cfg.run_sequence(&keys(seq)).unlocked {
            n += 1;
        }
    });
    n
}

/// Enumerator over the hand-written default-lock model.
pub fn reference_count(length: usize) -> u64 {
    let mut n = 0;
    for_each_sequence(length, |seq| {
        if reference_default_lock(seq).1 {
            n += 1;
        }
    });
    n
}

// ---------------------------------------------------------------------------
// Strategies

pub fn arb_key() -> impl Strategy<Value = KeyId> {
    (0u8..10).prop_map(|d| KeyId::new(d).unwrap())
}

pub fn arb_keys(max_len: usize) -> impl Strategy<Value = Vec<KeyId>> {
    prop::collection::vec(arb_key(), 0..=max_len)
}

/// Valid configurations: a shuffled keypad split into code, resets, decoys
/// and unassigned keys.
pub fn arb_config() -> impl Strategy<Value = LockConfig> {
    (
        Just((0u8..10).collect::<Vec<_>>()).prop_shuffle(),
        1usize..=6,
        0usize..=4,
        0usize..=3,
        1u64..=10_000,
    )
        .prop_map(|(perm, n_code, n_reset, n_dummy, hold)| {
            let n_reset = n_reset.min(10 - n_code);
            let n_dummy = n_dummy.min(10 - n_code - n_reset);
            let code = &perm[..n_code];
            let resets = &perm[n_code..n_code + n_reset];
            let dummies = &perm[n_code + n_reset..n_code + n_reset + n_dummy];
            LockConfig::from_digits(code, resets, dummies, hold).unwrap()
        })
}

pub fn arb_config_and_keys(max_len: usize) -> impl Strategy<Value = (LockConfig, Vec<KeyId>)> {
    (
        prop_oneof![Just(LockConfig::default()), arb_config()],
        arb_keys(max_len),
    )
}

/// Keys with no effect on the cascade for `cfg`.
pub fn inert_keys(cfg: &LockConfig) -> Vec<KeyId> {
    let wired: BTreeSet<KeyId> = cfg.code().iter().chain(cfg.reset_keys()).copied().collect();
    KeyId::all().filter(|k| !wired.contains(k)).collect()
}

// ---------------------------------------------------------------------------
// Property checks

pub fn check_prefix_invariant(cfg: &LockConfig, seq: &[KeyId]) -> Result<(), TestCaseError> {
    let mut state = cfg.rest_state();
    for &k in seq {
        let out = cfg.press(&state, k);
        prop_assert!(out.new_state.is_prefix(), "{:?} after {}", out.new_state, k);
        if out.effect == PressEffect::UnlockEdge {
            prop_assert!(!state.is_open() && out.new_state.is_open());
        }
        state = out.new_state;
    }
    Ok(())
}

/// `seq` with decoys spliced in at `inserts` (position, decoy index) pairs.
pub fn check_dummy_invariance(
    cfg: &LockConfig,
    seq: &[KeyId],
    inserts: &[(usize, usize)],
) -> Result<(), TestCaseError> {
    let decoys = inert_keys(cfg);
    if decoys.is_empty() {
        return Ok(());
    }
    let mut padded: Vec<(KeyId, bool)> = seq.iter().map(|&k| (k, false)).collect();
    for &(pos, which) in inserts {
        let at = pos % (padded.len() + 1);
        padded.insert(at, (decoys[which % decoys.len()], true));
    }
    let trajectory = |presses: &mut dyn Iterator<Item = (KeyId, bool)>| {
        let mut state = cfg.rest_state();
        let mut unlocked = false;
        let mut states = Vec::new();
        for (k, inserted) in presses {
            let out = cfg.press(&state, k);
            unlocked |= out.effect == PressEffect::UnlockEdge;
            state = out.new_state;
            if !inserted {
                states.push(state);
            }
        }
        (states, unlocked)
    };
    let plain = trajectory(&mut seq.iter().map(|&k| (k, false)));
    let with_decoys = trajectory(&mut padded.into_iter());
    prop_assert_eq!(plain, with_decoys);
    Ok(())
}

pub fn check_reset_idempotent(
    cfg: &LockConfig,
    seq: &[KeyId],
    which: usize,
) -> Result<(), TestCaseError> {
    let resets: Vec<KeyId> = cfg.reset_keys().iter().copied().collect();
    if resets.is_empty() {
        return Ok(());
    }
    let reset = resets[which % resets.len()];
    let state = cfg.run_sequence(seq).final_state;
    let once = cfg.press(&state, reset).new_state;
    let twice = cfg.press(&once, reset).new_state;
    prop_assert_eq!(once, twice);
    prop_assert!(once.is_cleared());
    Ok(())
}

/// Presses spaced so that the whole scenario fits inside one hold window.
pub fn tight_events(cfg: &LockConfig, seq: &[KeyId], start: u64, gaps: &[u64]) -> Vec<KeyEvent> {
    let budget = (cfg.hold_time_ms() - 1) / (seq.len() as u64 + 1);
    let mut t = start;
    seq.iter()
        .enumerate()
        .map(|(i, &k)| {
            if i > 0 {
                t += gaps.get(i).copied().unwrap_or(0) % (budget + 1);
            }
            KeyEvent::new(t, k)
        })
        .collect()
}

/// Timed replay agrees with the time-free fold when gaps stay inside τ.
pub fn check_solenoid_equivalence(
    cfg: &LockConfig,
    seq: &[KeyId],
    gaps: &[u64],
) -> Result<(), TestCaseError> {
    let events = tight_events(cfg, seq, 0, gaps);
    let t_end = events.last().map_or(0, |e| e.t_ms);
    let trace = run_scenario(cfg, &events, t_end, TimerMode::OnUnlock).unwrap();
    prop_assert_eq!(trace.hold_expiries().count(), 0);
    // record i + 1 follows press i
    let mut state = cfg.rest_state();
    for (i, &k) in seq.iter().enumerate() {
        state = cfg.press(&state, k).new_state;
        prop_assert_eq!(trace.records[i + 1].latches, state);
    }
    let folded = cfg.run_sequence(seq);
    let last = trace.last().unwrap();
    prop_assert_eq!(
        last.outputs.solenoid == comlock::sim::Solenoid::Open,
        folded.final_state.is_open()
    );
    prop_assert_eq!(last.outputs, comlock::sim::outputs_of(&folded.final_state));
    Ok(())
}

pub fn check_time_shift(
    cfg: &LockConfig,
    seq: &[KeyId],
    gaps: &[u64],
    offset: u64,
    tail: u64,
) -> Result<(), TestCaseError> {
    let mut t = 0;
    let events: Vec<KeyEvent> = seq
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            t += gaps.get(i).copied().unwrap_or(0);
            KeyEvent::new(t, k)
        })
        .collect();
    let t_end = t + tail;
    let shifted: Vec<KeyEvent> = events
        .iter()
        .map(|e| KeyEvent::new(e.t_ms + offset, e.key))
        .collect();
    let a = run_scenario(cfg, &events, t_end, TimerMode::OnUnlock).unwrap();
    let b = run_scenario(cfg, &shifted, t_end + offset, TimerMode::OnUnlock).unwrap();
    prop_assert_eq!(a.records.len(), b.records.len());
    // the Start record sits at t = 0 in both runs
    for (ra, rb) in a.records.iter().zip(&b.records).skip(1) {
        prop_assert_eq!(ra.t_ms + offset, rb.t_ms);
        prop_assert_eq!(ra.stimulus, rb.stimulus);
        prop_assert_eq!(ra.latches, rb.latches);
        prop_assert_eq!(ra.outputs, rb.outputs);
    }
    Ok(())
}

/// Random lead-in, a reset, then the code: the last press opens the lock.
pub fn check_auto_relock(
    cfg: &LockConfig,
    lead_in: &[KeyId],
    gaps: &[u64],
    start: u64,
    extra: u64,
) -> Result<(), TestCaseError> {
    let Some(&reset) = cfg.reset_keys().iter().next() else {
        return Ok(());
    };
    let mut seq = lead_in.to_vec();
    seq.push(reset);
    seq.extend_from_slice(cfg.code());
    let events = tight_events(cfg, &seq, start, gaps);
    let t_unlock = events.last().unwrap().t_ms;
    let hold = cfg.hold_time_ms();
    let trace = run_scenario(cfg, &events, t_unlock + hold + extra, TimerMode::OnUnlock).unwrap();
    let expiries: Vec<u64> = trace.hold_expiries().map(|r| r.t_ms).collect();
    prop_assert_eq!(expiries, vec![t_unlock + hold]);
    let last = trace.last().unwrap();
    prop_assert_eq!(last.stimulus, Stimulus::HoldExpired);
    prop_assert_eq!(last.outputs, OutputState::CLOSED);
    Ok(())
}

pub fn check_trace_shape(
    cfg: &LockConfig,
    seq: &[KeyId],
    gaps: &[u64],
) -> Result<(), TestCaseError> {
    let mut t = 0;
    let events: Vec<KeyEvent> = seq
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            t += gaps.get(i).copied().unwrap_or(0);
            KeyEvent::new(t, k)
        })
        .collect();
    for mode in [TimerMode::OnUnlock, TimerMode::OnFirstPress] {
        let trace = run_scenario(cfg, &events, t + 2 * cfg.hold_time_ms(), mode).unwrap();
        prop_assert!(trace.records.windows(2).all(|w| w[0].t_ms <= w[1].t_ms));
        for r in &trace.records {
            prop_assert!(r.latches.is_prefix());
            prop_assert_eq!(
                r.outputs.green == comlock::sim::Lamp::On,
                r.outputs.red == comlock::sim::Lamp::Off
            );
            prop_assert_eq!(
                r.outputs.solenoid == comlock::sim::Solenoid::Open,
                r.outputs.green == comlock::sim::Lamp::On
            );
        }
        let presses = trace
            .records
            .iter()
            .filter(|r| matches!(r.stimulus, Stimulus::Press(_)))
            .count();
        prop_assert_eq!(presses, seq.len());
    }
    Ok(())
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn check_discharge_semigroup(
    v0: f64,
    r: f64,
    c: f64,
    t1: f64,
    t2: f64,
) -> Result<(), TestCaseError> {
    let step = analog::discharge_voltage(v0, r, c, t1).unwrap();
    let two_step = analog::discharge_voltage(step, r, c, t2).unwrap();
    let direct = analog::discharge_voltage(v0, r, c, t1 + t2).unwrap();
    prop_assert!(rel_close(two_step, direct, 1e-9), "{two_step} vs {direct}");
    Ok(())
}

pub fn check_threshold_round_trip(v0: f64, r: f64, c: f64, t: f64) -> Result<(), TestCaseError> {
    let vth = analog::discharge_voltage(v0, r, c, t).unwrap();
    let back = analog::time_to_threshold(v0, vth, r, c).unwrap();
    let again = analog::discharge_voltage(v0, r, c, back).unwrap();
    prop_assert!(rel_close(again, vth, 1e-9), "{again} vs {vth}");
    if t > 0.0 {
        prop_assert!(rel_close(back, t, 1e-9), "{back} vs {t}");
    }
    Ok(())
}

pub fn check_kcl(vcc: f64, vbe_frac: f64, rb: f64, hfe: f64) -> Result<(), TestCaseError> {
    let vbe = vcc * vbe_frac;
    let op = analog::bjt_operating_point(vcc, vbe, rb, hfe).unwrap();
    prop_assert_eq!(op.i_e, op.i_b + op.i_c);
    prop_assert!(op.i_b > 0.0 && op.i_c > 0.0 && op.i_e > 0.0);
    Ok(())
}

pub fn latch(q: &[bool]) -> LatchVector {
    LatchVector::from_bools(q).unwrap()
}
