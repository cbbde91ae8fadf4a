//! Replay of the twenty bench tests recorded for the built lock.
//!
//! Each published combination is pressed with 1 ms gaps (far inside the
//! hold window) and the final latch and relay states are compared with the
//! recorded observations. Relay columns are expected to match on every row.
//! Some recorded Q columns cannot be produced by any set-input model (a Q2
//! HIGH without key 0 ever pressed, for instance); those rows are listed as
//! discrepancies rather than treated as failures.

use std::fmt::Write as _;

use crate::analog::CircuitParams;
use crate::lock::{KeyId, LatchVector, LockConfig};
use crate::sim::{level_label, run_scenario, KeyEvent, OutputState, TimerMode};

/// Gap between consecutive presses during replay.
pub const REPLAY_GAP_MS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublishedRow {
    pub number: usize,
    pub keys: &'static [u8],
    pub q: [bool; 4],
    pub outputs: OutputState,
}

const H: bool = true;
const L: bool = false;

const fn row(number: usize, keys: &'static [u8], q: [bool; 4], open: bool) -> PublishedRow {
    PublishedRow {
        number,
        keys,
        q,
        outputs: if open {
            OutputState::OPEN
        } else {
            OutputState::CLOSED
        },
    }
}

/// Recorded bench results: sequence, Q0..Q3, relay state.
pub const PUBLISHED: [PublishedRow; 20] = [
    row(1, &[1, 7, 5, 2], [H, L, L, L], false),
    row(2, &[1, 5, 9, 7], [H, L, L, L], false),
    row(3, &[1, 9, 2, 2], [H, H, L, L], false),
    row(4, &[1, 5, 7, 9], [H, L, L, L], false),
    row(5, &[1, 9, 5, 3], [L, L, L, L], false),
    row(6, &[8, 4, 9, 3], [L, L, L, L], false),
    row(7, &[1, 9, 5, 2], [L, L, H, L], false),
    row(8, &[9, 5, 0, 2], [H, H, H, H], true),
    row(9, &[3, 8, 7, 9, 0], [H, H, L, L], false),
    row(10, &[1, 9, 5, 3, 5], [L, L, H, L], false),
    row(11, &[9, 5, 0, 1, 2], [H, H, H, H], true),
    row(12, &[2, 1, 9, 5, 6], [H, H, H, L], false),
    row(13, &[9, 5, 0, 6, 2], [H, H, H, H], true),
    row(14, &[1, 9, 0, 5, 3], [H, H, L, L], false),
    row(15, &[1, 9, 5, 3, 4], [H, H, H, L], false),
    row(16, &[8, 6, 1, 0, 9, 3], [L, L, L, L], false),
    row(17, &[1, 2, 9, 6, 5, 3], [H, H, H, L], false),
    row(18, &[1, 4, 9, 2, 7, 3], [H, L, L, L], false),
    row(19, &[3, 7, 5, 1, 3, 6], [L, L, L, L], false),
    row(20, &[0, 9, 1, 5, 2, 3], [L, L, L, L], false),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub published: PublishedRow,
    pub sequence: Vec<KeyId>,
    pub latches: LatchVector,
    pub outputs: OutputState,
    /// Per published Q column; latches beyond the cascade depth read LOW.
    pub q_match: [bool; 4],
}

impl Table1Row {
    pub fn simulated_q(&self, index: usize) -> bool {
        index < self.latches.len() && self.latches.get(index)
    }

    pub fn q_matches(&self) -> bool {
        self.q_match.iter().all(|&m| m)
    }

    pub fn solenoid_matches(&self) -> bool {
        self.outputs.solenoid == self.published.outputs.solenoid
    }

    pub fn indicators_match(&self) -> bool {
        self.outputs.green == self.published.outputs.green
            && self.outputs.red == self.published.outputs.red
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
    pub v_high: f64,
    pub v_low: f64,
}

impl Table1Report {
    pub fn solenoid_matches(&self) -> usize {
        self.rows.iter().filter(|r| r.solenoid_matches()).count()
    }

    pub fn indicator_matches(&self) -> usize {
        self.rows.iter().filter(|r| r.indicators_match()).count()
    }

    pub fn q_row_matches(&self) -> usize {
        self.rows.iter().filter(|r| r.q_matches()).count()
    }

    /// Relay, solenoid and both lamps agree on every row.
    pub fn outputs_reproduced(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.solenoid_matches() && r.indicators_match())
    }

    /// Rows whose Q columns disagree with the recorded values.
    pub fn discrepancies(&self) -> impl Iterator<Item = &Table1Row> {
        self.rows.iter().filter(|r| !r.q_matches())
    }

    /// Uses the given output voltages for the HIGH/LOW legend.
    pub fn with_levels(mut self, params: &CircuitParams) -> Self {
        self.v_high = params.v_high;
        self.v_low = params.v_low;
        self
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "HIGH = {:.1} V, LOW = {:.1} V; presses {} ms apart",
            self.v_high, self.v_low, REPLAY_GAP_MS
        );
        let _ = writeln!(
            s,
            "{:>3}  {:<12} {:<19} {:<8} {:<5} {:<5}  match",
            "#", "keys", "Q0..Q3 (sim)", "solenoid", "green", "red"
        );
        for r in &self.rows {
            let keys = join_keys(r.published.keys);
            let q: Vec<&str> = (0..4).map(|i| level_label(r.simulated_q(i))).collect();
            let verdict = match (r.solenoid_matches() && r.indicators_match(), r.q_matches()) {
                (true, true) => "ok",
                (true, false) => "outputs ok, Q differs",
                (false, _) => "OUTPUT MISMATCH",
            };
            let _ = writeln!(
                s,
                "{:>3}  {:<12} {:<19} {:<8} {:<5} {:<5}  {}",
                r.published.number,
                keys,
                q.join(" "),
                r.outputs.solenoid,
                r.outputs.green,
                r.outputs.red,
                verdict
            );
        }
        let n = self.rows.len();
        let _ = writeln!(s);
        let _ = writeln!(s, "solenoid: {}/{} match", self.solenoid_matches(), n);
        let _ = writeln!(s, "indicators: {}/{} match", self.indicator_matches(), n);
        let _ = writeln!(s, "Q columns: {}/{} rows match", self.q_row_matches(), n);
        let open: Vec<String> = self
            .rows
            .iter()
            .filter(|r| r.outputs == OutputState::OPEN)
            .map(|r| r.published.number.to_string())
            .collect();
        let _ = writeln!(s, "OPEN rows: {}", open.join(", "));
        let discrepancies: Vec<&Table1Row> = self.discrepancies().collect();
        if !discrepancies.is_empty() {
            let _ = writeln!(s, "Q discrepancies (simulated vs recorded):");
            for r in discrepancies {
                let sim: Vec<&str> = (0..4).map(|i| level_label(r.simulated_q(i))).collect();
                let publ: Vec<&str> = r.published.q.iter().map(|&b| level_label(b)).collect();
                let _ = writeln!(
                    s,
                    "  row {:>2} ({}): simulated {} | recorded {}",
                    r.published.number,
                    join_keys(r.published.keys),
                    sim.join(" "),
                    publ.join(" ")
                );
            }
        }
        s
    }

    pub fn render_csv(&self) -> String {
        let mut s = String::from(
            "row,keys,q0,q1,q2,q3,solenoid,green,red,\
             pub_q0,pub_q1,pub_q2,pub_q3,pub_solenoid,pub_green,pub_red,q_match,outputs_match\n",
        );
        for r in &self.rows {
            let sim: Vec<&str> = (0..4).map(|i| level_label(r.simulated_q(i))).collect();
            let publ: Vec<&str> = r.published.q.iter().map(|&b| level_label(b)).collect();
            let p = r.published.outputs;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.published.number,
                r.published
                    .keys
                    .iter()
                    .map(u8::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
                sim.join(","),
                r.outputs.solenoid,
                r.outputs.green,
                r.outputs.red,
                publ.join(","),
                p.solenoid,
                p.green,
                p.red,
                r.q_matches(),
                r.solenoid_matches() && r.indicators_match(),
            );
        }
        s
    }
}

fn join_keys(keys: &[u8]) -> String {
    keys.iter().map(u8::to_string).collect::<Vec<_>>().join(",")
}

/// Replays every recorded combination against `cfg`.
pub fn reproduce_table1(cfg: &LockConfig) -> Table1Report {
    let rows = PUBLISHED
        .iter()
        .map(|published| {
            let sequence: Vec<KeyId> = published
                .keys
                .iter()
                .map(|&d| KeyId::new(d).expect("recorded keys are keypad digits"))
                .collect();
            let events: Vec<KeyEvent> = sequence
                .iter()
                .enumerate()
                .map(|(i, &key)| KeyEvent::new(i as u64 * REPLAY_GAP_MS, key))
                .collect();
            let t_end = events.last().map_or(0, |e| e.t_ms);
            let trace = run_scenario(cfg, &events, t_end, TimerMode::OnUnlock)
                .expect("replay events are sorted and end at the last press");
            let last = trace.last().expect("trace has a start record");
            let mut row = Table1Row {
                published: *published,
                sequence,
                latches: last.latches,
                outputs: last.outputs,
                q_match: [false; 4],
            };
            for i in 0..4 {
                row.q_match[i] = row.simulated_q(i) == published.q[i];
            }
            row
        })
        .collect();
    let params = CircuitParams::default();
    Table1Report {
        rows,
        v_high: params.v_high,
        v_low: params.v_low,
    }
}
