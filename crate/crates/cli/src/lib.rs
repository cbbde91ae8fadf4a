//! Command-line front end for the `comlock` simulator.
//!
//! Exit codes: 0 on success, 1 for configuration or validation failures
//! (including a recorded-table relay mismatch), 2 for unreadable or malformed
//! input.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use comlock::analog::{self, CircuitParams};
use comlock::analyzer::{self, KeyspaceStats};
use comlock::lock::{parse_keys, KeyId, LockConfig};
use comlock::scenario::parse_scenario;
use comlock::sim::{level_label, run_scenario, Stimulus, TimerMode, TraceRecord};
use comlock::table1::reproduce_table1;

pub mod repl;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "comlock",
    version,
    about = "Keypad combination lock simulator and keyspace auditor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub lock: LockArgs,

    #[command(flatten)]
    pub circuit: CircuitArgs,

    /// Output format (default: csv for simulate/analyze, text otherwise)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a scenario file and emit the CSV trace
    Simulate {
        scenario: PathBuf,
        /// Stop the clock here (default: last event plus the hold time)
        #[arg(long)]
        t_end: Option<u64>,
    },
    /// Replay the twenty recorded bench combinations
    Table1,
    /// Count unlocking sequences for each length in lmin..=lmax
    Analyze { lmin: usize, lmax: usize },
    /// Print hold timing, relay driver operating point and supply figures
    Circuit,
    /// Interactive shell on a virtual clock
    Repl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum TimerArg {
    #[default]
    OnUnlock,
    OnFirstPress,
}

impl From<TimerArg> for TimerMode {
    fn from(t: TimerArg) -> Self {
        match t {
            TimerArg::OnUnlock => TimerMode::OnUnlock,
            TimerArg::OnFirstPress => TimerMode::OnFirstPress,
        }
    }
}

#[derive(Debug, Clone, Args, Default)]
pub struct LockArgs {
    /// Code keys in order, e.g. 9,5,0,2
    #[arg(long, global = true)]
    pub code: Option<String>,
    /// Reset keys, e.g. 3,4,7,8
    #[arg(long, global = true)]
    pub reset_keys: Option<String>,
    /// Decoy keys, e.g. 1,6
    #[arg(long, global = true)]
    pub dummy_keys: Option<String>,
    /// Hold window in ms (default: R6·C1)
    #[arg(long, global = true)]
    pub hold_ms: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub timer_mode: TimerArg,
}

macro_rules! circuit_args {
    ($($field:ident => $flag:literal : $help:literal),* $(,)?) => {
        #[derive(Debug, Clone, Args, Default)]
        pub struct CircuitArgs {
            $(
                #[arg(long = $flag, global = true, value_name = "VALUE", help = $help,
                      help_heading = "Circuit overrides")]
                pub $field: Option<f64>,
            )*
        }

        impl CircuitArgs {
            /// Applies overrides; returns the params and the overridden flags.
            pub fn apply(&self, mut params: CircuitParams) -> (CircuitParams, BTreeSet<&'static str>) {
                let mut touched = BTreeSet::new();
                $(
                    if let Some(v) = self.$field {
                        params.$field = v;
                        touched.insert(stringify!($field));
                    }
                )*
                (params, touched)
            }
        }
    };
}

circuit_args! {
    r1 => "r1": "R1 (ohm)", r2 => "r2": "R2 (ohm)", r3 => "r3": "R3 (ohm)",
    r4 => "r4": "R4 (ohm)", r5 => "r5": "R5 (ohm)",
    r6 => "r6": "R6, hold timing resistor (ohm)",
    r7 => "r7": "R7 (ohm)", r8 => "r8": "R8 (ohm)", r9 => "r9": "R9 (ohm)",
    r10 => "r10": "R10, relay driver base resistor (ohm)",
    c1 => "c1": "C1, hold timing capacitor (F)",
    c2 => "c2": "C2, reservoir capacitor (F)", c3 => "c3": "C3 (F)", c4 => "c4": "C4 (F)",
    c5 => "c5": "C5 (F)",
    vcc => "vcc": "Supply rail (V)",
    vbe => "vbe": "Driver base-emitter drop (V)",
    hfe => "hfe": "Driver current gain",
    v_high => "v-high": "Measured HIGH level (V)",
    v_low => "v-low": "Measured LOW level (V)",
    mains_v => "mains-v": "Mains voltage, RMS (V)",
    mains_f => "mains-f": "Mains frequency (Hz)",
    secondary_v => "secondary-v": "Transformer secondary, RMS (V)",
    load_a => "load-a": "Worst-case load current (A)",
    regulator_out_v => "regulator-out-v": "Regulator output (V)",
    regulator_dropout_v => "regulator-dropout-v": "Regulator dropout (V)",
    diode_drop_v => "diode-drop-v": "Bridge diode forward drop (V)",
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CliError {
    fn invalid(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: EXIT_INVALID,
            error: error.into(),
        }
    }

    fn input(error: impl Into<anyhow::Error>) -> Self {
        CliError {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub lock: LockConfig,
    pub timer_mode: TimerMode,
    pub params: CircuitParams,
    pub overridden: BTreeSet<&'static str>,
}

impl CliConfig {
    pub fn resolve(lock: &LockArgs, circuit: &CircuitArgs) -> Result<Self, CliError> {
        let (params, overridden) = circuit.apply(CircuitParams::default());
        let params = params.validate().map_err(CliError::invalid)?;
        let defaults = LockConfig::default();
        let keys = |text: &Option<String>, fallback: Vec<KeyId>| -> Result<Vec<KeyId>, CliError> {
            match text {
                Some(t) => parse_keys(t).map_err(CliError::invalid),
                None => Ok(fallback),
            }
        };
        let code = keys(&lock.code, defaults.code().to_vec())?;
        let resets = keys(
            &lock.reset_keys,
            defaults.reset_keys().iter().copied().collect(),
        )?;
        let dummies = keys(
            &lock.dummy_keys,
            defaults.dummy_keys().iter().copied().collect(),
        )?;
        let hold = lock
            .hold_ms
            .unwrap_or_else(|| analog::derive_hold_time(&params));
        let cfg = LockConfig::new(
            code,
            resets.into_iter().collect(),
            dummies.into_iter().collect(),
            hold,
        )
        .context("invalid lock configuration")
        .map_err(CliError::invalid)?;
        Ok(CliConfig {
            lock: cfg,
            timer_mode: lock.timer_mode.into(),
            params,
            overridden,
        })
    }

    fn source(&self, name: &str) -> &'static str {
        if self.overridden.contains(name) {
            "override"
        } else {
            "default"
        }
    }
}

/// Parses `args` and runs the selected command. Returns the exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {:#}", e.error);
            e.code
        }
    }
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = CliConfig::resolve(&cli.lock, &cli.circuit)?;
    let (report, code) = match &cli.command {
        Command::Simulate { scenario, t_end } => {
            (cmd_simulate(&cfg, scenario, *t_end, cli.format)?, EXIT_OK)
        }
        Command::Table1 => cmd_table1(&cfg, cli.format),
        Command::Analyze { lmin, lmax } => (cmd_analyze(&cfg, *lmin, *lmax, cli.format)?, EXIT_OK),
        Command::Circuit => (cmd_circuit(&cfg, cli.format)?, EXIT_OK),
        Command::Repl => {
            repl::run_repl(&cfg, stdin, stdout)
                .context("terminal I/O failed")
                .map_err(CliError::input)?;
            return Ok(EXIT_OK);
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, report)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(CliError::input)?,
        None => stdout
            .write_all(report.as_bytes())
            .context("cannot write to stdout")
            .map_err(CliError::input)?,
    }
    Ok(code)
}

pub fn cmd_simulate(
    cfg: &CliConfig,
    path: &PathBuf,
    t_end: Option<u64>,
    format: Option<Format>,
) -> Result<String, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))
        .map_err(CliError::input)?;
    let events = parse_scenario(&text)
        .with_context(|| format!("{}", path.display()))
        .map_err(CliError::input)?;
    let last = events.last().map_or(0, |e| e.t_ms);
    let t_end = t_end.unwrap_or(last + cfg.lock.hold_time_ms());
    let trace =
        run_scenario(&cfg.lock, &events, t_end, cfg.timer_mode).map_err(CliError::invalid)?;
    Ok(match format.unwrap_or(Format::Csv) {
        Format::Csv => trace.to_csv(),
        Format::Text => trace
            .records
            .iter()
            .map(|r| format_record(r) + "\n")
            .collect(),
    })
}

pub fn format_record(r: &TraceRecord) -> String {
    let q: Vec<String> = r
        .latches
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &b)| format!("Q{i}={}", level_label(b)))
        .collect();
    let stim = match r.stimulus {
        Stimulus::Press(k) => format!("press {k}"),
        Stimulus::Start => "start".to_string(),
        Stimulus::HoldExpired => "hold expired".to_string(),
    };
    format!(
        "{:>8} ms  {:<12} {}  solenoid={} green={} red={}",
        r.t_ms,
        stim,
        q.join(" "),
        r.outputs.solenoid,
        r.outputs.green,
        r.outputs.red
    )
}

pub fn cmd_table1(cfg: &CliConfig, format: Option<Format>) -> (String, i32) {
    let report = reproduce_table1(&cfg.lock).with_levels(&cfg.params);
    let text = match format.unwrap_or(Format::Text) {
        Format::Text => report.render_text(),
        Format::Csv => report.render_csv(),
    };
    let code = if report.outputs_reproduced() {
        EXIT_OK
    } else {
        EXIT_INVALID
    };
    (text, code)
}

pub fn cmd_analyze(
    cfg: &CliConfig,
    lmin: usize,
    lmax: usize,
    format: Option<Format>,
) -> Result<String, CliError> {
    let stats = analyzer::analyze_range(&cfg.lock, lmin, lmax).map_err(CliError::invalid)?;
    let nominal = analyzer::nominal_combinations(10, cfg.lock.code_len() as u64)
        .map_err(CliError::invalid)?;
    let mut out = String::new();
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.push_str(KeyspaceStats::CSV_HEADER);
            out.push('\n');
            for s in &stats {
                out.push_str(&format!("{s}\n"));
            }
        }
        Format::Text => {
            out.push_str(&format!(
                "nominal code choices C(10,{}) = {nominal} (unordered; \"1 in {nominal}\")\n",
                cfg.lock.code_len()
            ));
            out.push_str("ordered sequences over all 10 keys, uniform guessing:\n");
            out.push_str(&format!(
                "{:>6} {:>12} {:>10} {:>16} {:>14}\n",
                "length", "total", "unlocking", "probability", "≈"
            ));
            for s in &stats {
                let p = s.probability();
                out.push_str(&format!(
                    "{:>6} {:>12} {:>10} {:>16} {:>14.6e}\n",
                    s.length,
                    s.total_sequences,
                    s.unlocking,
                    format!("{}/{}", p.numer(), p.denom()),
                    s.probability_f64()
                ));
            }
        }
    }
    Ok(out)
}

pub fn cmd_circuit(cfg: &CliConfig, format: Option<Format>) -> Result<String, CliError> {
    let p = &cfg.params;
    let tau = analog::time_constant(p.r6, p.c1);
    let hold = analog::derive_hold_time(p);
    let op = p.output_stage().map_err(CliError::invalid)?;
    let q0_rest = analog::divider_out(p.vcc, p.r9, p.r5).map_err(CliError::invalid)?;
    let reset_in = analog::divider_out(p.vcc, p.r5, p.r8).map_err(CliError::invalid)?;
    let v_at_tau = analog::discharge_voltage(p.vcc, p.r6, p.c1, tau).map_err(CliError::invalid)?;
    let t_half =
        analog::time_to_threshold(p.vcc, p.vcc / 2.0, p.r6, p.c1).map_err(CliError::invalid)?;
    let supply = analog::supply_check(p).map_err(CliError::invalid)?;

    let src = |names: &[&str]| -> String {
        let over: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| cfg.source(n) == "override")
            .collect();
        if over.is_empty() {
            "default".to_string()
        } else {
            format!("override: {}", over.join(" "))
        }
    };

    // (quantity, value, unit, display precision, provenance)
    let rows: Vec<(&str, f64, &str, usize, String)> = vec![
        ("tau (R6*C1)", tau, "s", 3, src(&["r6", "c1"])),
        ("hold time", hold as f64, "ms", 0, src(&["r6", "c1"])),
        ("V_Q3 (Vcc - Vbe)", op.v_q3, "V", 3, src(&["vcc", "vbe"])),
        (
            "I_B (V_Q3 / R10)",
            op.i_b * 1e3,
            "mA",
            3,
            src(&["vcc", "vbe", "r10"]),
        ),
        (
            "I_C (hFE * I_B)",
            op.i_c,
            "A",
            3,
            src(&["vcc", "vbe", "r10", "hfe"]),
        ),
        (
            "I_E (I_B + I_C)",
            op.i_e,
            "A",
            3,
            src(&["vcc", "vbe", "r10", "hfe"]),
        ),
        (
            "Q0 rest divider (R9/R5)",
            q0_rest,
            "V",
            3,
            src(&["vcc", "r9", "r5"]),
        ),
        (
            "reset divider (R5/R8)",
            reset_in,
            "V",
            3,
            src(&["vcc", "r5", "r8"]),
        ),
        (
            "C1 voltage after tau",
            v_at_tau,
            "V",
            3,
            src(&["vcc", "r6", "c1"]),
        ),
        (
            "C1 time to Vcc/2",
            t_half,
            "s",
            3,
            src(&["vcc", "r6", "c1"]),
        ),
        (
            "rectified peak",
            supply.rectified_peak_v,
            "V",
            3,
            src(&["secondary_v", "diode_drop_v"]),
        ),
        (
            "ripple (I/(2fC2))",
            supply.ripple_v,
            "V",
            3,
            src(&["load_a", "mains_f", "c2"]),
        ),
        (
            "rail trough",
            supply.trough_v,
            "V",
            3,
            src(&["secondary_v", "load_a", "c2"]),
        ),
    ];

    let mut out = String::new();
    match format.unwrap_or(Format::Text) {
        Format::Csv => {
            out.push_str("quantity,value,unit,source\n");
            for (name, value, unit, _, source) in &rows {
                out.push_str(&format!("{name},{value},{unit},{source}\n"));
            }
            out.push_str(&format!(
                "regulates at trough,{},bool,{}\n",
                supply.regulates_at_trough,
                src(&["regulator_out_v", "regulator_dropout_v"])
            ));
        }
        Format::Text => {
            for (name, value, unit, prec, source) in &rows {
                out.push_str(&format!(
                    "{name:<26} {value:>12.prec$} {unit:<3} [{source}]\n"
                ));
            }
            let verdict = |ok: bool| {
                if ok {
                    "in regulation"
                } else {
                    "OUT of regulation"
                }
            };
            out.push_str(&format!(
                "regulator ({:.0} V, {:.1} V dropout): {} at peak, {} at trough ({} A load)\n",
                p.regulator_out_v,
                p.regulator_dropout_v,
                verdict(supply.regulates_at_peak),
                verdict(supply.regulates_at_trough),
                p.load_a
            ));
        }
    }
    Ok(out)
}
