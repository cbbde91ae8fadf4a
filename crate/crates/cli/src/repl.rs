//! Interactive shell on a virtual clock.
//!
//! ```text
//! press 9,5,0,2
//! wait 4700
//! state
//! quit
//! ```

use std::io::{self, BufRead, Write};

use comlock::lock::parse_keys;
use comlock::sim::Simulator;

use crate::{format_record, CliConfig};

pub struct ReplSession {
    sim: Simulator,
    seen: usize,
}

pub enum Reply {
    Continue(String),
    Quit,
}

const HELP: &str = "commands: press <d[,d..]>, wait <ms>, state, help, quit";

impl ReplSession {
    pub fn new(cfg: &CliConfig) -> Self {
        ReplSession {
            sim: Simulator::new(cfg.lock.clone(), cfg.timer_mode),
            seen: 1,
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    /// Executes one command line.
    pub fn handle(&mut self, line: &str) -> Reply {
        let line = line.trim();
        let (cmd, arg) = line
            .split_once(char::is_whitespace)
            .map_or((line, ""), |(c, a)| (c, a.trim()));
        let result = match cmd {
            "" => return Reply::Continue(String::new()),
            "quit" | "exit" => return Reply::Quit,
            "help" => Err(HELP.to_string()),
            "state" => Ok(()),
            "press" => self.press(arg),
            "wait" => self.wait(arg),
            other => Err(format!("unknown command `{other}`; {HELP}")),
        };
        let mut out = String::new();
        if let Err(msg) = result {
            out.push_str(&msg);
            out.push('\n');
        }
        for r in &self.sim.trace().records[self.seen..] {
            out.push_str(&format_record(r));
            out.push('\n');
        }
        self.seen = self.sim.trace().records.len();
        out.push_str(&self.status());
        out.push('\n');
        Reply::Continue(out)
    }

    fn press(&mut self, arg: &str) -> Result<(), String> {
        let keys = parse_keys(arg).map_err(|e| format!("error: {e}"))?;
        if keys.is_empty() {
            return Err("error: press needs at least one key".to_string());
        }
        let now = self.sim.now_ms();
        for key in keys {
            self.sim
                .press(now, key)
                .map_err(|e| format!("error: {e}"))?;
        }
        Ok(())
    }

    fn wait(&mut self, arg: &str) -> Result<(), String> {
        let ms: u64 = arg
            .parse()
            .map_err(|_| format!("error: `{arg}` is not a duration in ms"))?;
        let target = self.sim.now_ms().saturating_add(ms);
        self.sim
            .advance_to(target)
            .map_err(|e| format!("error: {e}"))
    }

    pub fn status(&self) -> String {
        let q: Vec<String> = self
            .sim
            .state()
            .as_slice()
            .iter()
            .enumerate()
            .map(|(i, &b)| format!("Q{i}={}", if b { "HIGH" } else { "LOW" }))
            .collect();
        let o = self.sim.outputs();
        let mut s = format!(
            "t={} ms  {}  solenoid={} green={} red={}",
            self.sim.now_ms(),
            q.join(" "),
            o.solenoid,
            o.green,
            o.red
        );
        if let Some(at) = self.sim.pending_expiry_ms() {
            s.push_str(&format!("  (auto-reset at {at} ms)"));
        }
        s
    }
}

pub fn run_repl(cfg: &CliConfig, input: &mut dyn BufRead, out: &mut dyn Write) -> io::Result<()> {
    let mut session = ReplSession::new(cfg);
    writeln!(out, "{HELP}")?;
    writeln!(out, "{}", session.status())?;
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        match session.handle(&line) {
            Reply::Quit => return Ok(()),
            Reply::Continue(text) => {
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
    }
}
