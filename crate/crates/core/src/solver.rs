//! Client for an external Horn solver speaking SMT-LIB on stdin.

use crate::chc::Program;
use crate::smtlib::emit_smtlib;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Read when no command is given explicitly, e.g. `z3 -in`.
pub const SOLVER_ENV: &str = "HORNPAIR_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub command: Vec<String>,
    pub timeout_seconds: u64,
    pub enabled: bool,
}

impl SolverConfig {
    pub fn new(command: &str, timeout_seconds: u64) -> SolverConfig {
        SolverConfig {
            command: command.split_whitespace().map(str::to_string).collect(),
            timeout_seconds: timeout_seconds.max(1),
            enabled: true,
        }
    }

    /// The command from the environment, or a `z3` found on the path.
    pub fn from_env(timeout_seconds: u64) -> Option<SolverConfig> {
        if let Ok(cmd) = std::env::var(SOLVER_ENV) {
            if !cmd.trim().is_empty() {
                return Some(SolverConfig::new(&cmd, timeout_seconds));
            }
        }
        let path = std::env::var_os("PATH")?;
        std::env::split_paths(&path)
            .any(|dir| dir.join("z3").is_file())
            .then(|| SolverConfig::new("z3 -in", timeout_seconds))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Satisfiable, with whatever the solver printed after `sat`.
    Sat(String),
    Unsat,
    Unknown,
    Timeout,
    ProcessError(String),
}

/// Runs the solver on `p` and reads its answer; the child is killed once
/// the timeout passes and is always reaped.
pub fn external_solve(p: &Program, cfg: &SolverConfig) -> SolveOutcome {
    assert!(cfg.enabled, "external_solve called with the solver disabled");
    let Some((prog, args)) = cfg.command.split_first() else {
        return SolveOutcome::ProcessError("empty solver command".into());
    };
    let mut child = match Command::new(prog).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::null()).spawn() {
        Ok(c) => c,
        Err(e) => return SolveOutcome::ProcessError(format!("{prog}: {e}")),
    };
    let mut input = emit_smtlib(p);
    input.push_str("(check-sat)\n(get-model)\n");
    let mut stdin = child.stdin.take().expect("piped stdin");
    // written from a thread so a solver that stops reading cannot block us
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let deadline = Instant::now() + Duration::from_secs(cfg.timeout_seconds);
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break Some(s),
            Ok(None) if Instant::now() >= deadline => break None,
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                return SolveOutcome::ProcessError(e.to_string());
            }
        }
    };
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        return SolveOutcome::Timeout;
    }
    let _ = writer.join();
    let out = match reader.join() {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => return SolveOutcome::ProcessError(e.to_string()),
        Err(_) => return SolveOutcome::ProcessError("reader thread panicked".into()),
    };
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("sat") => SolveOutcome::Sat(lines.collect::<Vec<_>>().join("\n")),
        Some("unsat") => SolveOutcome::Unsat,
        Some("unknown") => SolveOutcome::Unknown,
        Some(other) => SolveOutcome::ProcessError(format!("unexpected solver output: {other}")),
        None => SolveOutcome::ProcessError("solver printed nothing".into()),
    }
}
