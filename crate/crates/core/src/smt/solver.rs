//! SMT-LIB solver subprocess sessions.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::{parse_value, ModelValue};
use super::sexp::{self, Sexp};

/// Optional solver features the encoder may rely on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    /// `str.from_int`, `str.from_code`, `bv2nat`, `int2bv`.
    pub numeric_to_string: bool,
    /// `((as const (Array ..)) v)`.
    pub constant_arrays: bool,
}

impl Default for Capabilities {
    fn default() -> Self {
        Capabilities {
            numeric_to_string: true,
            constant_arrays: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub timeout_ms: u64,
    pub seed: u64,
    pub capabilities: Capabilities,
    /// Memory ceiling in megabytes, passed to solvers that accept one.
    pub memory_mb: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path: PathBuf::from("z3"),
            timeout_ms: 60_000,
            seed: 0,
            capabilities: Capabilities::default(),
            memory_mb: None,
        }
    }
}

impl SolverConfig {
    /// Command line for an interactive session reading from stdin.
    fn command(&self) -> Command {
        let mut cmd = Command::new(&self.path);
        let name = self
            .path
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_default();
        if name.starts_with("z3") {
            cmd.arg("-in");
            if let Some(mb) = self.memory_mb {
                cmd.arg(format!("memory_max_size={mb}"));
            }
        } else if name.starts_with("cvc") {
            cmd.args(["--lang", "smt2", "--incremental"]);
        }
        cmd
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver '{path}': {source}")]
    Spawn {
        path: String,
        source: std::io::Error,
    },
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("solver exited unexpectedly")]
    Exited,
    #[error("solver timed out")]
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    Unsat,
    Unknown(String),
}

/// A running solver process. Not shareable between threads.
pub struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    timeout: Duration,
    /// Text sent so far, kept for `--keep-smt`.
    transcript: String,
}

impl Session {
    pub fn start(cfg: &SolverConfig) -> Result<Session, SolverError> {
        assert!(cfg.timeout_ms > 0, "solver timeout must be positive");
        let mut child = cfg
            .command()
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                path: cfg.path.display().to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Session {
            child,
            stdin,
            lines: rx,
            timeout: Duration::from_millis(cfg.timeout_ms),
            transcript: String::new(),
        })
    }

    pub fn send(&mut self, text: &str) -> Result<(), SolverError> {
        self.transcript.push_str(text);
        if !text.ends_with('\n') {
            self.transcript.push('\n');
        }
        self.stdin.write_all(text.as_bytes())?;
        self.stdin.write_all(b"\n")?;
        self.stdin.flush()?;
        Ok(())
    }

    pub fn transcript(&self) -> &str {
        &self.transcript
    }

    /// Read one complete response expression.
    fn read_response(&mut self, deadline: Instant) -> Result<Sexp, SolverError> {
        let mut buf = String::new();
        loop {
            let now = Instant::now();
            if now >= deadline {
                let _ = self.child.kill();
                return Err(SolverError::Timeout);
            }
            match self.lines.recv_timeout(deadline - now) {
                Ok(line) => {
                    buf.push_str(&line);
                    buf.push('\n');
                    if sexp::is_complete(&buf) {
                        let mut all = sexp::parse_all(&buf).map_err(|e| SolverError::Malformed(format!("{e}: {buf}")))?;
                        let first = all.remove(0);
                        if let Some(items) = first.list() {
                            if items.first().and_then(Sexp::atom) == Some("error") {
                                let msg = items.get(1).map(|m| match m {
                                    Sexp::Str(s) => s.clone(),
                                    other => other.to_string(),
                                });
                                return Err(SolverError::Solver(msg.unwrap_or_default()));
                            }
                        }
                        return Ok(first);
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    return Err(SolverError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => return Err(SolverError::Exited),
            }
        }
    }

    pub fn check_sat(&mut self) -> Result<CheckResult, SolverError> {
        self.send("(check-sat)")?;
        let deadline = Instant::now() + self.timeout;
        match self.read_response(deadline) {
            Ok(Sexp::Atom(a)) => match a.as_str() {
                "sat" => Ok(CheckResult::Sat),
                "unsat" => Ok(CheckResult::Unsat),
                "unknown" => {
                    let reason = self.reason_unknown().unwrap_or_else(|_| "unknown".into());
                    Ok(CheckResult::Unknown(reason))
                }
                other => Err(SolverError::Malformed(other.to_string())),
            },
            Ok(other) => Err(SolverError::Malformed(other.to_string())),
            Err(SolverError::Timeout) => Ok(CheckResult::Unknown("timeout".into())),
            Err(e) => Err(e),
        }
    }

    fn reason_unknown(&mut self) -> Result<String, SolverError> {
        self.send("(get-info :reason-unknown)")?;
        let r = self.read_response(Instant::now() + self.timeout)?;
        Ok(r.list()
            .and_then(|l| l.get(1))
            .map(|s| match s {
                Sexp::Str(s) => s.clone(),
                other => other.to_string(),
            })
            .unwrap_or_else(|| r.to_string()))
    }

    /// Values of `terms` (SMT-LIB text) in the current model, in order.
    pub fn get_values(&mut self, terms: &[String]) -> Result<Vec<ModelValue>, SolverError> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::with_capacity(terms.len());
        // keep requests moderately sized
        for chunk in terms.chunks(500) {
            self.send(&format!("(get-value ({}))", chunk.join(" ")))?;
            let r = self.read_response(Instant::now() + self.timeout)?;
            let pairs = r
                .list()
                .ok_or_else(|| SolverError::Malformed(r.to_string()))?;
            if pairs.len() != chunk.len() {
                return Err(SolverError::Malformed(format!(
                    "expected {} values, got {}",
                    chunk.len(),
                    pairs.len()
                )));
            }
            for p in pairs {
                let v = p
                    .list()
                    .and_then(|l| l.get(1))
                    .ok_or_else(|| SolverError::Malformed(p.to_string()))?;
                out.push(parse_value(v).map_err(SolverError::Malformed)?);
            }
        }
        Ok(out)
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.stdin.flush();
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Solver result with the requested values for a satisfiable problem.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Sat(Vec<ModelValue>),
    Unsat,
    Unknown(String),
}

/// One-shot solve: send `problem` (declarations and assertions), check it
/// and fetch the values of `terms`.
pub fn solve(problem: &str, terms: &[String], cfg: &SolverConfig) -> Result<Outcome, SolverError> {
    let mut s = Session::start(cfg)?;
    s.send(problem)?;
    match s.check_sat()? {
        CheckResult::Sat => Ok(Outcome::Sat(s.get_values(terms)?)),
        CheckResult::Unsat => Ok(Outcome::Unsat),
        CheckResult::Unknown(r) => Ok(Outcome::Unknown(r)),
    }
}

/// Path of the default solver: `TRACEGEN_SOLVER` if set, otherwise `z3`.
pub fn default_solver_path() -> PathBuf {
    std::env::var_os("TRACEGEN_SOLVER")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("z3"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig {
        SolverConfig {
            path: default_solver_path(),
            ..Default::default()
        }
    }

    #[test]
    fn false_is_unsat() {
        assert_eq!(solve("(assert false)", &[], &cfg()).unwrap(), Outcome::Unsat);
    }

    #[test]
    fn values_and_errors() {
        let p = "(declare-const x (_ BitVec 32))\n(assert (= (bvmul x #x00000002) #x0000000a))";
        let out = solve(p, &["x".into()], &cfg()).unwrap();
        assert_eq!(out, Outcome::Sat(vec![ModelValue::Bv { width: 32, bits: 5 }]));
        let err = solve("(assert (= y 1))", &[], &cfg()).unwrap_err();
        assert!(matches!(err, SolverError::Solver(_)), "{err}");
    }

    #[test]
    fn tiny_timeout_reports_unknown() {
        // a hard multiplication inversion that will not finish in 1 ms
        let p = "(declare-const a (_ BitVec 64))\n(declare-const b (_ BitVec 64))\n\
                 (assert (= (bvmul a b) #x7fffffffffffffd1))\n(assert (bvugt a #x0000000000000001))\n(assert (bvugt b #x0000000000000001))";
        let c = SolverConfig {
            timeout_ms: 1,
            ..cfg()
        };
        match solve(p, &["a".into()], &c).unwrap() {
            Outcome::Unknown(r) => assert_eq!(r, "timeout"),
            other => panic!("expected a timeout, got {other:?}"),
        }
    }

    #[test]
    fn missing_binary() {
        let c = SolverConfig {
            path: "/nonexistent/solver".into(),
            ..Default::default()
        };
        assert!(matches!(Session::start(&c), Err(SolverError::Spawn { .. })));
    }
}
