//! Compile-and-run judge.
//!
//! Each invocation gets its own scratch directory. Programs run in their own
//! process group with `RLIMIT_AS` and `RLIMIT_CPU` applied, a wall-clock
//! deadline, a scrubbed environment and, where the kernel allows it, a fresh
//! network namespace. This is not a hardened sandbox.

use std::io::{Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bytes of program output kept per stream; the rest is drained and dropped.
const OUTPUT_CAP: usize = 16 << 20;
const DIAGNOSTICS_CHARS: usize = 2000;
const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub stdin: String,
    pub expected_stdout: String,
}

impl TestCase {
    pub fn new(stdin: impl Into<String>, expected_stdout: impl Into<String>) -> Self {
        Self {
            stdin: stdin.into(),
            expected_stdout: expected_stdout.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JudgeStatus {
    Accepted,
    WrongAnswer,
    CompileError,
    RuntimeError,
    TimeLimit,
}

impl JudgeStatus {
    /// A program that compiled and ran but misbehaved.
    pub fn is_failing_run(self) -> bool {
        matches!(
            self,
            JudgeStatus::WrongAnswer | JudgeStatus::RuntimeError | JudgeStatus::TimeLimit
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub value: JudgeStatus,
    /// Index of the first failing test, when a test failed.
    pub failed_test: Option<usize>,
    /// Compiler diagnostics excerpt or a short description of the failure.
    pub detail: String,
}

impl JudgeVerdict {
    fn new(value: JudgeStatus, failed_test: Option<usize>, detail: impl Into<String>) -> Self {
        Self {
            value,
            failed_test,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("environment error: {0}")]
    Environment(String),
    #[error("invalid toolchain profile: {0}")]
    InvalidProfile(String),
    #[error("at least one test case is required")]
    NoTests,
}

fn default_compile_time_limit() -> f64 {
    30.0
}

/// How to build and run one language. Command templates are split on
/// whitespace; `{src}`, `{out}` and `{bin}` are replaced by paths inside the
/// scratch directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainProfile {
    pub language_id: String,
    /// File name the submitted code is written to, e.g. `main.cpp`.
    pub source_file: String,
    #[serde(default)]
    pub compile: Option<String>,
    pub run: String,
    /// Seconds per test case.
    pub time_limit: f64,
    /// Address-space limit in bytes applied to the running program.
    pub memory_limit: u64,
    #[serde(default = "default_compile_time_limit")]
    pub compile_time_limit: f64,
}

impl ToolchainProfile {
    pub fn validate(&self) -> Result<(), JudgeError> {
        let bad = |m: String| {
            Err(JudgeError::InvalidProfile(format!(
                "{}: {m}",
                self.language_id
            )))
        };
        if self.source_file.is_empty() || self.source_file.contains('/') {
            return bad(format!(
                "source_file {:?} must be a bare file name",
                self.source_file
            ));
        }
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return bad("time_limit must be positive".into());
        }
        if !(self.compile_time_limit > 0.0 && self.compile_time_limit.is_finite()) {
            return bad("compile_time_limit must be positive".into());
        }
        if self.memory_limit == 0 {
            return bad("memory_limit must be positive".into());
        }
        if let Some(compile) = &self.compile {
            check_slots(compile, &["src", "out"]).or_else(|m| bad(format!("compile: {m}")))?;
            if !compile.contains("{src}") {
                return bad("compile template must mention {src}".into());
            }
        }
        check_slots(&self.run, &["src", "bin"]).or_else(|m| bad(format!("run: {m}")))?;
        if self.run.split_whitespace().next().is_none() {
            return bad("run template is empty".into());
        }
        Ok(())
    }
}

fn check_slots(template: &str, allowed: &[&str]) -> Result<(), String> {
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        let end = after.find('}').ok_or_else(|| "unclosed '{'".to_string())?;
        let name = &after[..end];
        if !allowed.contains(&name) {
            return Err(format!("unknown slot {{{name}}}"));
        }
        rest = &after[end + 1..];
    }
    Ok(())
}

fn expand(template: &str, src: &Path, bin: &Path) -> Vec<String> {
    template
        .split_whitespace()
        .map(|tok| {
            tok.replace("{src}", &src.to_string_lossy())
                .replace("{out}", &bin.to_string_lossy())
                .replace("{bin}", &bin.to_string_lossy())
        })
        .collect()
}

/// Trailing whitespace is stripped from every line and trailing blank lines
/// are dropped; everything else must match exactly.
pub fn normalize_output(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    while lines.last() == Some(&"") {
        lines.pop();
    }
    lines
}

pub fn outputs_match(actual: &str, expected: &str) -> bool {
    normalize_output(actual) == normalize_output(expected)
}

struct Limits {
    wall: Duration,
    memory: Option<u64>,
    cpu_seconds: Option<u64>,
}

struct RunOutcome {
    status: Option<ExitStatus>,
    timed_out: bool,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn spawn_limited(argv: &[String], dir: &Path, limits: &Limits) -> Result<Child, JudgeError> {
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| JudgeError::InvalidProfile("empty command".into()))?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(dir)
        .env_clear()
        .env(
            "PATH",
            std::env::var_os("PATH").unwrap_or_else(|| "/usr/bin:/bin".into()),
        )
        .env("LANG", "C")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    let memory = limits.memory;
    let cpu = limits.cpu_seconds;
    // SAFETY: only async-signal-safe libc calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            if let Some(bytes) = memory {
                let lim = libc::rlimit {
                    rlim_cur: bytes as libc::rlim_t,
                    rlim_max: bytes as libc::rlim_t,
                };
                if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
            }
            if let Some(secs) = cpu {
                let lim = libc::rlimit {
                    rlim_cur: secs as libc::rlim_t,
                    rlim_max: (secs + 1) as libc::rlim_t,
                };
                if libc::setrlimit(libc::RLIMIT_CPU, &lim) != 0 {
                    return Err(std::io::Error::last_os_error());
                }
                // best effort: needs CAP_SYS_ADMIN
                let _ = libc::unshare(libc::CLONE_NEWNET);
            }
            Ok(())
        });
    }
    cmd.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            JudgeError::Environment(format!("toolchain binary {program:?} not found"))
        }
        _ => JudgeError::Environment(format!("failed to start {program:?}: {e}")),
    })
}

fn drain(mut reader: impl Read + Send + 'static) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match reader.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = OUTPUT_CAP.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    })
}

fn kill_group(child: &Child) {
    // negative pid addresses the whole process group
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
}

fn run_limited(
    argv: &[String],
    dir: &Path,
    stdin: &str,
    limits: &Limits,
) -> Result<RunOutcome, JudgeError> {
    let mut child = spawn_limited(argv, dir, limits)?;
    let mut input = child.stdin.take().expect("piped stdin");
    let data = stdin.as_bytes().to_vec();
    let writer = thread::spawn(move || {
        // the program may exit without reading everything
        let _ = input.write_all(&data);
    });
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));

    let deadline = Instant::now() + limits.wall;
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => {
                timed_out = true;
                kill_group(&child);
                break child.wait().ok();
            }
            Ok(None) => thread::sleep(POLL),
            Err(e) => {
                kill_group(&child);
                return Err(JudgeError::Environment(format!("wait failed: {e}")));
            }
        }
    };
    // reap anything the program left behind holding our pipes
    kill_group(&child);
    let _ = writer.join();
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    Ok(RunOutcome {
        status,
        timed_out,
        stdout,
        stderr,
    })
}

/// Diagnostics with the scratch directory stripped, so they do not vary
/// between runs.
fn excerpt(bytes: &[u8], scratch: &Path) -> String {
    let text = String::from_utf8_lossy(bytes);
    let prefix = format!("{}/", scratch.display());
    text.replace(&prefix, "")
        .chars()
        .take(DIAGNOSTICS_CHARS)
        .collect()
}

fn describe_exit(status: Option<ExitStatus>) -> String {
    match status {
        Some(s) => match (s.code(), s.signal()) {
            (Some(code), _) => format!("exit code {code}"),
            (None, Some(sig)) => format!("killed by signal {sig}"),
            _ => "abnormal exit".into(),
        },
        None => "unknown exit status".into(),
    }
}

/// Compiles `code` (when the profile has a compile step) and runs it on every
/// test, stopping at the first failure.
pub fn judge(
    code: &str,
    profile: &ToolchainProfile,
    tests: &[TestCase],
) -> Result<JudgeVerdict, JudgeError> {
    profile.validate()?;
    if tests.is_empty() {
        return Err(JudgeError::NoTests);
    }
    let scratch = tempfile::Builder::new()
        .prefix("logicerr-judge-")
        .tempdir()
        .map_err(|e| JudgeError::Environment(format!("cannot create scratch directory: {e}")))?;
    let dir = scratch.path();
    let src = dir.join(&profile.source_file);
    let bin = dir.join("prog");
    std::fs::write(&src, code)
        .map_err(|e| JudgeError::Environment(format!("cannot write source file: {e}")))?;

    if let Some(compile) = &profile.compile {
        let argv = expand(compile, &src, &bin);
        let limits = Limits {
            wall: Duration::from_secs_f64(profile.compile_time_limit),
            memory: None,
            cpu_seconds: None,
        };
        let outcome = run_limited(&argv, dir, "", &limits)?;
        if outcome.timed_out {
            return Err(JudgeError::Environment(format!(
                "compiler exceeded {}s",
                profile.compile_time_limit
            )));
        }
        if !outcome.status.is_some_and(|s| s.success()) {
            let mut diag = outcome.stderr;
            diag.extend_from_slice(&outcome.stdout);
            return Ok(JudgeVerdict::new(
                JudgeStatus::CompileError,
                None,
                excerpt(&diag, dir),
            ));
        }
    }

    let argv = expand(&profile.run, &src, &bin);
    let limits = Limits {
        wall: Duration::from_secs_f64(profile.time_limit),
        memory: Some(profile.memory_limit),
        cpu_seconds: Some(profile.time_limit.ceil() as u64 + 1),
    };
    for (i, test) in tests.iter().enumerate() {
        let outcome = run_limited(&argv, dir, &test.stdin, &limits)?;
        let cpu_killed = outcome
            .status
            .and_then(|s| s.signal())
            .is_some_and(|sig| sig == libc::SIGXCPU);
        if outcome.timed_out || cpu_killed {
            return Ok(JudgeVerdict::new(
                JudgeStatus::TimeLimit,
                Some(i),
                format!("test {i}: exceeded {}s", profile.time_limit),
            ));
        }
        if !outcome.status.is_some_and(|s| s.success()) {
            let mut detail = format!("test {i}: {}", describe_exit(outcome.status));
            if !outcome.stderr.is_empty() {
                detail.push_str(": ");
                detail.push_str(&excerpt(&outcome.stderr, dir));
            }
            return Ok(JudgeVerdict::new(
                JudgeStatus::RuntimeError,
                Some(i),
                detail,
            ));
        }
        let actual = String::from_utf8_lossy(&outcome.stdout);
        if !outputs_match(&actual, &test.expected_stdout) {
            return Ok(JudgeVerdict::new(
                JudgeStatus::WrongAnswer,
                Some(i),
                format!("test {i}: output differs"),
            ));
        }
    }
    Ok(JudgeVerdict::new(
        JudgeStatus::Accepted,
        None,
        format!("{} test(s) passed", tests.len()),
    ))
}

/// One job for [`judge_all`].
pub struct JudgeJob<'a> {
    pub code: &'a str,
    pub profile: &'a ToolchainProfile,
    pub tests: &'a [TestCase],
}

/// Runs jobs on at most `parallelism` threads; results keep job order.
pub fn judge_all(
    jobs: &[JudgeJob<'_>],
    parallelism: usize,
) -> Vec<Result<JudgeVerdict, JudgeError>> {
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<JudgeVerdict, JudgeError>>> =
        (0..jobs.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    thread::scope(|s| {
        for _ in 0..parallelism.max(1).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let r = judge(job.code, job.profile, job.tests);
                results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}
