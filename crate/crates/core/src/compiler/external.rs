//! Running a real compiler as a subprocess and parsing its diagnostics.

use super::{BridgeError, Compiler, Diagnostic, PatternTable};
use regex::Regex;
use std::io::Read;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

static COUNTER: AtomicUsize = AtomicUsize::new(0);

#[derive(Debug, Clone)]
pub struct ExternalCompiler {
    program: String,
    args: Vec<String>,
    pub timeout: Duration,
    pub patterns: PatternTable,
}

impl ExternalCompiler {
    /// `command` is split on whitespace; the source file path is appended.
    pub fn new(command: &str) -> Result<Self, BridgeError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| BridgeError::BadSpec(command.to_string()))?;
        Ok(ExternalCompiler {
            program,
            args: parts.collect(),
            timeout: DEFAULT_TIMEOUT,
            patterns: PatternTable::default(),
        })
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn run(&self, path: &std::path::Path) -> Result<(std::process::ExitStatus, String), BridgeError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => BridgeError::NotFound(self.program.clone()),
                _ => BridgeError::Io(e),
            })?;
        let mut stdout = child.stdout.take().unwrap();
        let mut stderr = child.stderr.take().unwrap();
        let out_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let err_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        let start = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if start.elapsed() > self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(BridgeError::Timeout(self.timeout));
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let mut text = out_reader.join().unwrap_or_default();
        text.push_str(&err_reader.join().unwrap_or_default());
        Ok((status, text))
    }
}

/// Extracts `file:LINE:COL: error: MESSAGE` lines, converting to 0-based
/// lines clipped to `n_lines`.
pub fn parse_diagnostics(text: &str, patterns: &PatternTable, n_lines: usize) -> Vec<Diagnostic> {
    let re = Regex::new(r"^.*?:(\d+):(?:\d+:)? (?:fatal )?error: (.*)$").unwrap();
    text.lines()
        .filter_map(|line| {
            let caps = re.captures(line)?;
            let raw: usize = caps[1].parse().ok()?;
            let message = caps[2].trim().to_string();
            Some(Diagnostic {
                error_id: patterns.classify(&message),
                line: raw.saturating_sub(1).min(n_lines.saturating_sub(1)),
                message,
            })
        })
        .collect()
}

impl Compiler for ExternalCompiler {
    fn compile(&self, program: &[String]) -> Result<Vec<Diagnostic>, BridgeError> {
        let path = std::env::temp_dir().join(format!(
            "fixline-{}-{}.c",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&path, program.join("\n") + "\n")?;
        let result = self.run(&path);
        let _ = std::fs::remove_file(&path);
        let (status, text) = result?;
        let diags = parse_diagnostics(&text, &self.patterns, program.len());
        if !status.success() && diags.is_empty() {
            return Err(BridgeError::Failed { status: status.to_string(), stderr: text.chars().take(500).collect() });
        }
        Ok(diags)
    }
}
