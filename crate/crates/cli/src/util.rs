use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// A proof was rejected or an integrity check failed.
    Rejected(String),
    /// Bad arguments, unreadable or malformed input, unwritable output.
    Usage(String),
    /// The nonce range ran out before a proof was found.
    Exhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Rejected(_) => 1,
            Self::Usage(_) => 2,
            Self::Exhausted(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rejected(m) | Self::Usage(m) | Self::Exhausted(m) => f.write_str(m),
        }
    }
}

impl From<egalitarian::Error> for CliError {
    fn from(e: egalitarian::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, data: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: &dyn fmt::Display| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(data).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// One line from stdin, or an interactive prompt. Never taken from argv.
pub fn read_password(from_stdin: bool) -> CliResult<Vec<u8>> {
    let line = if from_stdin {
        let mut line = String::new();
        std::io::stdin().lock().read_line(&mut line).map_err(|e| CliError::Usage(format!("cannot read password: {e}")))?;
        line.trim_end_matches(['\n', '\r']).to_string()
    } else {
        rpassword::prompt_password("password: ").map_err(|e| CliError::Usage(format!("cannot read password: {e}")))?
    };
    if line.is_empty() {
        return usage("empty password");
    }
    Ok(line.into_bytes())
}

/// Peak resident memory of this process in KiB, where the OS reports it.
pub fn peak_memory_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Prints `value` as JSON, or the human-readable text.
pub fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    } else {
        println!("{}", human());
    }
}

/// A table printed tab-separated, or comma-separated with `--csv`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, csv: bool) -> String {
        let sep = if csv { "," } else { "\t" };
        std::iter::once(&self.header).chain(&self.rows).map(|r| r.join(sep)).collect::<Vec<_>>().join("\n")
    }
}
