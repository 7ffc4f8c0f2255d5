//! Library side of the `ctl` binary: system files, report assembly and
//! output formatting. `main.rs` only parses arguments and dispatches.

pub mod commands;
pub mod format;
pub mod report;
pub mod system_file;

use std::fmt;

use serde_json::{Map, Value};

/// Everything that can stop a command, with its process exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Reading or writing a file failed.
    Io(String),
    /// The system file or an argument could not be parsed.
    Parse(String),
    /// Failure reported by the analysis library.
    Core(ctlvol::Error),
}

impl CliError {
    /// 0 success, 1 I/O or parse, 2 structural, 3 unsupported.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Core(e) => match e.class() {
                ctlvol::ErrorClass::Input => 1,
                ctlvol::ErrorClass::Structural => 2,
                ctlvol::ErrorClass::Unsupported => 3,
            },
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io(_) => "Io",
            CliError::Parse(_) => "Parse",
            CliError::Core(e) => e.code(),
        }
    }

    /// `{"error": {"code": ..., "message": ..., "exit_code": ...}}`
    pub fn to_json(&self) -> Value {
        let mut inner = Map::new();
        inner.insert("code".into(), Value::from(self.code()));
        inner.insert("message".into(), Value::from(self.to_string()));
        inner.insert("exit_code".into(), Value::from(self.exit_code()));
        let mut outer = Map::new();
        outer.insert("error".into(), Value::Object(inner));
        Value::Object(outer)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ctlvol::Error> for CliError {
    fn from(e: ctlvol::Error) -> Self {
        CliError::Core(e)
    }
}
