use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chronoflip::error::Error;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    /// A domain check failed on otherwise valid input.
    #[error("{0}")]
    Check(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Check(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotBistochastic(_)
            | Error::NotTracePreserving(_)
            | Error::NonPositiveProjection(_)
            | Error::PromiseViolated
            | Error::NotPsd(_)
            | Error::NoConvergence => Self::Check(e),
            other => Self::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("value serializes");
    std::fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Envelope shared by every subcommand.
#[derive(Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub tolerances: Value,
    pub ok: bool,
    pub wall_time_s: f64,
    pub result: Value,
}

pub struct Outcome {
    pub report: Report,
    pub text: String,
    pub ok: bool,
}

/// Aligned two-column text block.
pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let pad = width - k.chars().count();
        let _ = writeln!(out, "{k}{:pad$}  {v}", "");
    }
    out
}

pub fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}
