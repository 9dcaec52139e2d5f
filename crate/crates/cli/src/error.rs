use std::path::{Path, PathBuf};

/// Process exit codes. Usage errors (2) are raised by the argument parser.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const MISSING_INPUT: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const BACKEND: i32 = 5;
    pub const DATA: i32 = 6;
    pub const IO: i32 = 7;
    pub const HASH_MISMATCH: i32 = 8;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing input {}: run `{hint}` first", path.display())]
    MissingInput { path: PathBuf, hint: &'static str },
    #[error("config file {} not found", .0.display())]
    MissingConfig(PathBuf),
    #[error("config: {0}")]
    Config(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("data: {0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config hash mismatch: {0} (pass --force to override)")]
    HashMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput { .. } | CliError::MissingConfig(_) => exit::MISSING_INPUT,
            CliError::Config(_) => exit::CONFIG,
            CliError::Backend(_) => exit::BACKEND,
            CliError::Data(_) => exit::DATA,
            CliError::Io { .. } => exit::IO,
            CliError::HashMismatch(_) => exit::HASH_MISMATCH,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn data<E: std::fmt::Display>(e: E) -> CliError {
        CliError::Data(e.to_string())
    }
}
