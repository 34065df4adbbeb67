use std::fmt;

use predskip::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Sim,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Io => 3,
            ErrorKind::Sim => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ErrorKind::Config => "config",
            ErrorKind::Io => "io",
            ErrorKind::Sim => "sim",
        };
        // one line, so diagnostics stay greppable
        let msg = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{tag}]: {msg}")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match &e {
            CoreError::Config { .. } | CoreError::InvalidSpec(_) => ErrorKind::Config,
            CoreError::FileNotFound(_)
            | CoreError::Io(_)
            | CoreError::Parse { .. }
            | CoreError::EmptyTrace => ErrorKind::Io,
            _ => ErrorKind::Sim,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}
