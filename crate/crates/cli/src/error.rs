use std::fmt;
use std::path::Path;

/// Exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Input = 2,
    Parse = 3,
    Internal = 4,
}

/// A failure reported as `error[CODE]: message` on stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub kind: ExitKind,
}

impl CliError {
    pub fn new(kind: ExitKind, code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            kind,
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Input, "InvalidArgument", message)
    }

    pub fn read(path: &Path, e: std::io::Error) -> Self {
        Self::new(ExitKind::Input, "IoError", format!("{}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: std::io::Error) -> Self {
        Self::new(ExitKind::Internal, "IoError", format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        self.kind as u8
    }
}

/// Exit class of a module error code.
pub fn kind_for(code: &str) -> ExitKind {
    match code {
        "TagNotFound"
        | "UnbalancedTags"
        | "EmptyTable"
        | "RaggedRow"
        | "ParseError"
        | "CountMismatch"
        | "MalformedAnnotation"
        | "InvalidRating"
        | "CorruptProject" => ExitKind::Parse,
        "LlmTimeout" | "LlmTransport" | "UnknownTemplate" | "MissingBinding" | "IoError" | "Internal"
        | "InconsistentEvent" | "OutOfOrder" => ExitKind::Internal,
        _ => ExitKind::Input,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

macro_rules! from_coded {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                let code = e.code();
                Self::new(kind_for(code), code, e.to_string())
            }
        }
    )*};
}

from_coded!(
    flexmind_core::Error,
    flexmind_core::model::ModelError,
    flexmind_core::llm::LlmError,
    flexmind_core::analytics::AnalyticsError,
    flexmind_core::scoring::ScoringError,
    flexmind_api::StoreError
);
