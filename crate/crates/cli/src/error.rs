use std::fmt;

/// Machine-readable error codes. Each diagnostic on stderr starts with
/// `error[<code>]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    /// Not a well-formed TOML or JSON document.
    Syntax,
    UnknownField,
    MissingField,
    /// A field of the wrong type or shape.
    Schema,
    /// A well-typed value that breaks an invariant.
    InvalidValue,
    /// The scenario lacks a section the subcommand needs.
    MissingSection,
    /// The engine rejected the request at run time.
    Domain,
    Io,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Syntax => "syntax",
            ErrorCode::UnknownField => "unknown-field",
            ErrorCode::MissingField => "missing-field",
            ErrorCode::Schema => "schema",
            ErrorCode::InvalidValue => "invalid-value",
            ErrorCode::MissingSection => "missing-section",
            ErrorCode::Domain => "domain",
            ErrorCode::Io => "io",
        }
    }

    /// 2 for anything wrong with the scenario itself, 3 for failures while
    /// running it.
    pub fn exit_status(self) -> i32 {
        match self {
            ErrorCode::Domain | ErrorCode::Io => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("error[{code}]: {message}")]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<chronopref::Error> for CliError {
    fn from(e: chronopref::Error) -> Self {
        CliError::new(ErrorCode::Domain, e.to_string())
    }
}
