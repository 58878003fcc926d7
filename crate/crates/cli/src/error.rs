use thiserror::Error;

/// Failures surfaced by the command line, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid config, manifest, map or report.
    #[error("configuration error: {0}")]
    Config(String),
    /// Anything that fails after the inputs were accepted.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<macroforge::Error> for CliError {
    fn from(e: macroforge::Error) -> Self {
        use macroforge::Error as E;
        match e {
            E::Config(_) | E::MapParse { .. } | E::MapValidation(_) | E::InvalidMacro(_) | E::InvalidAction { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(format!("json error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
