use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid macro: {0}")]
    InvalidMacro(String),

    #[error("invalid action id {action}: environment has {num_actions} actions")]
    InvalidAction { action: usize, num_actions: usize },

    #[error("illegal call: {0}")]
    IllegalCall(&'static str),

    #[error("solver did not converge after {sweeps} sweeps (last residual {residual:e})")]
    Divergence { sweeps: usize, residual: f64 },

    #[error("{what} of {size} exceeds the cap of {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u128 },

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("map error at line {line}: {message}")]
    MapParse { line: usize, message: String },

    #[error("map validation failed: {0}")]
    MapValidation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
