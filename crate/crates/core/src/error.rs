use thiserror::Error;

/// Failure modes shared by every module.
///
/// `Input` and `Parse` mean the caller handed over something malformed;
/// `Contract` means well-formed data that breaks an operation's precondition
/// (a map that is not an isometry, a hyperbolic element where an elliptic one
/// is required). The CLI maps the first group to exit 1 and `Contract` to 2.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for contract violations, which callers report as refusals rather
    /// than malformed input.
    pub fn is_contract(&self) -> bool {
        matches!(self, Error::Contract(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
