use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's preconditions (shape, length, range).
    InvalidInput(String),
    /// A CSV line could not be split into the expected fields.
    Parse { line: usize, message: String },
    /// A categorical field held a value outside its vocabulary.
    UnknownCategory {
        line: usize,
        field: &'static str,
        value: String,
    },
    /// Training produced a non-finite loss.
    Diverged { epoch: usize, loss: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::UnknownCategory { line, field, value } => {
                write!(f, "line {line}: unknown value {value:?} for field `{field}`")
            }
            Error::Diverged { epoch, loss } => {
                write!(f, "training diverged at epoch {epoch} (loss = {loss})")
            }
        }
    }
}

impl core::error::Error for Error {}
