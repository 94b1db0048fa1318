use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` and `Numeric` map onto the CLI exit codes 2 and 3; everything
/// else (I/O, malformed data files) exits 2 as well since those arise from
/// user-supplied inputs. Shape and dimension misuse inside the library is a
/// programmer error and panics instead of returning `Err`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for config/input problems, 3 for
    /// numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
