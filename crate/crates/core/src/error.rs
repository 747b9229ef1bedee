use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bin whose probability under the alternative law is not positive.
    #[error("bin {bin} has non-positive alternative probability {mass:e}")]
    EmptyAltBin { bin: usize, mass: f64 },

    /// Brute-force solver refused an instance above its size cap.
    #[error("instance of size {n} exceeds the brute-force cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    /// Malformed structured input.
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
