use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or data structure violates one of its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    /// Coupling large enough that the lower normal mode frequency is imaginary.
    #[error("mode collapse: g/pi = {g_over_pi:.6e} Hz >= sqrt(fc*fm) = {limit:.6e} Hz")]
    ModeCollapse { g_over_pi: f64, limit: f64 },

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("unidentifiable model: {0}")]
    Unidentifiable(String),

    #[error("singular response: {0}")]
    SingularResponse(String),

    #[error("at B = {field} T: {source}")]
    AtField {
        field: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at grid point (B index {b_index}, f index {f_index}): {source}")]
    AtGridPoint {
        b_index: usize,
        f_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed data: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_field(field: f64, source: Error) -> Self {
        Error::AtField {
            field,
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, with field / grid context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtField { source, .. } | Error::AtGridPoint { source, .. } => source.root(),
            other => other,
        }
    }
}
