use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Node indices in messages are 1-based, matching the file formats.
    #[error("matrix is not symmetric at node pair ({k}, {l}): {a} vs {b}")]
    Asymmetric { k: usize, l: usize, a: f64, b: f64 },

    #[error("nonzero diagonal entry at node {k}: {value}")]
    NonzeroDiagonal { k: usize, value: f64 },

    #[error("adjacency matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("length {0} is not a triangular number V(V-1)/2")]
    NotTriangular(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("matrix factorization failed: {0}")]
    Factorization(String),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Asymmetric { .. }
            | Error::NonzeroDiagonal { .. }
            | Error::NotSquare { .. }
            | Error::NotTriangular(_)
            | Error::Dimension(_)
            | Error::InvalidParameter(_)
            | Error::Unsupported(_)
            | Error::Format(_)
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::Iteration { source, .. } => source.is_validation(),
            Error::Factorization(_) | Error::Io { .. } => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
