use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// Parameters are individually valid but jointly unusable, e.g. a
    /// Meijer-G contour cannot separate the two pole families.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An iterative or quadrature routine failed to reach its tolerance.
    #[error("numeric failure in {context}: {detail}")]
    Numeric { context: String, detail: String },

    /// Mismatched grid dimensions or an out-of-bounds box.
    #[error("shape error: {0}")]
    Shape(String),

    /// Malformed input file.
    #[error("{}:{line}: field `{field}`: {msg}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        field: String,
        msg: String,
    },

    /// Invalid scenario configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the context of a numeric failure, leaving other variants untouched.
    pub fn with_context(self, ctx: &str) -> Self {
        match self {
            Error::Numeric { context, detail } => Error::Numeric {
                context: format!("{ctx}: {context}"),
                detail,
            },
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::Io { .. } | Error::Shape(_)
        )
    }
}
