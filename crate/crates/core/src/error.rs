use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),

    #[error("singular point: integrand undefined at theta = sigma = {0}")]
    SingularPoint(f64),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {panels} panels")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        panels: usize,
    },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("matrix not positive semidefinite after {attempts} jitter attempts (last jitter {last_jitter:e})")]
    NotPsd { attempts: usize, last_jitter: f64 },

    #[error("ill-conditioned regression: {0}")]
    IllConditioned(String),

    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of the numerical machinery (quadrature, factorization,
    /// regression) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::NotPsd { .. }
                | Error::IllConditioned(_)
                | Error::SingularPoint(_)
        )
    }

    /// Short machine-parsable tag used on stderr by the CLI.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::UnsupportedProfile(_) => "unsupported-profile",
            Error::SingularPoint(_) => "singular-point",
            Error::QuadratureNonConvergence { .. } => "quadrature-nonconvergence",
            Error::SizeLimit(_) => "size-limit",
            Error::NotPsd { .. } => "not-psd",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::Config { .. } => "config",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
